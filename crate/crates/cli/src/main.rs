use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use unitcert_core::cayley_menger::regular_simplex_identity;
use unitcert_core::counterexample::{check_rational_preservation, find_violation, parse_points};
use unitcert_core::gadgets::{FlatWitness, Strategy};
use unitcert_core::io::{emit_dot, emit_json, parse_json, Stats, WitnessDocument};
use unitcert_core::number::rat_to_string;
use unitcert_core::poly::{run_corpus, volume_identity_symbolic};
use unitcert_core::propagation::{self, Limits, Outcome};
use unitcert_core::Error;

const DEFAULT_LIMIT: usize = 100_000;

#[derive(Parser)]
#[command(name = "unitcert", version, about = "Exact unit-distance witnesses for rational squared distances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Default,
    #[value(name = "sqrt3-peephole")]
    Sqrt3Peephole,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Default => Strategy::Default,
            StrategyArg::Sqrt3Peephole => Strategy::Sqrt3Peephole,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Oracle,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a witness forcing squared distance p/q and write it as JSON.
    Witness {
        #[arg(long)]
        p: BigInt,
        #[arg(long)]
        q: BigInt,
        #[arg(long, value_enum, default_value = "default")]
        strategy: StrategyArg,
        /// Largest flattened witness to expand and check point by point.
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write the flat unit-distance graph in DOT format; needs the
        /// flattened witness to fit within `--limit`.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Re-check a witness document exactly and/or with the propagation oracle.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Largest flattened witness to expand; the oracle needs it.
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        #[arg(long, env = "UNITCERT_MAX_BRANCHES", default_value_t = propagation::DEFAULT_MAX_BRANCHES)]
        max_branches: usize,
    },
    /// Expand the determinant identity corpus symbolically.
    Identities {
        /// Largest dimension for the regular simplex identity.
        #[arg(long, default_value_t = 6)]
        n_max: usize,
    },
    /// Run the propagation oracle on a flattened witness.
    Propagate {
        file: PathBuf,
        /// Flat point indices, e.g. `0,1`.
        #[arg(long, value_parser = parse_pair)]
        target: (usize, usize),
        #[arg(long, env = "UNITCERT_MAX_BRANCHES", default_value_t = propagation::DEFAULT_MAX_BRANCHES)]
        max_branches: usize,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
        /// Print the result and trace as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Conjugate points of Q(sqrt(m))^2 and report which squared distances move.
    Counterexample {
        #[arg(long)]
        m: BigInt,
        /// JSON array of points `[[xa, xb], [ya, yb]]`, meaning
        /// `(xa + xb*sqrt(m), ya + yb*sqrt(m))`, each entry a rational string.
        #[arg(long)]
        points: PathBuf,
    },
    /// Print size figures of a witness document.
    Stats {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected X,Y")?;
    let a = a.trim().parse().map_err(|_| format!("bad index {a}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad index {b}"))?;
    Ok((a, b))
}

/// A failed command and its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn verification(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Validation { .. } | Error::AnchorMismatch { .. } => 1,
            Error::SizeLimit { .. } => 3,
            Error::Domain(_) | Error::DimensionMismatch { .. } | Error::Parse { .. } => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<WitnessDocument, Failure> {
    Ok(parse_json(&read(path)?)?)
}

fn flatten(doc: &WitnessDocument, limit: usize) -> Result<FlatWitness, Failure> {
    let flat = doc.compiler().flatten(&doc.root, limit)?;
    flat.verify()?;
    Ok(flat)
}

/// Flattens when the projected size is within `limit`; `None` otherwise.
fn try_flatten(doc: &WitnessDocument, limit: usize) -> Result<Option<FlatWitness>, Failure> {
    match flatten(doc, limit) {
        Ok(f) => Ok(Some(f)),
        Err(Failure { code: 3, .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn flat_summary(doc: &WitnessDocument, flat: &Option<FlatWitness>, limit: usize) -> String {
    match flat {
        Some(f) => format!("flat witness checked: {} points, {} unit edges", f.points.len(), f.unit_edges.len()),
        None => {
            let projected = doc.compiler().projected_size(&doc.root.plan).map(|p| p.to_string()).unwrap_or_default();
            format!("flat expansion skipped: projected {projected} points exceeds --limit {limit}")
        }
    }
}

fn witness(p: BigInt, q: BigInt, strategy: Strategy, limit: usize, out: &Path, dot: Option<&Path>) -> CmdResult {
    let (doc, _) = WitnessDocument::build(&p, &q, strategy)?;
    let nodes = doc.root.verify_dag()?;
    let flat = try_flatten(&doc, limit)?;
    if dot.is_some() && flat.is_none() {
        return Err(Failure {
            code: 3,
            message: flat_summary(&doc, &flat, limit),
        });
    }
    write(out, &emit_json(&doc))?;
    if let (Some(path), Some(f)) = (dot, &flat) {
        write(path, &emit_dot(f))?;
    }
    println!(
        "witness {}/{} via {}: {nodes} DAG nodes verified; {} -> {}",
        doc.metadata.p,
        doc.metadata.q,
        doc.root.key(),
        flat_summary(&doc, &flat, limit),
        out.display()
    );
    Ok(())
}

fn oracle(flat: &FlatWitness, target: (usize, usize), max_branches: usize) -> propagation::ForcedResult {
    propagation::run(&flat.unit_graph(), target, Limits { max_branches })
}

fn verify(file: &Path, mode: Mode, limit: usize, max_branches: usize) -> CmdResult {
    let doc = load(file)?;
    let flat = try_flatten(&doc, limit)?;
    if mode != Mode::Oracle {
        println!(
            "exact: ok ({} DAG nodes, target {}); {}",
            doc.root.nodes().len(),
            rat_to_string(&doc.root.target.2),
            flat_summary(&doc, &flat, limit)
        );
    }
    if mode != Mode::Exact {
        let Some(flat) = flat else {
            return Err(Failure {
                code: 3,
                message: format!("oracle: {}", flat_summary(&doc, &None, limit)),
            });
        };
        let (x, y, d2) = &flat.target;
        let r = oracle(&flat, (*x, *y), max_branches);
        match &r.outcome {
            Outcome::Forced(v) if v == d2 => println!("oracle: {} after {} branches", r.outcome, r.branches),
            Outcome::Capped { .. } => {
                return Err(Failure {
                    code: 3,
                    message: format!("oracle: {}", r.outcome),
                })
            }
            other => {
                return Err(Failure::verification(format!(
                    "oracle: expected Forced({}), got {other}",
                    rat_to_string(d2)
                )))
            }
        }
    }
    Ok(())
}

fn identities(n_max: usize) -> CmdResult {
    let mut failed = 0;
    for r in run_corpus()? {
        if r.ok {
            println!("ok    {}: {}", r.name, r.expected);
        } else {
            failed += 1;
            println!("FAIL  {}: expected {}, expanded to {}", r.name, r.expected, r.computed);
        }
    }
    for n in 2..=n_max {
        let ok = regular_simplex_identity(n)?;
        failed += usize::from(!ok);
        let sign = if n % 2 == 1 { "" } else { "-" };
        println!("{:<6}regular-simplex n={n}: {sign}{}*d^{}", if ok { "ok" } else { "FAIL" }, n + 1, 2 * n);
    }
    for n in 1..=n_max.min(3) {
        let ok = volume_identity_symbolic(n)?;
        failed += usize::from(!ok);
        println!("{:<6}volume n={n}: det^2 = (-1)^(n+1)/2^n * cm_det", if ok { "ok" } else { "FAIL" });
    }
    if failed > 0 {
        return Err(Failure::verification(format!("{failed} identities failed")));
    }
    Ok(())
}

fn propagate(file: &Path, target: (usize, usize), max_branches: usize, limit: usize, as_json: bool) -> CmdResult {
    let doc = load(file)?;
    let flat = flatten(&doc, limit)?;
    let n = flat.points.len();
    if target.0 >= n || target.1 >= n {
        return Err(Failure::input(format!("target {},{} out of range for {n} points", target.0, target.1)));
    }
    let r = oracle(&flat, target, max_branches);
    if as_json {
        println!("{}", serde_json::to_string_pretty(&r.to_json()).expect("JSON values serialise"));
    } else {
        println!("{} after {} branches", r.outcome, r.branches);
        for e in &r.trace {
            let values: Vec<String> = e.values.iter().map(rat_to_string).collect();
            let poly = e.polynomial.as_deref().map(|p| format!(" [{p}]")).unwrap_or_default();
            println!("  #{} {} {:?} {{{}}}{poly} {}", e.branch, e.rule.name(), e.points, values.join(", "), e.note);
        }
    }
    match r.outcome {
        Outcome::Forced(_) => Ok(()),
        Outcome::Capped { .. } => Err(Failure {
            code: 3,
            message: r.outcome.to_string(),
        }),
        _ => Err(Failure::verification(r.outcome.to_string())),
    }
}

fn counterexample(m: BigInt, points: &Path) -> CmdResult {
    let v: Value = serde_json::from_str(&read(points)?).map_err(|e| Failure::input(format!("{}: {e}", points.display())))?;
    let pts = parse_points(&m, &v)?;
    let report = check_rational_preservation(&pts)?;
    let mut violations = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if let Some((before, after)) = find_violation(&pts[i], &pts[j])? {
                violations.push(json!({
                    "i": i,
                    "j": j,
                    "before": before.display(&m),
                    "after": after.display(&m),
                }));
            }
        }
    }
    let mut out = report.to_json();
    out["violations"] = Value::Array(violations);
    println!("{}", serde_json::to_string_pretty(&out).expect("JSON values serialise"));
    if !report.rational_preserved() {
        return Err(Failure::verification("a rational squared distance moved"));
    }
    Ok(())
}

fn stats(file: &Path, limit: usize) -> CmdResult {
    let doc = load(file)?;
    let st = Stats::collect(&doc, limit)?;
    println!("{}", serde_json::to_string_pretty(&st.to_json()).expect("JSON values serialise"));
    Ok(())
}

/// Deep witness DAGs recurse once per level; the main thread's stack is too small.
const STACK_BYTES: usize = 1 << 30;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let worker = std::thread::Builder::new()
        .stack_size(STACK_BYTES)
        .spawn(move || run(cli))
        .expect("spawn worker thread");
    let result = worker.join().unwrap_or_else(|_| {
        Err(Failure {
            code: 1,
            message: "internal error".into(),
        })
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Witness {
            p,
            q,
            strategy,
            limit,
            out,
            dot,
        } => witness(p, q, strategy.into(), limit, &out, dot.as_deref()),
        Command::Verify {
            file,
            mode,
            limit,
            max_branches,
        } => verify(&file, mode, limit, max_branches),
        Command::Identities { n_max } => identities(n_max),
        Command::Propagate {
            file,
            target,
            max_branches,
            limit,
            json,
        } => propagate(&file, target, max_branches, limit, json),
        Command::Counterexample { m, points } => counterexample(m, &points),
        Command::Stats { file, limit } => stats(&file, limit),
    }
}
