//! Canonical JSON witness documents and DOT export.
//!
//! Rationals are written as reduced `p/q` strings. A tower element above Q
//! is `{"level": l, "a": .., "b": ..}` meaning `a + b*sqrt(r_l)`, with `a`
//! and `b` strictly below level `l` and `b != 0`. Object keys are sorted.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde_json::{json, Map, Value};

use crate::cayley_menger::PointN;
use crate::error::{Error, Result};
use crate::gadgets::{gadget_edges, gadget_labels, Compiler, Edge, FlatWitness, Plan, Provenance, Strategy, WitnessSet};
use crate::number::{parse_rat, rat_to_string, Rat, TReal, TowerCtx};

pub const FORMAT: &str = "unitcert-witness";
pub const VERSION: &str = "1";

/// How the root gadget reaches its target.
pub fn route_name(plan: &Plan) -> &'static str {
    match plan {
        Plan::Unit => "unit",
        Plan::Sqrt3 { .. } => "sqrt3-scaling",
        Plan::Double { .. } => "doubling",
        Plan::PythDiff { .. } => "pythagorean-difference",
        Plan::DivideK { .. } => "divide",
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metadata {
    pub p: BigInt,
    pub q: BigInt,
    pub strategy: Strategy,
}

#[derive(Clone, Debug)]
pub struct WitnessDocument {
    pub version: String,
    pub tower: TowerCtx,
    pub metadata: Metadata,
    pub root: Arc<WitnessSet>,
}

impl WitnessDocument {
    /// Compiles a witness for `p/q`; the compiler is returned for flattening.
    pub fn build(p: &BigInt, q: &BigInt, strategy: Strategy) -> Result<(WitnessDocument, Compiler)> {
        if !p.is_positive() || !q.is_positive() {
            return Err(Error::domain(format!("p and q must be positive, got {p}/{q}")));
        }
        let mut c = Compiler::new(strategy);
        let root = c.compile(&Rat::new(p.clone(), q.clone()))?;
        let doc = WitnessDocument {
            version: VERSION.into(),
            tower: c.ctx().clone(),
            metadata: Metadata {
                p: p.clone(),
                q: q.clone(),
                strategy,
            },
            root,
        };
        Ok((doc, c))
    }

    pub fn target(&self) -> Rat {
        Rat::new(self.metadata.p.clone(), self.metadata.q.clone())
    }

    /// A compiler seeded with this document's nodes and tower.
    pub fn compiler(&self) -> Compiler {
        let nodes = self.root.nodes().into_iter().map(|w| Arc::new(w.clone())).collect::<Vec<_>>();
        Compiler::with_nodes(self.metadata.strategy, self.tower.clone(), nodes)
    }
}

pub fn treal_to_json(x: &TReal) -> Value {
    match x.ext() {
        None => Value::String(rat_to_string(x.as_rat().expect("rational"))),
        Some(e) => json!({
            "level": e.level().index(),
            "a": treal_to_json(e.a()),
            "b": treal_to_json(e.b()),
        }),
    }
}

/// Reads a tower element, insisting on canonical form.
pub fn treal_from_json(ctx: &TowerCtx, v: &Value, loc: &str) -> Result<TReal> {
    match v {
        Value::String(s) => parse_rat(s).map(TReal::from).map_err(|e| relocate(e, loc)),
        Value::Object(m) => {
            let level = m
                .get("level")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::parse(loc, "missing integer field \"level\""))? as usize;
            let lv = ctx
                .level(level)
                .ok_or_else(|| Error::parse(loc, format!("level {level} is not in the tower")))?
                .clone();
            let a = treal_from_json(ctx, field(m, "a", loc)?, &format!("{loc}.a"))?;
            let b = treal_from_json(ctx, field(m, "b", loc)?, &format!("{loc}.b"))?;
            if a.level() >= level || b.level() >= level {
                return Err(Error::parse(loc, format!("coefficients must live below level {level}")));
            }
            if b.is_zero() {
                return Err(Error::parse(loc, "non-canonical: zero surd coefficient"));
            }
            if m.len() != 3 {
                return Err(Error::parse(loc, "unexpected fields"));
            }
            Ok(TReal::compose(&lv, a, b))
        }
        _ => Err(Error::parse(loc, "expected a \"p/q\" string or a tower object")),
    }
}

fn relocate(e: Error, loc: &str) -> Error {
    match e {
        Error::Parse { location, message } => Error::parse(loc, format!("{message} ({location})")),
        other => other,
    }
}

fn field<'a>(m: &'a Map<String, Value>, k: &str, loc: &str) -> Result<&'a Value> {
    m.get(k).ok_or_else(|| Error::parse(loc, format!("missing field \"{k}\"")))
}

fn str_field<'a>(m: &'a Map<String, Value>, k: &str, loc: &str) -> Result<&'a str> {
    field(m, k, loc)?
        .as_str()
        .ok_or_else(|| Error::parse(format!("{loc}.{k}"), "expected a string"))
}

fn arr_field<'a>(m: &'a Map<String, Value>, k: &str, loc: &str) -> Result<&'a Vec<Value>> {
    field(m, k, loc)?
        .as_array()
        .ok_or_else(|| Error::parse(format!("{loc}.{k}"), "expected an array"))
}

fn obj<'a>(v: &'a Value, loc: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(loc, "expected an object"))
}

fn index_field(m: &Map<String, Value>, k: &str, loc: &str) -> Result<usize> {
    field(m, k, loc)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::parse(format!("{loc}.{k}"), "expected a nonnegative integer"))
}

fn node_to_json(w: &WitnessSet) -> Value {
    let points: Vec<Value> = w
        .points
        .iter()
        .map(|(label, p)| {
            json!({
                "label": label,
                "coords": p.coords.iter().map(treal_to_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    let edges: Vec<Value> = w
        .edges
        .iter()
        .map(|e| {
            let child = match e.provenance {
                Provenance::Unit => Value::Null,
                Provenance::Child(c) => Value::String(w.children[c].key()),
            };
            json!({"i": e.i, "j": e.j, "sqdist": rat_to_string(&e.sqdist), "child": child})
        })
        .collect();
    json!({
        "key": w.key(),
        "points": points,
        "edges": edges,
        "target": {"i": w.target.0, "j": w.target.1, "sqdist": rat_to_string(&w.target.2)},
    })
}

pub fn document_to_value(doc: &WitnessDocument) -> Value {
    let plan = &doc.root.plan;
    let (k, e) = match plan {
        Plan::DivideK { k, e, .. } => (Value::String(k.to_string()), Value::String(e.to_string())),
        _ => (Value::Null, Value::Null),
    };
    json!({
        "format": FORMAT,
        "version": doc.version,
        "metadata": {
            "p": doc.metadata.p.to_string(),
            "q": doc.metadata.q.to_string(),
            "target": rat_to_string(&doc.target()),
            "strategy": doc.metadata.strategy.name(),
            "route": route_name(plan),
            "plan": plan.key(),
            "k": k,
            "e": e,
        },
        "tower": doc.tower.levels().iter().map(|l| treal_to_json(l.radicand())).collect::<Vec<_>>(),
        "root": doc.root.key(),
        "nodes": doc.root.nodes().into_iter().map(node_to_json).collect::<Vec<_>>(),
    })
}

/// Deterministic pretty-printed JSON with a trailing newline.
pub fn emit_json(doc: &WitnessDocument) -> String {
    let mut s = serde_json::to_string_pretty(&document_to_value(doc)).expect("JSON values serialise");
    s.push('\n');
    s
}

/// Parses, validates structure against the gadget catalogue and re-verifies
/// every node exactly.
pub fn parse_json(text: &str) -> Result<WitnessDocument> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let top = obj(&v, "document")?;
    if str_field(top, "format", "document")? != FORMAT {
        return Err(Error::parse("document.format", format!("expected \"{FORMAT}\"")));
    }
    let version = str_field(top, "version", "document")?;
    if version != VERSION {
        return Err(Error::parse("document.version", format!("unsupported version {version}")));
    }

    let mut tower = TowerCtx::new();
    for (i, r) in arr_field(top, "tower", "document")?.iter().enumerate() {
        let loc = format!("tower[{i}]");
        let r = treal_from_json(&tower, r, &loc)?;
        let root = tower.sqrt(&r).map_err(|e| Error::validation(&loc, e.to_string()))?;
        let fresh = tower.depth() == i + 1
            && tower.level(i + 1).is_some_and(|l| root == TReal::generator(l) && *l.radicand() == r);
        if !fresh {
            return Err(Error::validation(&loc, format!("{r} does not give a new canonical level")));
        }
    }

    let meta = obj(field(top, "metadata", "document")?, "metadata")?;
    let big = |k: &str| -> Result<BigInt> {
        str_field(meta, k, "metadata")?
            .parse()
            .map_err(|_| Error::parse(format!("metadata.{k}"), "expected an integer string"))
    };
    let metadata = Metadata {
        p: big("p")?,
        q: big("q")?,
        strategy: str_field(meta, "strategy", "metadata")?
            .parse()
            .map_err(|e: Error| relocate(e, "metadata.strategy"))?,
    };
    if !metadata.p.is_positive() || !metadata.q.is_positive() {
        return Err(Error::validation("metadata", "p and q must be positive"));
    }

    let mut built: HashMap<String, Arc<WitnessSet>> = HashMap::new();
    let mut last = None;
    for (n, node) in arr_field(top, "nodes", "document")?.iter().enumerate() {
        let loc = format!("nodes[{n}]");
        let w = parse_node(&tower, obj(node, &loc)?, &loc, &built)?;
        if built.contains_key(&w.key()) {
            return Err(Error::validation(&loc, format!("duplicate node {}", w.key())));
        }
        let w = Arc::new(w);
        last = Some(w.key());
        built.insert(w.key(), w);
    }
    let root_key = str_field(top, "root", "document")?;
    if last.as_deref() != Some(root_key) {
        return Err(Error::validation("document.root", "root must be the last node"));
    }
    let root = built[root_key].clone();
    let want = Rat::new(metadata.p.clone(), metadata.q.clone());
    if root.target.2 != want {
        return Err(Error::validation(
            "document.root",
            format!("root forces {}, metadata asks for {}", rat_to_string(&root.target.2), rat_to_string(&want)),
        ));
    }
    if root.nodes().len() != built.len() {
        return Err(Error::validation("document.nodes", "nodes unreachable from the root"));
    }
    for (k, want) in [("plan", root.key()), ("route", route_name(&root.plan).to_string())] {
        if str_field(meta, k, "metadata")? != want {
            return Err(Error::validation(format!("metadata.{k}"), format!("expected {want}")));
        }
    }
    root.verify_dag()?;
    Ok(WitnessDocument {
        version: version.into(),
        tower,
        metadata,
        root,
    })
}

fn parse_node(
    tower: &TowerCtx,
    m: &Map<String, Value>,
    loc: &str,
    built: &HashMap<String, Arc<WitnessSet>>,
) -> Result<WitnessSet> {
    let key = str_field(m, "key", loc)?;
    let plan = Plan::parse_key(key).map_err(|e| relocate(e, &format!("{loc}.key")))?;
    let labels = gadget_labels(&plan);
    let raw_points = arr_field(m, "points", loc)?;
    if raw_points.len() != labels.len() {
        return Err(Error::validation(
            format!("{loc}.points"),
            format!("{} expects {} points, got {}", key, labels.len(), raw_points.len()),
        ));
    }
    let mut points = Vec::new();
    for (i, p) in raw_points.iter().enumerate() {
        let ploc = format!("{loc}.points[{i}]");
        let pm = obj(p, &ploc)?;
        let label = str_field(pm, "label", &ploc)?;
        if label != labels[i] {
            return Err(Error::validation(&ploc, format!("expected label {}", labels[i])));
        }
        let coords = arr_field(pm, "coords", &ploc)?;
        if coords.len() != 2 {
            return Err(Error::parse(format!("{ploc}.coords"), "expected two coordinates"));
        }
        let coords = coords
            .iter()
            .enumerate()
            .map(|(c, v)| treal_from_json(tower, v, &format!("{ploc}.coords[{c}]")))
            .collect::<Result<Vec<_>>>()?;
        points.push((label.to_string(), PointN::new(coords)));
    }

    let expected = gadget_edges(&plan);
    let raw_edges = arr_field(m, "edges", loc)?;
    if raw_edges.len() != expected.len() {
        return Err(Error::validation(
            format!("{loc}.edges"),
            format!("{key} has {} edges, got {}", expected.len(), raw_edges.len()),
        ));
    }
    let mut children: Vec<Arc<WitnessSet>> = Vec::new();
    let mut edges = Vec::new();
    for (k, (e, ge)) in raw_edges.iter().zip(&expected).enumerate() {
        let eloc = format!("{loc}.edges[{k}]");
        let em = obj(e, &eloc)?;
        let (i, j) = (index_field(em, "i", &eloc)?, index_field(em, "j", &eloc)?);
        let sqdist = parse_rat(str_field(em, "sqdist", &eloc)?).map_err(|e| relocate(e, &format!("{eloc}.sqdist")))?;
        if (i, j) != (ge.i, ge.j) || sqdist != ge.sqdist {
            return Err(Error::validation(
                &eloc,
                format!(
                    "edge {i}-{j} with squared length {} does not match the gadget's edge {}-{} of {}",
                    rat_to_string(&sqdist),
                    ge.i,
                    ge.j,
                    rat_to_string(&ge.sqdist)
                ),
            ));
        }
        let provenance = match field(em, "child", &eloc)? {
            Value::Null => {
                if !sqdist.is_one() {
                    return Err(Error::validation(&eloc, "non-unit edge without a child witness"));
                }
                Provenance::Unit
            }
            Value::String(ck) => {
                let child = built
                    .get(ck)
                    .ok_or_else(|| Error::validation(&eloc, format!("child {ck} is not defined earlier")))?;
                if let Some(fixed) = &ge.fixed {
                    if fixed != &child.plan {
                        return Err(Error::validation(&eloc, format!("edge requires child {}", fixed.key())));
                    }
                }
                let idx = match children.iter().position(|c| c.key() == *ck) {
                    Some(i) => i,
                    None => {
                        children.push(child.clone());
                        children.len() - 1
                    }
                };
                Provenance::Child(idx)
            }
            _ => return Err(Error::parse(format!("{eloc}.child"), "expected a node key or null")),
        };
        edges.push(Edge { i, j, sqdist, provenance });
    }

    let tm = obj(field(m, "target", loc)?, &format!("{loc}.target"))?;
    let tloc = format!("{loc}.target");
    let target = (
        index_field(tm, "i", &tloc)?,
        index_field(tm, "j", &tloc)?,
        parse_rat(str_field(tm, "sqdist", &tloc)?).map_err(|e| relocate(e, &tloc))?,
    );
    if target != (0, 1, plan.target()) {
        return Err(Error::validation(&tloc, format!("{key} targets 0-1 at {}", rat_to_string(&plan.target()))));
    }
    let w = WitnessSet {
        plan,
        points,
        edges,
        target,
        children,
    };
    w.verify_node()?;
    Ok(w)
}

/// Size figures reported by `stats`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stats {
    pub dag_nodes: usize,
    pub flat_points: Option<usize>,
    pub flat_edges: Option<usize>,
    pub projected_points: String,
    pub tower_depth: usize,
    pub recursion_depth: usize,
}

impl Stats {
    /// Flattens only when the projected size is within `limit`.
    pub fn collect(doc: &WitnessDocument, limit: usize) -> Result<Stats> {
        let mut c = doc.compiler();
        let projected = c.projected_size(&doc.root.plan)?;
        let flat = match c.flatten(&doc.root, limit) {
            Ok(f) => Some(f),
            Err(Error::SizeLimit { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Stats {
            dag_nodes: doc.root.nodes().len(),
            flat_points: flat.as_ref().map(|f| f.points.len()),
            flat_edges: flat.as_ref().map(|f| f.unit_edges.len()),
            projected_points: projected.to_string(),
            tower_depth: doc.tower.depth(),
            recursion_depth: doc.root.depth(),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dag_nodes": self.dag_nodes,
            "flat_points": self.flat_points,
            "flat_edges": self.flat_edges,
            "projected_points": self.projected_points,
            "tower_depth": self.tower_depth,
            "recursion_depth": self.recursion_depth,
        })
    }
}

/// Unit-distance graph in DOT; the target pair is drawn in red, dashed when
/// it is not itself a unit edge.
pub fn emit_dot(flat: &FlatWitness) -> String {
    let (tx, ty, d2) = &flat.target;
    let target = (*tx.min(ty), *tx.max(ty));
    let ends: BTreeSet<usize> = [*tx, *ty].into();
    let mut s = String::from("graph witness {\n  node [shape=circle, fontsize=8];\n");
    for (i, p) in flat.points.iter().enumerate() {
        let label = format!("{i}\\n({:.6}, {:.6})", p.x().to_f64(), p.y().to_f64());
        let extra = if ends.contains(&i) { ", color=red" } else { "" };
        let _ = writeln!(s, "  {i} [label=\"{label}\"{extra}];");
    }
    let mut target_drawn = false;
    for &(i, j) in &flat.unit_edges {
        if (i, j) == target {
            target_drawn = true;
            let _ = writeln!(s, "  {i} -- {j} [color=red, penwidth=2];");
        } else {
            let _ = writeln!(s, "  {i} -- {j};");
        }
    }
    if !target_drawn {
        let _ = writeln!(
            s,
            "  {} -- {} [color=red, style=dashed, label=\"{}\"];",
            target.0,
            target.1,
            rat_to_string(d2)
        );
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::int;

    fn doc(p: i64, q: i64, s: Strategy) -> WitnessDocument {
        WitnessDocument::build(&BigInt::from(p), &BigInt::from(q), s).unwrap().0
    }

    #[test]
    fn round_trip_is_identity_on_text() {
        for (p, q, s) in [(1, 1, Strategy::Default), (3, 1, Strategy::Sqrt3Peephole), (5, 4, Strategy::Default), (7, 3, Strategy::Default)] {
            let d = doc(p, q, s);
            let text = emit_json(&d);
            let back = parse_json(&text).unwrap();
            assert_eq!(emit_json(&back), text);
            assert_eq!(back.metadata, d.metadata);
            assert_eq!(back.tower.depth(), d.tower.depth());
        }
    }

    #[test]
    fn unit_document_has_two_points() {
        let v = document_to_value(&doc(1, 1, Strategy::Default));
        assert_eq!(v["nodes"].as_array().unwrap().len(), 1);
        assert_eq!(v["nodes"][0]["points"].as_array().unwrap().len(), 2);
        assert_eq!(v["metadata"]["route"], "unit");
    }

    #[test]
    fn route_is_recorded() {
        let v = document_to_value(&doc(3, 1, Strategy::Default));
        assert_eq!(v["metadata"]["route"], "pythagorean-difference");
        let v = document_to_value(&doc(3, 1, Strategy::Sqrt3Peephole));
        assert_eq!(v["metadata"]["route"], "sqrt3-scaling");
        let v = document_to_value(&doc(5, 4, Strategy::Default));
        assert_eq!(v["metadata"]["route"], "divide");
        assert_eq!(v["metadata"]["k"], "4");
        assert_eq!(v["metadata"]["e"], "5");
    }

    #[test]
    fn emission_is_deterministic() {
        assert_eq!(emit_json(&doc(5, 4, Strategy::Default)), emit_json(&doc(5, 4, Strategy::Default)));
    }

    #[test]
    fn tampered_documents_are_rejected() {
        let text = emit_json(&doc(3, 1, Strategy::Sqrt3Peephole));
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["nodes"][0]["edges"][0]["sqdist"] = json!("2/1");
        assert!(matches!(parse_json(&v.to_string()), Err(Error::Validation { .. })));

        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["nodes"][0]["points"][3]["coords"][0] = json!("1/3");
        let err = parse_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }), "{err}");

        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["metadata"]["p"] = json!("2");
        assert!(matches!(parse_json(&v.to_string()), Err(Error::Validation { .. })));
    }

    #[test]
    fn malformed_documents_name_a_location() {
        assert!(matches!(parse_json("{"), Err(Error::Parse { .. })));
        let text = emit_json(&doc(3, 1, Strategy::Sqrt3Peephole));
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["nodes"][0]["points"][2]["coords"][1] = json!({"level": 9, "a": "0/1", "b": "1/1"});
        match parse_json(&v.to_string()) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "nodes[0].points[2].coords[1]"),
            other => panic!("unexpected {other:?}"),
        }
        v["nodes"][0]["points"][2]["coords"][1] = json!("2/4");
        assert!(matches!(parse_json(&v.to_string()), Err(Error::Parse { .. })));
    }

    #[test]
    fn parsed_documents_flatten() {
        let d = parse_json(&emit_json(&doc(3, 1, Strategy::Default))).unwrap();
        let mut c = d.compiler();
        let f = c.flatten(&d.root, 1000).unwrap();
        f.verify().unwrap();
        assert_eq!(f.target.2, int(3));
        let st = Stats::collect(&d, 1000).unwrap();
        assert_eq!(st.flat_points, Some(f.points.len()));
    }

    #[test]
    fn dot_output() {
        let mut c = Compiler::new(Strategy::Default);
        let w = c.compile(&int(1)).unwrap();
        let f = c.flatten(&w, 10).unwrap();
        let dot = emit_dot(&f);
        assert_eq!(dot.matches(" -- ").count(), 1);
        assert!(dot.contains("(1.000000, 0.000000)"));

        let mut c = Compiler::new(Strategy::Sqrt3Peephole);
        let w = c.compile(&int(3)).unwrap();
        let f = c.flatten(&w, 100).unwrap();
        let dot = emit_dot(&f);
        assert_eq!(dot.matches("label=").count(), 7 + 1);
        assert_eq!(dot.matches(" -- ").count(), 11 + 1);
        assert!(dot.contains("style=dashed"));
        assert_eq!(dot, emit_dot(&f));
    }
}
