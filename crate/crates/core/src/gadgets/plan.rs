//! Which gadget builds which distance: the witness DAG before coordinates.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::number::{ceil_sqrt, int, parse_rat, rat_to_string, Rat};

/// One node of the witness DAG, identified by its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Plan {
    /// Two points at distance 1.
    Unit,
    /// Seven-point gadget forcing `3 * delta` from `delta`-edges.
    Sqrt3 { delta: Rat },
    /// Five-point gadget forcing `4 * delta`; two of its edges are
    /// `3 * delta`, always built by `Sqrt3 { delta }`.
    Double { delta: Rat },
    /// Kite forcing `a2 - b2`; its `4 * b2` edge is always `Double { b2 }`.
    PythDiff { a2: Rat, b2: Rat },
    /// Forces `d2 / k^2` from integer distances `e`, `(k-1)e`, `ke` and one
    /// `d2`-edge.
    DivideK { d2: Rat, k: BigInt, e: BigInt },
}

impl Plan {
    pub fn target(&self) -> Rat {
        match self {
            Plan::Unit => Rat::one(),
            Plan::Sqrt3 { delta } => delta * int(3),
            Plan::Double { delta } => delta * int(4),
            Plan::PythDiff { a2, b2 } => a2 - b2,
            Plan::DivideK { d2, k, .. } => d2 / Rat::from_integer(k * k),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Plan::Unit => "unit",
            Plan::Sqrt3 { .. } => "sqrt3",
            Plan::Double { .. } => "double",
            Plan::PythDiff { .. } => "pyth",
            Plan::DivideK { .. } => "divide",
        }
    }

    /// Stable identifier, e.g. `sqrt3:1/1` or `divide:20/1,4,5`.
    pub fn key(&self) -> String {
        match self {
            Plan::Unit => "unit".into(),
            Plan::Sqrt3 { delta } | Plan::Double { delta } => {
                format!("{}:{}", self.kind(), rat_to_string(delta))
            }
            Plan::PythDiff { a2, b2 } => {
                format!("pyth:{},{}", rat_to_string(a2), rat_to_string(b2))
            }
            Plan::DivideK { d2, k, e } => format!("divide:{},{k},{e}", rat_to_string(d2)),
        }
    }

    pub fn parse_key(s: &str) -> Result<Plan> {
        let bad = || Error::parse(s, "unknown witness node key");
        if s == "unit" {
            return Ok(Plan::Unit);
        }
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let args: Vec<&str> = args.split(',').collect();
        let big = |a: &str| a.parse::<BigInt>().map_err(|_| bad());
        let plan = match (kind, args.as_slice()) {
            ("sqrt3", [d]) => Plan::Sqrt3 { delta: parse_rat(d)? },
            ("double", [d]) => Plan::Double { delta: parse_rat(d)? },
            ("pyth", [a, b]) => Plan::PythDiff {
                a2: parse_rat(a)?,
                b2: parse_rat(b)?,
            },
            ("divide", [d, k, e]) => Plan::DivideK {
                d2: parse_rat(d)?,
                k: big(k)?,
                e: big(e)?,
            },
            _ => return Err(bad()),
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Parameter preconditions of each gadget.
    pub fn validate(&self) -> Result<()> {
        let pos = |r: &Rat, what: &str| {
            if r.is_positive() {
                Ok(())
            } else {
                Err(Error::domain(format!("{what} must be positive in {}", self.key())))
            }
        };
        match self {
            Plan::Unit => Ok(()),
            Plan::Sqrt3 { delta } | Plan::Double { delta } => pos(delta, "delta"),
            Plan::PythDiff { a2, b2 } => {
                pos(b2, "b2")?;
                if a2 <= b2 {
                    return Err(Error::domain(format!("pyth_diff needs a2 > b2, got {}", self.key())));
                }
                Ok(())
            }
            Plan::DivideK { d2, k, e } => {
                pos(d2, "d2")?;
                if *k < BigInt::from(2) {
                    return Err(Error::domain(format!("divide_k needs k >= 2, got {k}")));
                }
                if Rat::from_integer(e * e) < *d2 || !e.is_positive() {
                    return Err(Error::domain(format!("divide_k needs e^2 >= d2, got e = {e}")));
                }
                Ok(())
            }
        }
    }

    /// Number of points the gadget itself contributes.
    pub fn own_points(&self) -> usize {
        match self {
            Plan::Unit => 2,
            Plan::Sqrt3 { .. } => 7,
            Plan::Double { .. } => 5,
            Plan::PythDiff { .. } => 4,
            Plan::DivideK { .. } => 5,
        }
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// An edge of a gadget in its own point numbering (0 = x, 1 = y).
#[derive(Clone, Debug)]
pub struct GadgetEdge {
    pub i: usize,
    pub j: usize,
    pub sqdist: Rat,
    /// Child plan fixed by the gadget itself rather than by the strategy.
    pub fixed: Option<Plan>,
}

/// Point labels of each gadget, in index order.
pub fn gadget_labels(plan: &Plan) -> &'static [&'static str] {
    match plan {
        Plan::Unit => &["x", "y"],
        Plan::Sqrt3 { .. } => &["x", "y", "y~", "p1", "p2", "p1~", "p2~"],
        Plan::Double { .. } => &["x", "y", "p1", "p2", "p3"],
        Plan::PythDiff { .. } => &["x", "y", "p1", "p2"],
        Plan::DivideK { .. } => &["x", "y", "z", "x~", "y~"],
    }
}

/// The edge list of each gadget, in a fixed order.
pub fn gadget_edges(plan: &Plan) -> Vec<GadgetEdge> {
    let e = |i, j, sqdist: &Rat| GadgetEdge {
        i,
        j,
        sqdist: sqdist.clone(),
        fixed: None,
    };
    match plan {
        Plan::Unit => vec![e(0, 1, &Rat::one())],
        Plan::Sqrt3 { delta } => [
            (1, 2),
            (0, 3),
            (0, 4),
            (1, 3),
            (1, 4),
            (3, 4),
            (0, 5),
            (0, 6),
            (2, 5),
            (2, 6),
            (5, 6),
        ]
        .iter()
        .map(|&(i, j)| e(i, j, delta))
        .collect(),
        Plan::Double { delta } => {
            let mut v: Vec<GadgetEdge> = [(2, 3), (2, 4), (3, 4), (0, 2), (0, 3), (1, 2), (1, 4)]
                .iter()
                .map(|&(i, j)| e(i, j, delta))
                .collect();
            let t = delta * int(3);
            for (i, j) in [(0, 4), (1, 3)] {
                v.push(GadgetEdge {
                    fixed: Some(Plan::Sqrt3 { delta: delta.clone() }),
                    ..e(i, j, &t)
                });
            }
            v
        }
        Plan::PythDiff { a2, b2 } => vec![
            e(0, 2, b2),
            e(0, 3, b2),
            e(1, 2, a2),
            e(1, 3, a2),
            GadgetEdge {
                fixed: Some(Plan::Double { delta: b2.clone() }),
                ..e(2, 3, &(b2 * int(4)))
            },
        ],
        Plan::DivideK { d2, k, e: ee } => {
            let sq = |x: BigInt| Rat::from_integer(&x * &x);
            let (e1, e2, e3) = (sq(ee.clone()), sq((k - 1) * ee), sq(k * ee));
            vec![
                e(2, 0, &e1),
                e(2, 1, &e1),
                e(0, 3, &e2),
                e(1, 4, &e2),
                e(2, 3, &e3),
                e(2, 4, &e3),
                e(3, 4, d2),
            ]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    /// Integer ladder: descend one step at a time from the least power of 4.
    #[default]
    Default,
    /// Cost-minimising mix of descent steps, doubling and `sqrt3` gadgets.
    Sqrt3Peephole,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Default => "default",
            Strategy::Sqrt3Peephole => "sqrt3-peephole",
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Strategy::Default),
            "sqrt3-peephole" => Ok(Strategy::Sqrt3Peephole),
            _ => Err(Error::parse(s, "unknown strategy")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn least_pow4_at_least(n: &BigInt) -> BigInt {
    let mut b = BigInt::one();
    while &b < n {
        b <<= 2;
    }
    b
}

fn is_pow4(n: &BigInt) -> bool {
    least_pow4_at_least(n) == *n
}

/// Projected flattened size of a single gadget given child sizes:
/// own points plus, per derived edge, the child's size minus its two anchors.
fn size_sqrt3(delta: &BigUint) -> BigUint {
    BigUint::from(7u32) + BigUint::from(11u32) * (delta - 2u32)
}

fn size_double(delta: &BigUint) -> BigUint {
    BigUint::from(5u32) + BigUint::from(7u32) * (delta - 2u32) + BigUint::from(2u32) * (size_sqrt3(delta) - 2u32)
}

fn size_descent(above: &BigUint) -> BigUint {
    // kite over a2 = m + 1, b2 = 1; the 4-edge is a doubled unit (15 points)
    BigUint::from(4u32) + BigUint::from(2u32) * (above - 2u32) + BigUint::from(13u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    Descent,
    Double,
    Sqrt3,
}

/// Chooses a plan for every positive rational squared distance.
#[derive(Clone, Debug)]
pub struct Planner {
    strategy: Strategy,
    /// Peephole table over `1..=bound`; index 0 unused.
    table: Vec<Option<Step>>,
}

/// Largest table the peephole strategy will build.
const MAX_TABLE: usize = 1 << 22;

impl Planner {
    pub fn new(strategy: Strategy) -> Self {
        Planner {
            strategy,
            table: Vec::new(),
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Integers the root plan for `d2` will ask for directly.
    fn root_integers(d2: &Rat) -> Vec<BigInt> {
        if d2.is_integer() {
            return vec![d2.to_integer()];
        }
        let n = d2.numer() * d2.denom();
        let k = d2.denom().clone();
        let e = ceil_sqrt(&Rat::from_integer(n.clone()));
        let km1 = &k - 1;
        vec![n, &e * &e, (&km1 * &e) * (&km1 * &e), (&k * &e) * (&k * &e)]
    }

    /// Sizes the peephole table for a compilation rooted at `d2`. The table
    /// only grows, so plans stay deterministic for a fixed sequence of calls.
    pub fn prepare(&mut self, d2: &Rat) -> Result<()> {
        if self.strategy != Strategy::Sqrt3Peephole || !d2.is_positive() {
            return Ok(());
        }
        let max = Self::root_integers(d2).into_iter().max().unwrap_or_else(BigInt::one);
        let bound = (least_pow4_at_least(&max) << 2u32)
            .to_usize()
            .filter(|&b| b <= MAX_TABLE)
            .ok_or_else(|| Error::domain(format!("peephole table for {max} exceeds {MAX_TABLE} entries")))?;
        if bound + 1 > self.table.len() {
            self.build_table(bound);
        }
        Ok(())
    }

    fn build_table(&mut self, bound: usize) {
        // None marks sizes not yet reachable
        let mut t: Vec<Option<(BigUint, Option<Step>)>> = vec![None; bound + 1];
        t[1] = Some((BigUint::from(2u32), None));
        // Relax to a fixed point. Every option's cost exceeds its inputs', so
        // chosen steps never form a cycle.
        loop {
            let mut changed = false;
            for m in (2..=bound).rev() {
                let mut best: Option<(BigUint, Option<Step>)> = None;
                let mut consider = |cost: BigUint, step: Step| {
                    if best.as_ref().is_none_or(|b| cost < b.0) {
                        best = Some((cost, Some(step)));
                    }
                };
                if m % 4 == 0 {
                    if let Some((c, _)) = &t[m / 4] {
                        consider(size_double(c), Step::Double);
                    }
                }
                if m % 3 == 0 {
                    if let Some((c, _)) = &t[m / 3] {
                        consider(size_sqrt3(c), Step::Sqrt3);
                    }
                }
                if m < bound {
                    if let Some((c, _)) = &t[m + 1] {
                        consider(size_descent(c), Step::Descent);
                    }
                }
                if let Some(b) = best {
                    if t[m].as_ref().is_none_or(|cur| b.0 < cur.0) {
                        t[m] = Some(b);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.table = t.into_iter().map(|e| e.map(|(_, s)| s).unwrap_or(None)).collect();
    }

    /// Plan for a positive rational squared distance.
    pub fn plan(&mut self, d2: &Rat) -> Result<Plan> {
        if !d2.is_positive() {
            return Err(Error::domain(format!("squared distance must be positive, got {}", rat_to_string(d2))));
        }
        if d2.is_integer() {
            return self.plan_nat(&d2.to_integer());
        }
        // p/q = (pq)/q^2: divide a sqrt(pq) witness by k = q
        let n = d2.numer() * d2.denom();
        let e = ceil_sqrt(&Rat::from_integer(n.clone()));
        Ok(Plan::DivideK {
            d2: Rat::from_integer(n),
            k: d2.denom().clone(),
            e,
        })
    }

    pub fn plan_nat(&mut self, n: &BigInt) -> Result<Plan> {
        if !n.is_positive() {
            return Err(Error::domain(format!("integer squared distance must be positive, got {n}")));
        }
        if n.is_one() {
            return Ok(Plan::Unit);
        }
        let r = |x: &BigInt| Rat::from_integer(x.clone());
        if self.strategy == Strategy::Sqrt3Peephole {
            if let Some(i) = n.to_usize().filter(|&i| i < self.table.len()) {
                let (q, rem) = n.div_rem(&BigInt::from(4));
                let step = self.table[i];
                return Ok(match step {
                    Some(Step::Double) if rem.is_zero() => Plan::Double { delta: r(&q) },
                    Some(Step::Sqrt3) => Plan::Sqrt3 { delta: r(&(n / 3)) },
                    _ => Plan::PythDiff {
                        a2: r(&(n + 1)),
                        b2: Rat::one(),
                    },
                });
            }
        }
        if is_pow4(n) {
            Ok(Plan::Double { delta: r(&(n >> 2)) })
        } else {
            Ok(Plan::PythDiff {
                a2: r(&(n + 1)),
                b2: Rat::one(),
            })
        }
    }

    /// Squared lengths of the gadget's derived (non-unit) edges, one entry
    /// per edge, with the plan that builds each.
    pub fn edge_children(&mut self, plan: &Plan) -> Result<Vec<(Rat, Plan)>> {
        let mut out = Vec::new();
        for e in gadget_edges(plan) {
            if e.sqdist.is_one() {
                continue;
            }
            let child = match e.fixed {
                Some(p) => p,
                None => self.plan(&e.sqdist)?,
            };
            out.push((e.sqdist, child));
        }
        Ok(out)
    }

    /// Upper bound on the flattened point count, computed from the plan
    /// alone (before any coordinates exist).
    pub fn projected_size(&mut self, plan: &Plan) -> Result<BigUint> {
        let mut memo = HashMap::new();
        self.projected_memo(plan, &mut memo)
    }

    fn projected_memo(&mut self, plan: &Plan, memo: &mut HashMap<Plan, BigUint>) -> Result<BigUint> {
        if let Some(s) = memo.get(plan) {
            return Ok(s.clone());
        }
        let mut total = BigUint::from(plan.own_points());
        for (_, child) in self.edge_children(plan)? {
            total += self.projected_memo(&child, memo)? - 2u32;
        }
        memo.insert(plan.clone(), total.clone());
        Ok(total)
    }

    /// Longest chain of child references below `plan`.
    pub fn depth(&mut self, plan: &Plan) -> Result<usize> {
        let mut memo = HashMap::new();
        self.depth_memo(plan, &mut memo)
    }

    fn depth_memo(&mut self, plan: &Plan, memo: &mut HashMap<Plan, usize>) -> Result<usize> {
        if let Some(&d) = memo.get(plan) {
            return Ok(d);
        }
        let mut best = 0;
        for (_, child) in self.edge_children(plan)? {
            best = best.max(1 + self.depth_memo(&child, memo)?);
        }
        memo.insert(plan.clone(), best);
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::rat;

    fn size(strategy: Strategy, d2: Rat) -> BigUint {
        let mut p = Planner::new(strategy);
        p.prepare(&d2).unwrap();
        let plan = p.plan(&d2).unwrap();
        p.projected_size(&plan).unwrap()
    }

    #[test]
    fn small_projected_sizes() {
        assert_eq!(size(Strategy::Default, int(1)), BigUint::from(2u32));
        assert_eq!(size(Strategy::Default, int(4)), BigUint::from(15u32));
        assert_eq!(size(Strategy::Default, int(3)), BigUint::from(43u32));
        assert_eq!(size(Strategy::Sqrt3Peephole, int(3)), BigUint::from(7u32));
        assert_eq!(size(Strategy::Default, int(2)), BigUint::from(99u32));
    }

    #[test]
    fn routes_for_three() {
        let mut d = Planner::new(Strategy::Default);
        assert_eq!(d.plan(&int(3)).unwrap(), Plan::PythDiff { a2: int(4), b2: int(1) });
        let mut p = Planner::new(Strategy::Sqrt3Peephole);
        p.prepare(&int(3)).unwrap();
        assert_eq!(p.plan(&int(3)).unwrap(), Plan::Sqrt3 { delta: int(1) });
    }

    #[test]
    fn rational_targets_divide() {
        let mut p = Planner::new(Strategy::Default);
        let plan = p.plan(&rat(5, 4)).unwrap();
        assert_eq!(
            plan,
            Plan::DivideK {
                d2: int(20),
                k: BigInt::from(4),
                e: BigInt::from(5)
            }
        );
        assert_eq!(plan.target(), rat(5, 4));
        // e is minimal: d2 = 3 gives e = 2
        let plan = p.plan(&rat(3, 4)).unwrap();
        assert!(matches!(plan, Plan::DivideK { ref e, .. } if *e == BigInt::from(4)));
        let Plan::DivideK { e, .. } = p.plan(&rat(1, 3)).unwrap() else { panic!() };
        assert_eq!(e, BigInt::from(2));
    }

    #[test]
    fn keys_round_trip() {
        let plans = [
            Plan::Unit,
            Plan::Sqrt3 { delta: int(1) },
            Plan::Double { delta: rat(3, 1) },
            Plan::PythDiff { a2: int(4), b2: int(1) },
            Plan::DivideK { d2: int(20), k: BigInt::from(4), e: BigInt::from(5) },
        ];
        for p in plans {
            assert_eq!(Plan::parse_key(&p.key()).unwrap(), p);
        }
        assert!(Plan::parse_key("divide:1/1,1,1").is_err());
        assert!(Plan::parse_key("pyth:1/1,1/1").is_err());
    }

    #[test]
    fn peephole_never_worse_than_default() {
        for n in 1..=40i64 {
            let d = size(Strategy::Default, int(n));
            let p = size(Strategy::Sqrt3Peephole, int(n));
            assert!(p <= d, "n = {n}: {p} > {d}");
        }
    }
}
