//! Witness compiler: builds, for a rational squared distance, a finite planar
//! point set whose unit-distance graph forces that distance.
//!
//! Each gadget is built once in canonical pose (x at the origin, y on the
//! positive horizontal axis) and shared as a DAG node; [`Compiler::flatten`]
//! carries children onto their edges by exact rigid motions.

mod configs;
mod flatten;
mod plan;

pub use configs::{
    interpolation_config, kempe_config, kempe_perpendicularity, parallelogram_transfer, rhombus_chain,
    Configuration, DistanceClaim,
};
pub use flatten::{FlatWitness, LedgerEntry};
pub use plan::{gadget_edges, gadget_labels, GadgetEdge, Plan, Planner, Strategy};

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};

use crate::cayley_menger::{phi, PointN};
use crate::error::{Error, Result};
use crate::number::{int, rat, rat_to_string, Rat, TReal, TowerCtx};

/// Justification of a witness edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// A genuine unit edge.
    Unit,
    /// Forced by the child witness at this index of `children`.
    Child(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub sqdist: Rat,
    pub provenance: Provenance,
}

/// One DAG node: a gadget with exact coordinates, labelled edges, a target
/// pair (always points 0 and 1) and shared child witnesses.
#[derive(Clone, Debug)]
pub struct WitnessSet {
    pub plan: Plan,
    pub points: Vec<(String, PointN)>,
    pub edges: Vec<Edge>,
    pub target: (usize, usize, Rat),
    pub children: Vec<Arc<WitnessSet>>,
}

impl WitnessSet {
    pub fn key(&self) -> String {
        self.plan.key()
    }

    pub fn point(&self, i: usize) -> &PointN {
        &self.points[i].1
    }

    /// Carries the node's own points by the proper rigid motion taking its
    /// target pair onto `(p, q)`. Children stay shared and canonical.
    pub fn instantiate(&self, p: &PointN, q: &PointN) -> Result<WitnessSet> {
        let (x, y) = (self.point(self.target.0), self.point(self.target.1));
        let frame = Frame::new(x, y)?;
        let img = frame.onto(p, q)?;
        let points = self
            .points
            .iter()
            .map(|(l, pt)| Ok((l.clone(), img.map(&frame.coords(pt)?)?)))
            .collect::<Result<Vec<_>>>()?;
        let out = WitnessSet {
            points,
            ..self.clone()
        };
        out.verify_node()?;
        Ok(out)
    }

    /// Checks this node's edges, target and child targets exactly.
    pub fn verify_node(&self) -> Result<()> {
        let n = self.points.len();
        let where_ = |what: String| format!("node {} {what}", self.key());
        for (k, e) in self.edges.iter().enumerate() {
            if e.i >= n || e.j >= n || e.i == e.j {
                return Err(Error::validation(where_(format!("edge {k}")), "bad endpoint index"));
            }
            let got = phi(self.point(e.i), self.point(e.j))?;
            if got != TReal::from(e.sqdist.clone()) {
                return Err(Error::validation(
                    where_(format!("edge {k} ({}-{})", self.points[e.i].0, self.points[e.j].0)),
                    format!("squared length {got} differs from {}", rat_to_string(&e.sqdist)),
                ));
            }
            match e.provenance {
                Provenance::Unit if !e.sqdist.is_one() => {
                    return Err(Error::validation(where_(format!("edge {k}")), "non-unit edge marked unit"));
                }
                Provenance::Child(c) => {
                    let child = self.children.get(c).ok_or_else(|| {
                        Error::validation(where_(format!("edge {k}")), "dangling child reference")
                    })?;
                    if child.target.2 != e.sqdist {
                        return Err(Error::validation(
                            where_(format!("edge {k}")),
                            format!("child {} forces {}, edge needs {}", child.key(), rat_to_string(&child.target.2), rat_to_string(&e.sqdist)),
                        ));
                    }
                }
                _ => {}
            }
        }
        let (x, y, d2) = &self.target;
        if *x >= n || *y >= n {
            return Err(Error::validation(where_("target".into()), "bad target index"));
        }
        let got = phi(self.point(*x), self.point(*y))?;
        if got != TReal::from(d2.clone()) {
            return Err(Error::validation(
                where_("target".into()),
                format!("squared distance {got} differs from {}", rat_to_string(d2)),
            ));
        }
        Ok(())
    }

    /// Verifies every node reachable from this one.
    pub fn verify_dag(&self) -> Result<usize> {
        let mut seen = HashMap::new();
        self.verify_rec(&mut seen, &mut Vec::new())?;
        Ok(seen.len())
    }

    fn verify_rec(&self, seen: &mut HashMap<String, ()>, stack: &mut Vec<String>) -> Result<()> {
        let key = self.key();
        if stack.contains(&key) {
            return Err(Error::validation(format!("node {key}"), "child references form a cycle"));
        }
        if seen.contains_key(&key) {
            return Ok(());
        }
        self.verify_node()?;
        stack.push(key.clone());
        for c in &self.children {
            c.verify_rec(seen, stack)?;
        }
        stack.pop();
        seen.insert(key, ());
        Ok(())
    }

    /// Distinct nodes reachable from this one, in depth-first post-order
    /// (children before parents).
    pub fn nodes(&self) -> Vec<&WitnessSet> {
        fn go<'a>(w: &'a WitnessSet, seen: &mut HashMap<String, ()>, out: &mut Vec<&'a WitnessSet>) {
            if seen.contains_key(&w.key()) {
                return;
            }
            seen.insert(w.key(), ());
            for c in &w.children {
                go(c, seen, out);
            }
            out.push(w);
        }
        let mut out = Vec::new();
        go(self, &mut HashMap::new(), &mut out);
        out
    }

    /// Longest chain of child references.
    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }
}

/// Orthonormal-up-to-scale frame on an ordered pair: coordinates of `pt`
/// are `(alpha, beta)` with `pt = x + alpha (y - x) + beta perp(y - x)`.
pub(crate) struct Frame {
    x: PointN,
    v: PointN,
    inv_len2: TReal,
    len2: TReal,
}

impl Frame {
    pub(crate) fn new(x: &PointN, y: &PointN) -> Result<Frame> {
        let v = y.sub(x)?;
        let len2 = v.dot(&v)?;
        let inv_len2 = len2.inv()?;
        Ok(Frame {
            x: x.clone(),
            v,
            inv_len2,
            len2,
        })
    }

    pub(crate) fn coords(&self, pt: &PointN) -> Result<(TReal, TReal)> {
        let w = pt.sub(&self.x)?;
        Ok((
            w.dot(&self.v)? * &self.inv_len2,
            w.dot(&self.v.perp())? * &self.inv_len2,
        ))
    }

    /// The frame on `(p, q)`; fails unless `|pq| = |xy|`.
    pub(crate) fn onto(&self, p: &PointN, q: &PointN) -> Result<Frame> {
        let other = Frame::new(p, q)?;
        if other.len2 != self.len2 {
            return Err(Error::AnchorMismatch {
                expected: self.len2.to_string(),
                actual: other.len2.to_string(),
            });
        }
        Ok(other)
    }

    pub(crate) fn map(&self, (a, b): &(TReal, TReal)) -> Result<PointN> {
        let u = self.v.scale(a);
        let w = self.v.perp().scale(b);
        self.x.add(&u)?.add(&w)
    }
}

/// Owns the tower, planner and memoised DAG nodes for one compilation
/// session. All points fed to a compiler must be built in its tower.
pub struct Compiler {
    ctx: TowerCtx,
    planner: Planner,
    nodes: HashMap<Plan, Arc<WitnessSet>>,
    flats: HashMap<Plan, Arc<flatten::FrameFlat>>,
}

impl Compiler {
    pub fn new(strategy: Strategy) -> Self {
        Compiler {
            ctx: TowerCtx::new(),
            planner: Planner::new(strategy),
            nodes: HashMap::new(),
            flats: HashMap::new(),
        }
    }

    /// A session seeded with existing nodes, e.g. from a parsed document.
    /// Their points must live in `ctx`.
    pub fn with_nodes(strategy: Strategy, ctx: TowerCtx, nodes: impl IntoIterator<Item = Arc<WitnessSet>>) -> Self {
        let mut c = Compiler::new(strategy);
        c.ctx = ctx;
        c.nodes = nodes.into_iter().map(|w| (w.plan.clone(), w)).collect();
        c
    }

    pub fn ctx(&self) -> &TowerCtx {
        &self.ctx
    }

    pub fn strategy(&self) -> Strategy {
        self.planner.strategy()
    }

    pub fn planner(&mut self) -> &mut Planner {
        &mut self.planner
    }

    /// Square root in the session tower, extending it when needed.
    pub fn sqrt(&mut self, r: &Rat) -> Result<TReal> {
        self.ctx.sqrt_rat(r)
    }

    fn sqrt_t(&mut self, r: &TReal) -> Result<TReal> {
        self.ctx.sqrt(r)
    }

    /// Plan for `d2`, sizing the strategy's tables for it first.
    pub fn plan(&mut self, d2: &Rat) -> Result<Plan> {
        self.planner.prepare(d2)?;
        self.planner.plan(d2)
    }

    pub fn projected_size(&mut self, plan: &Plan) -> Result<BigUint> {
        self.planner.projected_size(plan)
    }

    /// Canonical witness for `d2`.
    pub fn compile(&mut self, d2: &Rat) -> Result<Arc<WitnessSet>> {
        let plan = self.plan(d2)?;
        self.compile_plan(&plan)
    }

    /// Canonical witness for a plan, memoised.
    pub fn compile_plan(&mut self, plan: &Plan) -> Result<Arc<WitnessSet>> {
        if let Some(w) = self.nodes.get(plan) {
            return Ok(w.clone());
        }
        plan.validate()?;
        let points = self.canonical_points(plan)?;
        let mut children: Vec<Arc<WitnessSet>> = Vec::new();
        let mut child_index: HashMap<Plan, usize> = HashMap::new();
        let mut edges = Vec::new();
        for ge in gadget_edges(plan) {
            let provenance = if ge.sqdist.is_one() {
                Provenance::Unit
            } else {
                let cp = match ge.fixed {
                    Some(p) => p,
                    None => self.planner.plan(&ge.sqdist)?,
                };
                let idx = match child_index.get(&cp) {
                    Some(&i) => i,
                    None => {
                        let child = self.compile_plan(&cp)?;
                        children.push(child);
                        child_index.insert(cp, children.len() - 1);
                        children.len() - 1
                    }
                };
                Provenance::Child(idx)
            };
            edges.push(Edge {
                i: ge.i,
                j: ge.j,
                sqdist: ge.sqdist,
                provenance,
            });
        }
        let labels = gadget_labels(plan);
        let w = WitnessSet {
            target: (0, 1, plan.target()),
            points: labels.iter().map(|l| l.to_string()).zip(points).collect(),
            edges,
            children,
            plan: plan.clone(),
        };
        w.verify_node()?;
        let w = Arc::new(w);
        self.nodes.insert(plan.clone(), w.clone());
        Ok(w)
    }

    /// Exact coordinates of a gadget in canonical pose.
    fn canonical_points(&mut self, plan: &Plan) -> Result<Vec<PointN>> {
        let target = plan.target();
        let s = self.sqrt(&target)?;
        let origin = PointN::origin(2);
        let y = PointN::xy(s.clone(), TReal::zero());
        // point from frame coordinates relative to (origin, y)
        let fp = |a: TReal, b: TReal| PointN::xy(&a * &s, &b * &s);
        let r = |n, d| TReal::from(rat(n, d));
        Ok(match plan {
            Plan::Unit => vec![origin, y],
            Plan::Sqrt3 { .. } => {
                let s3 = self.sqrt(&int(3))?;
                let s11 = self.sqrt(&int(11))?;
                let h = s3.scale(&rat(1, 6));
                // y~ with |x y~| = |x y| and |y y~|^2 = |x y|^2 / 3, below the axis
                let yt = (r(5, 6), -s11.scale(&rat(1, 6)));
                let perp = (-&yt.1, yt.0.clone());
                let half = (yt.0.scale(&rat(1, 2)), yt.1.scale(&rat(1, 2)));
                vec![
                    origin,
                    y,
                    fp(yt.0.clone(), yt.1.clone()),
                    fp(r(1, 2), h.clone()),
                    fp(r(1, 2), -&h),
                    fp(&half.0 + &h * &perp.0, &half.1 + &h * &perp.1),
                    fp(&half.0 - &h * &perp.0, &half.1 - &h * &perp.1),
                ]
            }
            Plan::Double { .. } => {
                let h = self.sqrt(&int(3))?.scale(&rat(1, 4));
                vec![
                    origin,
                    y,
                    fp(r(1, 2), TReal::zero()),
                    fp(r(1, 4), h.clone()),
                    fp(r(3, 4), h),
                ]
            }
            Plan::PythDiff { b2, .. } => {
                let b = self.sqrt(b2)?;
                vec![
                    origin,
                    y,
                    PointN::xy(TReal::zero(), b.clone()),
                    PointN::xy(TReal::zero(), -b),
                ]
            }
            Plan::DivideK { k, e, .. } => {
                // z above the midpoint with |z x| = |z y| = e
                let e2 = TReal::from(Rat::from_integer(e * e));
                let h = self.sqrt_t(&(e2 - TReal::from(target.clone() / int(4))))?;
                let z = PointN::xy(s.scale(&rat(1, 2)), h);
                let kk = TReal::from(Rat::from_integer(k.clone()));
                let one_minus_k = TReal::from(Rat::from_integer(BigInt::one() - k));
                let xt = z.scale(&one_minus_k);
                let yt = xt.add(&y.scale(&kk))?;
                vec![origin, y, z, xt, yt]
            }
        })
    }

    /// A child-free two-point witness on `(x, y)`.
    pub fn base_unit(&mut self, x: &PointN, y: &PointN) -> Result<WitnessSet> {
        self.anchored(&Plan::Unit, x, y)
    }

    pub fn scale_sqrt3(&mut self, d2: &Rat, x: &PointN, y: &PointN) -> Result<WitnessSet> {
        self.anchored(&Plan::Sqrt3 { delta: d2.clone() }, x, y)
    }

    pub fn scale_double(&mut self, d2: &Rat, x: &PointN, y: &PointN) -> Result<WitnessSet> {
        self.anchored(&Plan::Double { delta: d2.clone() }, x, y)
    }

    pub fn pyth_diff(&mut self, a2: &Rat, b2: &Rat, x: &PointN, y: &PointN) -> Result<WitnessSet> {
        self.anchored(
            &Plan::PythDiff {
                a2: a2.clone(),
                b2: b2.clone(),
            },
            x,
            y,
        )
    }

    pub fn sqrt_nat(&mut self, n: &BigInt, x: &PointN, y: &PointN) -> Result<WitnessSet> {
        let d2 = Rat::from_integer(n.clone());
        self.planner.prepare(&d2)?;
        let plan = self.planner.plan_nat(n)?;
        self.anchored(&plan, x, y)
    }

    /// Witness for `d2 / k^2` with the minimal integer `e`, `e^2 >= d2`.
    pub fn divide_k(&mut self, d2: &Rat, k: &BigInt, x: &PointN, y: &PointN) -> Result<WitnessSet> {
        if *k < BigInt::from(2) {
            return Err(Error::domain(format!("divide_k needs k >= 2, got {k}")));
        }
        let e = crate::number::ceil_sqrt(d2);
        self.anchored(
            &Plan::DivideK {
                d2: d2.clone(),
                k: k.clone(),
                e,
            },
            x,
            y,
        )
    }

    pub fn rational_sqrt(&mut self, p: &BigInt, q: &BigInt, x: &PointN, y: &PointN) -> Result<WitnessSet> {
        if p <= &BigInt::from(0) || q <= &BigInt::from(0) {
            return Err(Error::domain(format!("p and q must be positive, got {p}/{q}")));
        }
        let d2 = Rat::new(p.clone(), q.clone());
        let plan = self.plan(&d2)?;
        self.anchored(&plan, x, y)
    }

    fn anchored(&mut self, plan: &Plan, x: &PointN, y: &PointN) -> Result<WitnessSet> {
        let got = phi(x, y)?;
        let want = TReal::from(plan.target());
        if got != want {
            return Err(Error::AnchorMismatch {
                expected: want.to_string(),
                actual: got.to_string(),
            });
        }
        let w = self.compile_plan(plan)?;
        w.instantiate(x, y)
    }

    /// Refuses before building coordinates when the projected size is over
    /// `limit`, then flattens.
    pub fn flatten(&mut self, w: &WitnessSet, limit: usize) -> Result<FlatWitness> {
        let projected = self.projected_size(&w.plan)?;
        if projected.to_usize().is_none_or(|p| p > limit) {
            return Err(Error::SizeLimit { projected, limit });
        }
        flatten::flatten(self, w, limit)
    }
}
