use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::{Compiler, Frame, Provenance, WitnessSet};
use crate::cayley_menger::{phi, PointN};
use crate::error::{Error, Result};
use crate::number::{rat_to_string, MultiQuad, Rat, TReal};
use crate::propagation::UnitGraph;

/// A derived edge of the flattened set and the child witness forcing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub i: usize,
    pub j: usize,
    pub sqdist: Rat,
    /// Key of the node that owns the edge.
    pub node: String,
    /// Key of the child witness that forces it.
    pub via: String,
}

/// The union of a witness and all its instantiated children, keeping only
/// unit edges. Points 0 and 1 are the target pair.
#[derive(Clone, Debug)]
pub struct FlatWitness {
    pub points: Vec<PointN>,
    pub unit_edges: Vec<(usize, usize)>,
    pub ledger: Vec<LedgerEntry>,
    pub target: (usize, usize, Rat),
}

impl FlatWitness {
    /// Every unit edge has exact squared length 1 and the target pair has
    /// the target squared distance.
    pub fn verify(&self) -> Result<()> {
        if self.quick_check() == Some(true) {
            return Ok(());
        }
        let one = TReal::one();
        for &(i, j) in &self.unit_edges {
            let got = phi(&self.points[i], &self.points[j])?;
            if got != one {
                return Err(Error::validation(
                    format!("flat edge {i}-{j}"),
                    format!("squared length {got} is not 1"),
                ));
            }
        }
        let (x, y, d2) = &self.target;
        let got = phi(&self.points[*x], &self.points[*y])?;
        if got != TReal::from(d2.clone()) {
            return Err(Error::validation(
                "flat target",
                format!("squared distance {got} differs from {}", rat_to_string(d2)),
            ));
        }
        Ok(())
    }

    /// The same check in integer multi-quadratic arithmetic, when every level
    /// has an integer radicand. `Some(false)` leaves the report to the slow path.
    fn quick_check(&self) -> Option<bool> {
        let mq = MultiQuad::spanning(self.points.iter().flat_map(|p| &p.coords))?;
        let pts = self
            .points
            .iter()
            .map(|p| p.coords.iter().map(|x| mq.embed(x)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        let one = mq.rational(&Rat::from_integer(1.into()));
        let units = self.unit_edges.iter().all(|&(i, j)| mq.phi(&pts[i], &pts[j]) == one);
        let (x, y, d2) = &self.target;
        Some(units && mq.phi(&pts[*x], &pts[*y]) == mq.rational(d2))
    }

    /// The unit-distance graph alone, without coordinates.
    pub fn unit_graph(&self) -> UnitGraph {
        UnitGraph::new(self.points.len(), self.unit_edges.iter().copied())
    }
}

/// A flattened canonical node in frame coordinates relative to its own
/// target pair, ready to be carried onto any edge of the right length.
pub(crate) struct FrameFlat {
    coords: Vec<(TReal, TReal)>,
    unit_edges: Vec<(usize, usize)>,
    ledger: Vec<LedgerEntry>,
}

struct Assembly {
    points: Vec<PointN>,
    index: HashMap<PointN, usize>,
    unit_edges: BTreeSet<(usize, usize)>,
    ledger: Vec<LedgerEntry>,
    limit: usize,
}

impl Assembly {
    fn insert(&mut self, p: PointN) -> Result<usize> {
        if let Some(&i) = self.index.get(&p) {
            return Ok(i);
        }
        if self.points.len() >= self.limit {
            return Err(Error::SizeLimit {
                projected: (self.points.len() + 1).into(),
                limit: self.limit,
            });
        }
        let i = self.points.len();
        self.index.insert(p.clone(), i);
        self.points.push(p);
        Ok(i)
    }

    fn edge(&mut self, i: usize, j: usize) {
        if i != j {
            self.unit_edges.insert((i.min(j), i.max(j)));
        }
    }
}

fn assemble(c: &mut Compiler, w: &WitnessSet, limit: usize) -> Result<Assembly> {
    let mut a = Assembly {
        points: Vec::new(),
        index: HashMap::new(),
        unit_edges: BTreeSet::new(),
        ledger: Vec::new(),
        limit,
    };
    let own: Vec<usize> = w
        .points
        .iter()
        .map(|(_, p)| a.insert(p.clone()))
        .collect::<Result<_>>()?;
    for e in &w.edges {
        let (i, j) = (own[e.i], own[e.j]);
        match e.provenance {
            Provenance::Unit => a.edge(i, j),
            Provenance::Child(ci) => {
                let child = &w.children[ci];
                let flat = frame_flat(c, &child.plan)?;
                let frame = Frame::new(&a.points[i], &a.points[j])?;
                let map: Vec<usize> = flat
                    .coords
                    .iter()
                    .map(|ab| frame.map(ab).and_then(|p| a.insert(p)))
                    .collect::<Result<_>>()?;
                for &(u, v) in &flat.unit_edges {
                    a.edge(map[u], map[v]);
                }
                for l in &flat.ledger {
                    a.ledger.push(LedgerEntry {
                        i: map[l.i],
                        j: map[l.j],
                        ..l.clone()
                    });
                }
                a.ledger.push(LedgerEntry {
                    i,
                    j,
                    sqdist: e.sqdist.clone(),
                    node: w.key(),
                    via: child.key(),
                });
            }
        }
    }
    Ok(a)
}

fn frame_flat(c: &mut Compiler, plan: &super::Plan) -> Result<Arc<FrameFlat>> {
    if let Some(f) = c.flats.get(plan) {
        return Ok(f.clone());
    }
    let w = c.compile_plan(plan)?;
    let a = assemble(c, &w, usize::MAX)?;
    let frame = Frame::new(&a.points[0], &a.points[1])?;
    let coords = a
        .points
        .iter()
        .map(|p| frame.coords(p))
        .collect::<Result<Vec<_>>>()?;
    let f = Arc::new(FrameFlat {
        coords,
        unit_edges: a.unit_edges.into_iter().collect(),
        ledger: a.ledger,
    });
    c.flats.insert(plan.clone(), f.clone());
    Ok(f)
}

pub(crate) fn flatten(c: &mut Compiler, w: &WitnessSet, limit: usize) -> Result<FlatWitness> {
    let a = assemble(c, w, limit)?;
    let (x, y, d2) = &w.target;
    let target = (a.index[&w.points[*x].1], a.index[&w.points[*y].1], d2.clone());
    Ok(FlatWitness {
        points: a.points,
        unit_edges: a.unit_edges.into_iter().collect(),
        ledger: a.ledger,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::Strategy;
    use crate::number::{int, rat};
    use num_bigint::BigUint;

    fn flat(strategy: Strategy, d2: Rat) -> FlatWitness {
        let mut c = Compiler::new(strategy);
        let w = c.compile(&d2).unwrap();
        let f = c.flatten(&w, 100_000).unwrap();
        f.verify().unwrap();
        f
    }

    #[test]
    fn unit_flattens_to_itself() {
        let f = flat(Strategy::Default, int(1));
        assert_eq!((f.points.len(), f.unit_edges.len()), (2, 1));
        assert!(f.ledger.is_empty());
    }

    #[test]
    fn sqrt3_flat_counts() {
        let f = flat(Strategy::Sqrt3Peephole, int(3));
        assert_eq!((f.points.len(), f.unit_edges.len()), (7, 11));
    }

    #[test]
    fn double_flat_shares_points_with_children() {
        // both 3-edges reuse p1, p2 as their own apexes
        let f = flat(Strategy::Default, int(4));
        assert_eq!(f.points.len(), 11);
        assert_eq!(f.target.2, int(4));
        assert!(f.ledger.iter().all(|l| l.sqdist == int(3) && l.via == "sqrt3:1/1"));
        assert_eq!(f.ledger.len(), 2);
    }

    #[test]
    fn halving_flat() {
        let mut c = Compiler::new(Strategy::Default);
        let plan = crate::gadgets::Plan::DivideK {
            d2: int(1),
            k: 2.into(),
            e: 1.into(),
        };
        let w = c.compile_plan(&plan).unwrap();
        let f = c.flatten(&w, 1000).unwrap();
        f.verify().unwrap();
        assert_eq!(f.target.2, rat(1, 4));
        assert!(BigUint::from(f.points.len()) <= c.projected_size(&plan).unwrap());
        assert_eq!(f.points.len(), 21);
    }

    #[test]
    fn limit_is_enforced_up_front() {
        let mut c = Compiler::new(Strategy::Default);
        let w = c.compile(&int(2)).unwrap();
        match c.flatten(&w, 50) {
            Err(Error::SizeLimit { projected, limit }) => {
                assert_eq!(projected, 99u32.into());
                assert_eq!(limit, 50);
            }
            other => panic!("expected size error, got {other:?}"),
        }
    }

    #[test]
    fn flatten_of_instantiated_witness() {
        let mut c = Compiler::new(Strategy::Default);
        let w = c
            .scale_double(&int(1), &PointN::rat2(int(1), int(1)), &PointN::rat2(int(1), int(3)))
            .unwrap();
        let f = c.flatten(&w, 1000).unwrap();
        f.verify().unwrap();
        assert_eq!(f.points.len(), 11);
    }
}
