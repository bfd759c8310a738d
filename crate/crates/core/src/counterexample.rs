//! Conjugation in a real quadratic field, applied coordinatewise: it keeps
//! every rational squared distance and moves the irrational ones.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::cayley_menger::{phi, PointN};
use crate::error::{Error, Result};
use crate::gadgets::FlatWitness;
use crate::number::{parse_rat_lenient, rat_to_string, squarefree_decompose, Rat, TReal, TowerCtx};

/// `a + b sqrt(m)`; the radicand lives on the point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadNum {
    pub a: Rat,
    pub b: Rat,
}

impl QuadNum {
    pub fn new(a: Rat, b: Rat) -> QuadNum {
        QuadNum { a, b }
    }

    pub fn rational(a: Rat) -> QuadNum {
        QuadNum { a, b: Rat::zero() }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> QuadNum {
        QuadNum::new(self.a.clone(), -&self.b)
    }

    fn add(&self, o: &QuadNum) -> QuadNum {
        QuadNum::new(&self.a + &o.a, &self.b + &o.b)
    }

    fn sub(&self, o: &QuadNum) -> QuadNum {
        QuadNum::new(&self.a - &o.a, &self.b - &o.b)
    }

    fn mul(&self, o: &QuadNum, m: &Rat) -> QuadNum {
        QuadNum::new(&self.a * &o.a + &self.b * &o.b * m, &self.a * &o.b + &self.b * &o.a)
    }

    /// The same number as a tower element over `sqrt(m)`.
    pub fn to_treal(&self, ctx: &mut TowerCtx, m: &BigInt) -> Result<TReal> {
        let g = ctx.sqrt_rat(&Rat::from_integer(m.clone()))?;
        Ok(TReal::from(self.a.clone()) + g.scale(&self.b))
    }

    pub fn display(&self, m: &BigInt) -> String {
        format!("{} + {}*sqrt({m})", rat_to_string(&self.a), rat_to_string(&self.b))
    }

    pub fn to_json(&self) -> Value {
        json!([rat_to_string(&self.a), rat_to_string(&self.b)])
    }
}

/// A point of `Q(sqrt(m))^2` with `m > 1` squarefree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadPoint {
    m: BigInt,
    pub x: QuadNum,
    pub y: QuadNum,
}

fn check_radicand(m: &BigInt) -> Result<()> {
    if m <= &BigInt::one() {
        return Err(Error::domain(format!("radicand must exceed 1, got {m}")));
    }
    match squarefree_decompose(&Rat::from_integer(m.clone())) {
        Some((_, k)) if &k == m => Ok(()),
        Some(_) => Err(Error::domain(format!("radicand {m} is not squarefree"))),
        None => Err(Error::domain(format!("cannot certify {m} squarefree"))),
    }
}

impl QuadPoint {
    pub fn new(m: BigInt, x: QuadNum, y: QuadNum) -> Result<QuadPoint> {
        check_radicand(&m)?;
        Ok(QuadPoint { m, x, y })
    }

    pub fn m(&self) -> &BigInt {
        &self.m
    }

    /// Reads a point whose coordinates lie in a single-level tower over
    /// `sqrt(m)`, or in Q.
    pub fn from_point(m: &BigInt, p: &PointN) -> Result<QuadPoint> {
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: p.dim(),
            });
        }
        let read = |t: &TReal| -> Result<QuadNum> {
            if let Some(r) = t.as_rat() {
                return Ok(QuadNum::rational(r.clone()));
            }
            let e = t.ext().expect("irrational values are extensions");
            let rad = e.level().radicand().as_rat().cloned();
            match (e.a().as_rat(), e.b().as_rat(), rad) {
                (Some(a), Some(b), Some(r)) if r == Rat::from_integer(m.clone()) => {
                    Ok(QuadNum::new(a.clone(), b.clone()))
                }
                _ => Err(Error::domain(format!("{t} is not in Q(sqrt({m}))"))),
            }
        };
        QuadPoint::new(m.clone(), read(p.x())?, read(p.y())?)
    }

    /// `phi(p, q)` in `Q(sqrt(m))`.
    pub fn phi(&self, other: &QuadPoint) -> Result<QuadNum> {
        if self.m != other.m {
            return Err(Error::domain(format!("radicands differ: {} and {}", self.m, other.m)));
        }
        let m = Rat::from_integer(self.m.clone());
        let dx = self.x.sub(&other.x);
        let dy = self.y.sub(&other.y);
        Ok(dx.mul(&dx, &m).add(&dy.mul(&dy, &m)))
    }
}

impl fmt::Display for QuadPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x.display(&self.m), self.y.display(&self.m))
    }
}

/// `sqrt(m) -> -sqrt(m)` on both coordinates.
pub fn conj_map(p: &QuadPoint) -> QuadPoint {
    QuadPoint {
        m: p.m.clone(),
        x: p.x.conj(),
        y: p.y.conj(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub before: QuadNum,
    pub after: QuadNum,
    pub preserved: bool,
}

#[derive(Clone, Debug)]
pub struct PreservationReport {
    pub m: BigInt,
    pub pairs: Vec<PairReport>,
}

impl PreservationReport {
    pub fn rational_pairs(&self) -> impl Iterator<Item = &PairReport> {
        self.pairs.iter().filter(|p| p.before.is_rational())
    }

    /// Every rational squared distance survived conjugation.
    pub fn rational_preserved(&self) -> bool {
        self.rational_pairs().all(|p| p.preserved)
    }

    /// Preserved exactly when the `sqrt(m)` component vanishes.
    pub fn matches_criterion(&self) -> bool {
        self.pairs.iter().all(|p| p.preserved == p.before.is_rational())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m.to_string(),
            "rational_preserved": self.rational_preserved(),
            "pairs": self.pairs.iter().map(|p| json!({
                "i": p.i,
                "j": p.j,
                "before": p.before.to_json(),
                "after": p.after.to_json(),
                "rational": p.before.is_rational(),
                "preserved": p.preserved,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Compares `phi` before and after conjugation over all pairs.
pub fn check_rational_preservation(points: &[QuadPoint]) -> Result<PreservationReport> {
    let m = points.first().map_or_else(|| BigInt::from(2), |p| p.m.clone());
    let images: Vec<QuadPoint> = points.iter().map(conj_map).collect();
    let mut pairs = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let before = points[i].phi(&points[j])?;
            let after = images[i].phi(&images[j])?;
            pairs.push(PairReport {
                i,
                j,
                preserved: before == after,
                before,
                after,
            });
        }
    }
    Ok(PreservationReport { m, pairs })
}

/// The squared distance before and after conjugation, when it moves.
pub fn find_violation(x: &QuadPoint, y: &QuadPoint) -> Result<Option<(QuadNum, QuadNum)>> {
    let before = x.phi(y)?;
    if before.is_rational() {
        return Ok(None);
    }
    let after = conj_map(x).phi(&conj_map(y))?;
    Ok(Some((before, after)))
}

/// Parses `[[xa, xb], [ya, yb]]` entries (each a rational string) into points.
pub fn parse_points(m: &BigInt, v: &Value) -> Result<Vec<QuadPoint>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::parse("points", "expected an array of points"))?;
    arr.iter()
        .enumerate()
        .map(|(i, p)| {
            let loc = format!("points[{i}]");
            let coords = p
                .as_array()
                .filter(|c| c.len() == 2)
                .ok_or_else(|| Error::parse(&loc, "expected [x, y]"))?;
            let num = |c: &Value, which: &str| -> Result<QuadNum> {
                let parts = c
                    .as_array()
                    .filter(|c| c.len() == 2)
                    .ok_or_else(|| Error::parse(format!("{loc}.{which}"), "expected [a, b] for a + b*sqrt(m)"))?;
                let get = |k: usize| -> Result<Rat> {
                    let s = parts[k]
                        .as_str()
                        .ok_or_else(|| Error::parse(format!("{loc}.{which}[{k}]"), "expected a rational string"))?;
                    parse_rat_lenient(s)
                };
                Ok(QuadNum::new(get(0)?, get(1)?))
            };
            QuadPoint::new(m.clone(), num(&coords[0], "x")?, num(&coords[1], "y")?)
        })
        .collect()
}

/// Applies the automorphism moving the generator of `level` to every
/// coordinate, then re-checks all unit edges and the target.
pub fn conjugate_flat(flat: &FlatWitness, level: usize) -> Result<FlatWitness> {
    let points = flat
        .points
        .iter()
        .map(|p| {
            let coords = p
                .coords
                .iter()
                .map(|c| c.conjugate_level(level))
                .collect::<Result<Vec<_>>>()?;
            Ok(PointN::new(coords))
        })
        .collect::<Result<Vec<_>>>()?;
    let out = FlatWitness {
        points,
        ..flat.clone()
    };
    out.verify()?;
    Ok(out)
}

/// Highest tower level used by any coordinate of the flat witness.
pub fn top_level(flat: &FlatWitness) -> usize {
    flat.points
        .iter()
        .flat_map(|p| p.coords.iter().map(TReal::level))
        .max()
        .unwrap_or(0)
}

/// Whether conjugation at `level` moved some pair at irrational squared distance.
pub fn moves_some_distance(flat: &FlatWitness, image: &FlatWitness) -> Result<bool> {
    let n = flat.points.len();
    for i in 0..n {
        for j in i + 1..n {
            if phi(&flat.points[i], &flat.points[j])? != phi(&image.points[i], &image.points[j])? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

pub fn is_positive_squarefree(m: &BigInt) -> bool {
    m.is_positive() && check_radicand(m).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{Compiler, Strategy};
    use crate::number::{int, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(a: i64, b: i64) -> QuadNum {
        QuadNum::new(int(a), int(b))
    }

    fn pt(x: QuadNum, y: QuadNum) -> QuadPoint {
        QuadPoint::new(BigInt::from(2), x, y).unwrap()
    }

    #[test]
    fn conj_examples() {
        let o = pt(q(0, 0), q(0, 0));
        assert_eq!(conj_map(&o), o);
        let p = pt(q(1, 1), q(0, 0));
        assert_eq!(conj_map(&p), pt(q(1, -1), q(0, 0)));
        assert_eq!(conj_map(&conj_map(&p)), p);
    }

    #[test]
    fn radicand_must_be_squarefree() {
        assert!(QuadPoint::new(BigInt::from(4), q(0, 0), q(0, 0)).is_err());
        assert!(QuadPoint::new(BigInt::from(1), q(0, 0), q(0, 0)).is_err());
        assert!(QuadPoint::new(BigInt::from(6), q(0, 0), q(0, 0)).is_ok());
    }

    #[test]
    fn violation_examples() {
        let o = pt(q(0, 0), q(0, 0));
        let (before, after) = find_violation(&o, &pt(q(1, 1), q(0, 0))).unwrap().unwrap();
        assert_eq!(before, q(3, 2));
        assert_eq!(after, q(3, -2));
        assert!(find_violation(&o, &pt(q(0, 1), q(0, 0))).unwrap().is_none());
        assert!(find_violation(&o, &pt(q(0, 1), q(0, 1))).unwrap().is_none());
        let report = check_rational_preservation(&[o.clone(), pt(q(0, 1), q(0, 0)), pt(q(1, 0), q(0, 0))]).unwrap();
        assert!(report.rational_preserved());
        assert_eq!(report.pairs[0].before, QuadNum::rational(int(2)));
    }

    #[test]
    fn treal_agrees() {
        let mut ctx = TowerCtx::new();
        let m = BigInt::from(2);
        let t = q(3, 2).to_treal(&mut ctx, &m).unwrap();
        let s2 = ctx.sqrt_rat(&int(2)).unwrap();
        let one_plus = TReal::one() + s2;
        assert_eq!(t, one_plus.square());
    }

    #[test]
    fn random_points_follow_the_criterion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut r = || QuadNum::new(rat(rng.gen_range(-6..=6), rng.gen_range(1..=3)), rat(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
        let pts: Vec<QuadPoint> = (0..20).map(|_| pt(r(), r())).collect();
        let rep = check_rational_preservation(&pts).unwrap();
        assert!(rep.rational_preserved());
        assert!(rep.matches_criterion());
        assert!(rep.pairs.iter().all(|p| p.after == p.before.conj()));
    }

    #[test]
    fn conjugated_flat_witness_stays_valid() {
        let mut c = Compiler::new(Strategy::Sqrt3Peephole);
        let w = c.compile(&int(3)).unwrap();
        let f = c.flatten(&w, 1000).unwrap();
        let top = top_level(&f);
        assert!(top >= 1);
        let g = conjugate_flat(&f, top).unwrap();
        assert_eq!(g.unit_edges, f.unit_edges);
        assert!(moves_some_distance(&f, &g).unwrap());
    }

    #[test]
    fn single_field_points_read_back() {
        let mut ctx = TowerCtx::new();
        let s2 = ctx.sqrt_rat(&int(2)).unwrap();
        let p = PointN::xy(TReal::one() + s2, TReal::from(3));
        let qp = QuadPoint::from_point(&BigInt::from(2), &p).unwrap();
        assert_eq!(qp.x, q(1, 1));
        assert!(QuadPoint::from_point(&BigInt::from(3), &p).is_err());
    }

    #[test]
    fn points_parse() {
        let v: Value = serde_json::from_str(r#"[[["0","0"],["0","0"]],[["1","1"],["0","0"]]]"#).unwrap();
        let pts = parse_points(&BigInt::from(2), &v).unwrap();
        assert_eq!(pts[1].x, q(1, 1));
        let bad: Value = serde_json::from_str(r#"[[["0"],["0","0"]]]"#).unwrap();
        assert!(matches!(parse_points(&BigInt::from(2), &bad), Err(Error::Parse { .. })));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::number::rat;
    use proptest::prelude::*;

    fn quad() -> impl Strategy<Value = QuadNum> {
        (-20i64..20, 1i64..6, -20i64..20, 1i64..6).prop_map(|(a, da, b, db)| QuadNum::new(rat(a, da), rat(b, db)))
    }

    proptest! {
        #[test]
        fn conjugation_commutes_with_phi(m in prop::sample::select(vec![2i64, 3, 5, 6, 7, 10]),
                                         xs in proptest::collection::vec(quad(), 4)) {
            let m = BigInt::from(m);
            let p = QuadPoint::new(m.clone(), xs[0].clone(), xs[1].clone()).unwrap();
            let q = QuadPoint::new(m, xs[2].clone(), xs[3].clone()).unwrap();
            let d = p.phi(&q).unwrap();
            prop_assert_eq!(conj_map(&p).phi(&conj_map(&q)).unwrap(), d.conj());
            prop_assert_eq!(conj_map(&conj_map(&p)), p.clone());
            prop_assert_eq!(find_violation(&p, &q).unwrap().is_none(), d.is_rational());
        }
    }
}
