//! Cayley-Menger matrices and the predicates built on them.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::number::{int, Rat, TReal};
use crate::poly::{det_symbolic, MPoly};
use crate::ring::{det_gauss, det_laplace, Field, Ring};

/// A point with exact coordinates.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointN {
    pub coords: Vec<TReal>,
}

impl PointN {
    pub fn new(coords: Vec<TReal>) -> Self {
        PointN { coords }
    }

    pub fn xy(x: TReal, y: TReal) -> Self {
        PointN { coords: vec![x, y] }
    }

    pub fn rat2(x: Rat, y: Rat) -> Self {
        PointN::xy(TReal::from(x), TReal::from(y))
    }

    pub fn origin(n: usize) -> Self {
        PointN {
            coords: vec![TReal::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn x(&self) -> &TReal {
        &self.coords[0]
    }

    pub fn y(&self) -> &TReal {
        &self.coords[1]
    }

    fn check_dim(&self, other: &PointN) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &PointN) -> Result<PointN> {
        self.check_dim(other)?;
        Ok(PointN::new(
            self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn add(&self, other: &PointN) -> Result<PointN> {
        self.check_dim(other)?;
        Ok(PointN::new(
            self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn scale(&self, k: &TReal) -> PointN {
        PointN::new(self.coords.iter().map(|c| c * k).collect())
    }

    pub fn dot(&self, other: &PointN) -> Result<TReal> {
        self.check_dim(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .fold(TReal::zero(), |acc, (a, b)| acc + a * b))
    }

    /// Quarter turn counter-clockwise of a planar vector.
    pub fn perp(&self) -> PointN {
        PointN::xy(-self.y(), self.x().clone())
    }
}

impl fmt::Debug for PointN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.coords).finish()
    }
}

/// Exact squared distance.
pub fn phi(x: &PointN, y: &PointN) -> Result<TReal> {
    let d = x.sub(y)?;
    d.dot(&d)
}

/// Symmetric matrix of squared distances with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SqDistMatrix<R> {
    entries: Vec<Vec<R>>,
}

impl<R: Ring> SqDistMatrix<R> {
    pub fn new(entries: Vec<Vec<R>>) -> Result<Self> {
        let k = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    actual: row.len(),
                });
            }
            if !row[i].is_zero() {
                return Err(Error::domain(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..i {
                if row[j] != entries[j][i] {
                    return Err(Error::domain(format!("asymmetric entries at ({i}, {j})")));
                }
            }
        }
        Ok(SqDistMatrix { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<R>] {
        &self.entries
    }

    /// Principal submatrix on the given indices.
    pub fn select(&self, idx: &[usize]) -> SqDistMatrix<R> {
        SqDistMatrix {
            entries: idx
                .iter()
                .map(|&i| idx.iter().map(|&j| self.entries[i][j].clone()).collect())
                .collect(),
        }
    }
}

impl SqDistMatrix<TReal> {
    pub fn from_points(points: &[PointN]) -> Result<Self> {
        let mut entries = vec![vec![TReal::zero(); points.len()]; points.len()];
        for i in 0..points.len() {
            for j in 0..i {
                let d = phi(&points[i], &points[j])?;
                entries[i][j] = d.clone();
                entries[j][i] = d;
            }
        }
        Ok(SqDistMatrix { entries })
    }
}

/// Prepends the row and column `0, 1, ..., 1`.
pub fn bordered<R: Ring>(body: &[Vec<R>]) -> Vec<Vec<R>> {
    let k = body.len();
    let mut out = Vec::with_capacity(k + 1);
    let mut first = vec![R::one(); k + 1];
    first[0] = R::zero();
    out.push(first);
    for row in body {
        let mut r = Vec::with_capacity(k + 1);
        r.push(R::one());
        r.extend(row.iter().cloned());
        out.push(r);
    }
    out
}

/// Determinant of the bordered matrix, by division-free expansion.
pub fn cm_det<R: Ring>(m: &SqDistMatrix<R>) -> R {
    det_laplace(&bordered(&m.entries)).expect("bordered matrix is square")
}

/// Same value as [`cm_det`], by elimination; preferable for field scalars.
pub fn cm_det_field<F: Field>(m: &SqDistMatrix<F>) -> F {
    det_gauss(&bordered(&m.entries)).expect("bordered matrix is square")
}

/// [`cm_det`] for rational squared distances, by fraction-free elimination
/// on the matrix with denominators cleared.
pub fn cm_det_rat(body: &[Vec<Rat>]) -> Rat {
    let n = body.len();
    let lcm = body
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<Vec<BigInt>> = body
        .iter()
        .map(|row| row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect())
        .collect();
    let m = bordered_int(&scaled);
    let small: Option<Vec<Vec<i128>>> = m
        .iter()
        .map(|row| row.iter().map(|x| x.to_i128()).collect())
        .collect();
    let det = small
        .and_then(|m| bareiss_i128(m))
        .map(BigInt::from)
        .unwrap_or_else(|| bareiss_big(m));
    // every body entry was scaled by lcm; the border absorbs one factor
    let scale = num_traits::pow(lcm, n.saturating_sub(1));
    Rat::new(det, scale)
}

fn bordered_int(body: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let k = body.len();
    let mut out = Vec::with_capacity(k + 1);
    let mut first = vec![BigInt::one(); k + 1];
    first[0] = BigInt::zero();
    out.push(first);
    for row in body {
        let mut r = Vec::with_capacity(k + 1);
        r.push(BigInt::one());
        r.extend(row.iter().cloned());
        out.push(r);
    }
    out
}

/// `None` on overflow.
fn bareiss_i128(mut m: Vec<Vec<i128>>) -> Option<i128> {
    let n = m.len();
    let (mut sign, mut prev) = (1i128, 1i128);
    for k in 0..n.saturating_sub(1) {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return Some(0);
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let a = m[i][j].checked_mul(m[k][k])?;
                let b = m[i][k].checked_mul(m[k][j])?;
                m[i][j] = a.checked_sub(b)? / prev;
            }
        }
        prev = m[k][k];
    }
    if n == 0 {
        return Some(1);
    }
    Some(sign * m[n - 1][n - 1])
}

fn bareiss_big(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let (mut sign, mut prev) = (BigInt::one(), BigInt::one());
    for k in 0..n.saturating_sub(1) {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &m[n - 1][n - 1]
}

fn common_dim(points: &[PointN]) -> Result<usize> {
    let n = points.first().map_or(0, PointN::dim);
    for p in points {
        if p.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: p.dim(),
            });
        }
    }
    Ok(n)
}

/// Whether `n + 1` points in dimension `n` are affinely dependent.
pub fn affinely_dependent(points: &[PointN]) -> Result<bool> {
    let n = common_dim(points)?;
    if points.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            actual: points.len(),
        });
    }
    Ok(cm_det_field(&SqDistMatrix::from_points(points)?).is_zero())
}

/// Squared coordinate determinant against `(-1)^(n+1) / 2^n` times the
/// Cayley-Menger determinant, for `n + 1` points in dimension `n`.
pub fn volume_identity_check(points: &[PointN]) -> Result<bool> {
    let n = common_dim(points)?;
    if points.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            actual: points.len(),
        });
    }
    let coord: Vec<Vec<TReal>> = points
        .iter()
        .map(|p| {
            let mut row = p.coords.clone();
            row.push(TReal::one());
            row
        })
        .collect();
    let vol = det_gauss(&coord)?;
    let delta = cm_det_field(&SqDistMatrix::from_points(points)?);
    let sign = if n % 2 == 1 { 1 } else { -1 };
    let factor = Rat::new(sign.into(), num_bigint::BigInt::from(1) << n);
    Ok(vol.square() == delta.scale(&factor))
}

fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            if k - i < size - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, size, &mut Vec::new(), &mut out);
    out
}

/// Whether every `(n + 2)`-subset of the points, and the whole set, has a
/// vanishing Cayley-Menger determinant.
pub fn embedding_rank_check_matrix<F: Field>(m: &SqDistMatrix<F>, n: usize) -> bool {
    if m.len() < n + 2 {
        return false;
    }
    subsets(m.len(), n + 2)
        .iter()
        .all(|s| cm_det_field(&m.select(s)).is_zero())
        && cm_det_field(m).is_zero()
}

pub fn embedding_rank_check(points: &[PointN]) -> Result<bool> {
    let n = common_dim(points)?;
    if points.len() < n + 2 {
        return Err(Error::DimensionMismatch {
            expected: n + 2,
            actual: points.len(),
        });
    }
    Ok(embedding_rank_check_matrix(&SqDistMatrix::from_points(points)?, n))
}

/// Symbolic Cayley-Menger determinant of `n + 1` points at mutual squared
/// distance `d^2`, compared with `(-1)^(n+1) (n+1) d^(2n)`.
pub fn regular_simplex_identity(n: usize) -> Result<bool> {
    if !(1..=6).contains(&n) {
        return Err(Error::domain(format!("regular simplex identity supports n = 1..6, got {n}")));
    }
    let d2 = MPoly::var("d").pow(2);
    let body: Vec<Vec<MPoly>> = (0..=n)
        .map(|i| (0..=n).map(|j| if i == j { MPoly::zero() } else { d2.clone() }).collect())
        .collect();
    let det = det_symbolic(&bordered(&body))?;
    let sign = if n % 2 == 1 { 1 } else { -1 };
    let expected = MPoly::var("d").pow(2 * n as u32).scale(&int(sign * (n as i64 + 1)));
    Ok(det == expected)
}

/// Given `phi(z, x) = a^2`, `phi(x, w) = b^2`, `phi(z, w) = (a + b)^2`, checks
/// `x - z = a / (a + b) * (w - z)` exactly.
pub fn collinear_ratio_check(z: &PointN, x: &PointN, w: &PointN, a: &TReal, b: &TReal) -> Result<bool> {
    let ab = a + b;
    if ab.is_zero() {
        return Err(Error::domain("a + b must be nonzero"));
    }
    let checks = [
        (phi(z, x)?, a.square(), "phi(z, x) != a^2"),
        (phi(x, w)?, b.square(), "phi(x, w) != b^2"),
        (phi(z, w)?, ab.square(), "phi(z, w) != (a + b)^2"),
    ];
    for (got, want, msg) in checks {
        if got != want {
            return Err(Error::domain(format!("{msg}: got {got}, expected {want}")));
        }
    }
    let ratio = a.try_div(&ab)?;
    Ok(x.sub(z)? == w.sub(z)?.scale(&ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{rat, TowerCtx};

    fn p(x: i64, y: i64) -> PointN {
        PointN::rat2(int(x), int(y))
    }

    fn rm(rows: &[&[i64]]) -> SqDistMatrix<Rat> {
        SqDistMatrix::new(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn phi_examples() {
        let mut ctx = TowerCtx::new();
        let s3 = ctx.sqrt_rat(&int(3)).unwrap();
        let s2 = ctx.sqrt_rat(&int(2)).unwrap();
        assert_eq!(phi(&p(0, 0), &p(1, 0)).unwrap(), TReal::one());
        let q = PointN::xy(TReal::from(rat(3, 2)), s3.scale(&rat(1, 2)));
        assert_eq!(phi(&PointN::origin(2), &q).unwrap(), TReal::from(3));
        let r = PointN::xy(TReal::one() + &s2, TReal::zero());
        assert_eq!(phi(&PointN::origin(2), &r).unwrap(), TReal::from(3) + s2.scale(&int(2)));
        assert!(phi(&PointN::origin(2), &PointN::origin(3)).is_err());
    }

    #[test]
    fn cm_det_examples() {
        assert_eq!(cm_det(&rm(&[&[0, 1, 4], &[1, 0, 1], &[4, 1, 0]])), int(0));
        assert_eq!(cm_det(&rm(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]])), int(-3));
        // doubling gadget at d = 1 with t = 4
        let m = rm(&[
            &[0, 1, 1, 3, 4],
            &[1, 0, 1, 1, 1],
            &[1, 1, 0, 1, 3],
            &[3, 1, 1, 0, 1],
            &[4, 1, 3, 1, 0],
        ]);
        assert_eq!(cm_det(&m), int(0));
        assert_eq!(cm_det_field(&m), int(0));
    }

    #[test]
    fn matrix_validation() {
        assert!(SqDistMatrix::new(vec![vec![int(0), int(1)], vec![int(2), int(0)]]).is_err());
        assert!(SqDistMatrix::new(vec![vec![int(1)]]).is_err());
    }

    #[test]
    fn dependence() {
        assert!(affinely_dependent(&[p(0, 0), p(1, 0), p(2, 0)]).unwrap());
        assert!(!affinely_dependent(&[p(0, 0), p(1, 0), p(0, 1)]).unwrap());
        assert!(affinely_dependent(&[p(0, 0), p(1, 0)]).is_err());
    }

    #[test]
    fn volume_identity_examples() {
        assert!(volume_identity_check(&[p(0, 0), p(1, 0), p(0, 1)]).unwrap());
        assert!(volume_identity_check(&[p(0, 0), p(1, 1), p(2, 2)]).unwrap());
    }

    #[test]
    fn rank_check_detects_perturbation() {
        let pts = [p(0, 0), p(3, 0), p(1, 2), p(-1, 5)];
        assert!(embedding_rank_check(&pts).unwrap());
        let m = SqDistMatrix::from_points(&pts).unwrap();
        let mut e = m.entries().to_vec();
        e[0][1] = &e[0][1] + &TReal::one();
        e[1][0] = e[0][1].clone();
        assert!(!embedding_rank_check_matrix(&SqDistMatrix::new(e).unwrap(), 2));
    }

    #[test]
    fn regular_simplices() {
        for n in 2..=6 {
            assert!(regular_simplex_identity(n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn collinear_ratio_examples() {
        let one = TReal::one();
        let two = TReal::from(2);
        assert!(collinear_ratio_check(&p(0, 0), &p(1, 0), &p(3, 0), &one, &two).unwrap());
        let mut ctx = TowerCtx::new();
        let s3 = ctx.sqrt_rat(&int(3)).unwrap();
        let x = PointN::xy(s3.clone(), TReal::zero());
        let w = PointN::xy(s3.scale(&int(2)), TReal::zero());
        assert!(collinear_ratio_check(&p(0, 0), &x, &w, &s3, &s3).unwrap());
        assert!(collinear_ratio_check(&p(0, 0), &p(-1, 0), &p(3, 0), &one, &two).is_err());
    }

    proptest::proptest! {
        #[test]
        fn integer_elimination_matches_field(
            n in 1usize..6,
            raw in proptest::collection::vec((-40i64..40, 1i64..7), 15),
            big in proptest::bool::ANY,
        ) {
            let mut body = vec![vec![int(0); n]; n];
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = raw[k];
                    let mut v = crate::number::rat(a, b);
                    if big {
                        v *= Rat::from_integer(BigInt::from(10u32).pow(30));
                    }
                    body[i][j] = v.clone();
                    body[j][i] = v;
                    k += 1;
                }
            }
            let m = SqDistMatrix::new(body.clone()).unwrap();
            proptest::prop_assert_eq!(cm_det_rat(&body), cm_det_field(&m));
        }
    }
}
