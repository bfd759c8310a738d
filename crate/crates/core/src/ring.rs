//! Minimal ring abstraction so determinants have one implementation for
//! rationals, tower reals and polynomials.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::number::{Rat, TReal};

pub trait Ring: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn from_i64(n: i64) -> Self {
        let mut acc = Self::zero();
        let one = Self::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc.add(&one);
        }
        if n < 0 {
            acc.neg()
        } else {
            acc
        }
    }
}

pub trait Field: Ring {
    fn inv(&self) -> Option<Self>;
}

impl Ring for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn from_i64(n: i64) -> Self {
        crate::number::int(n)
    }
}

impl Field for Rat {
    fn inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

impl Ring for TReal {
    fn zero() -> Self {
        TReal::zero()
    }
    fn one() -> Self {
        TReal::one()
    }
    fn is_zero(&self) -> bool {
        TReal::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn from_i64(n: i64) -> Self {
        TReal::from(n)
    }
}

impl Field for TReal {
    fn inv(&self) -> Option<Self> {
        TReal::inv(self).ok()
    }
}

fn check_square<R>(m: &[Vec<R>]) -> Result<usize> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: row.len(),
            });
        }
    }
    Ok(n)
}

/// Division-free determinant by Laplace expansion, memoised over column
/// subsets (O(n 2^n) ring operations).
pub fn det_laplace<R: Ring>(m: &[Vec<R>]) -> Result<R> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(R::one());
    }
    if n > 20 {
        return Err(Error::domain(format!("matrix of size {n} too large for expansion")));
    }
    // minors[mask] = det(rows 0..|mask|, columns in mask)
    let mut minors: Vec<Option<R>> = vec![None; 1 << n];
    minors[0] = Some(R::one());
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = R::zero();
        let mut pos = 0;
        for c in 0..n {
            if mask & (1 << c) == 0 {
                continue;
            }
            let entry = &m[row][c];
            if !entry.is_zero() {
                let sub = minors[mask ^ (1 << c)].as_ref().expect("smaller minor computed");
                if !sub.is_zero() {
                    let term = entry.mul(sub);
                    acc = if (row + pos) % 2 == 0 {
                        acc.add(&term)
                    } else {
                        acc.sub(&term)
                    };
                }
            }
            pos += 1;
        }
        minors[mask] = Some(acc);
    }
    Ok(minors.pop().flatten().expect("full minor"))
}

/// Gaussian elimination over a field.
pub fn det_gauss<F: Field>(m: &[Vec<F>]) -> Result<F> {
    let n = check_square(m)?;
    let mut a: Vec<Vec<F>> = m.to_vec();
    let mut det = F::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Ok(F::zero());
        };
        if p != col {
            a.swap(p, col);
            det = det.neg();
        }
        let pivot = a[col][col].clone();
        det = det.mul(&pivot);
        let inv = pivot.inv().expect("nonzero pivot");
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].mul(&inv);
            for c in col..n {
                let v = a[r][c].sub(&f.mul(&a[col][c]));
                a[r][c] = v;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::int;
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(det_laplace(&mat(&[&[0, 1], &[1, 0]])).unwrap(), int(-1));
        assert_eq!(det_gauss(&mat(&[&[0, 1], &[1, 0]])).unwrap(), int(-1));
        let m = mat(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 1]]);
        assert_eq!(det_laplace(&m).unwrap(), int(0));
        assert_eq!(det_gauss(&m).unwrap(), int(0));
    }

    #[test]
    fn non_square_rejected() {
        let m = vec![vec![int(1), int(2)], vec![int(3)]];
        assert!(det_laplace(&m).is_err());
    }

    proptest! {
        #[test]
        fn laplace_matches_gauss(n in 1usize..7, entries in prop::collection::vec(-9i64..10, 36)) {
            let m: Vec<Vec<Rat>> = (0..n)
                .map(|i| (0..n).map(|j| int(entries[i * 6 + j])).collect())
                .collect();
            prop_assert_eq!(det_laplace(&m).unwrap(), det_gauss(&m).unwrap());
        }
    }
}
