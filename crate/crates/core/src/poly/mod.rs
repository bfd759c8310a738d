//! Sparse multivariate polynomials over Q with named variables, and
//! fraction-free symbolic determinants.

mod corpus;
mod parse;

pub use corpus::{identity_corpus, run_corpus, volume_identity_symbolic, Identity, IdentityReport};
pub use parse::parse_poly;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::number::Rat;
use crate::ring;

/// Sorted `(variable, exponent)` pairs with positive exponents.
pub type Monomial = Vec<(String, u32)>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MPoly {
    terms: BTreeMap<Monomial, Rat>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (v, e) in b {
        *out.entry(v.clone()).or_insert(0) += e;
    }
    out.into_iter().collect()
}

impl MPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        MPoly { terms }
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(name.to_string(), 1)], Rat::one());
        MPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn variables(&self) -> Vec<String> {
        let mut vs: Vec<String> = self
            .terms
            .keys()
            .flat_map(|m| m.iter().map(|(v, _)| v.clone()))
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn degree_in(&self, var: &str) -> u32 {
        self.terms
            .keys()
            .filter_map(|m| m.iter().find(|(v, _)| v == var).map(|(_, e)| *e))
            .max()
            .unwrap_or(0)
    }

    fn insert(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn scale(&self, k: &Rat) -> MPoly {
        if k.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut acc = MPoly::constant(Rat::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes the bound variables; unbound ones stay symbolic.
    pub fn eval(&self, assignment: &BTreeMap<String, Rat>) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (v, e) in m {
                match assignment.get(v) {
                    Some(x) => coeff *= num_traits::pow(x.clone(), *e as usize),
                    None => rest.push((v.clone(), *e)),
                }
            }
            out.insert(rest, coeff);
        }
        out
    }

    /// Full substitution; fails if a variable is left unbound.
    pub fn eval_rat(&self, assignment: &BTreeMap<String, Rat>) -> Result<Rat> {
        let r = self.eval(assignment);
        r.as_constant()
            .ok_or_else(|| Error::domain(format!("unbound variables in {r}")))
    }

    /// Writes the polynomial in `var` as coefficients of `var^0, var^1, ...`.
    pub fn coefficients_in(&self, var: &str) -> Vec<MPoly> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![MPoly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let mut e = 0;
            let rest: Monomial = m
                .iter()
                .filter(|(v, x)| {
                    if v == var {
                        e = *x as usize;
                        false
                    } else {
                        true
                    }
                })
                .cloned()
                .collect();
            out[e].insert(rest, c.clone());
        }
        out
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest total degree first
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().map(|(_, e)| e).sum();
            let db: u32 = b.iter().map(|(_, e)| e).sum();
            db.cmp(&da).then_with(|| a.cmp(b))
        });
        for (i, (m, c)) in ts.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut parts = Vec::new();
            if !abs.is_one() || m.is_empty() {
                parts.push(if abs.denom().is_one() {
                    abs.numer().to_string()
                } else {
                    format!("{}/{}", abs.numer(), abs.denom())
                });
            }
            for (v, e) in m {
                parts.push(if *e == 1 { v.clone() } else { format!("{v}^{e}") });
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl Add<&MPoly> for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub<&MPoly> for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        self + &(-rhs)
    }
}

impl Mul<&MPoly> for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        let mut acc: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *acc.entry(mono_mul(ma, mb)).or_insert_with(Rat::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        MPoly { terms: acc }
    }
}

impl From<Rat> for MPoly {
    fn from(c: Rat) -> Self {
        MPoly::constant(c)
    }
}

impl ring::Ring for MPoly {
    fn zero() -> Self {
        MPoly::zero()
    }
    fn one() -> Self {
        MPoly::constant(<Rat as One>::one())
    }
    fn is_zero(&self) -> bool {
        MPoly::is_zero(self)
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
        MPoly::constant(crate::number::int(n))
    }
}

/// Largest matrix accepted by [`det_symbolic`]. The regular 6-simplex gives
/// an 8x8 bordered matrix.
pub const MAX_SYMBOLIC_SIZE: usize = 8;

/// Exact determinant of a polynomial matrix by memoised cofactor expansion.
pub fn det_symbolic(m: &[Vec<MPoly>]) -> Result<MPoly> {
    if m.len() > MAX_SYMBOLIC_SIZE {
        return Err(Error::domain(format!(
            "symbolic determinant limited to size {MAX_SYMBOLIC_SIZE}, got {}",
            m.len()
        )));
    }
    ring::det_laplace(m)
}

/// Equality of expanded forms.
pub fn identity_check(lhs: &MPoly, rhs: &MPoly) -> bool {
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::int;
    use crate::ring::Ring;

    fn p(s: &str) -> MPoly {
        parse_poly(s).unwrap()
    }

    fn bind(pairs: &[(&str, i64)]) -> BTreeMap<String, Rat> {
        pairs.iter().map(|(v, x)| (v.to_string(), int(*x))).collect()
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(&p("d^2 + t") * &p("d^2 - t"), p("d^4 - t^2"));
    }

    #[test]
    fn evaluation() {
        let l1 = p("2*d^2*t*(3*d^2 - t)");
        assert_eq!(l1.eval_rat(&bind(&[("d", 1), ("t", 3)])).unwrap(), int(0));
        let l2 = p("3*d^4*(t - 4*d^2)^2");
        assert_eq!(l2.eval_rat(&bind(&[("d", 1), ("t", 0)])).unwrap(), int(48));
        let partial = l2.eval(&bind(&[("d", 1)]));
        assert_eq!(partial, p("3*t^2 - 24*t + 48"));
    }

    #[test]
    fn small_symbolic_determinants() {
        let m = vec![
            vec![MPoly::zero(), MPoly::one()],
            vec![MPoly::one(), MPoly::zero()],
        ];
        assert_eq!(det_symbolic(&m).unwrap(), MPoly::from_i64(-1));
        let big = vec![vec![MPoly::zero(); 9]; 9];
        assert!(det_symbolic(&big).is_err());
    }

    #[test]
    fn equal_rows_vanish() {
        let r = vec![p("a"), p("b^2"), p("a*b - 1")];
        let m = vec![r.clone(), vec![p("c"), p("1"), p("d")], r];
        assert!(det_symbolic(&m).unwrap().is_zero());
    }

    #[test]
    fn identity_check_cases() {
        assert!(identity_check(&p("x^2"), &(&p("x") * &p("x"))));
        assert!(!identity_check(&p("d^2"), &p("t^2")));
    }

    #[test]
    fn display_round_trips() {
        for s in ["3*d^4*(t-4*d^2)^2", "-8*b^2*(t+b^2-a^2)^2", "1/2*x - 7", "0"] {
            let q = p(s);
            assert_eq!(p(&q.to_string()), q);
        }
    }

    #[test]
    fn coefficients_in_a_variable() {
        let cs = p("3*d^4*(t - 4*d^2)^2").coefficients_in("t");
        assert_eq!(cs, vec![p("48*d^8"), p("-24*d^6"), p("3*d^4")]);
    }
}
