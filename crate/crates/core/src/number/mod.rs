//! Exact scalars: arbitrary-precision rationals and real quadratic towers.
//!
//! Every coordinate produced by the gadget compiler lives in a tower
//! `Q(sqrt r1)(sqrt r2)...` of real quadratic extensions, so equality is
//! decided structurally and signs by interval refinement that only runs on
//! values already known to be nonzero.

mod interval;
mod multiquad;
mod sqrt;
mod tower;

pub use interval::Interval;
pub use multiquad::{MqElem, MultiQuad};
pub use tower::{Level, TReal, TowerCtx};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Canonical rational: reduced, positive denominator, zero is `0/1`.
pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Canonical `p/q` text form. Integers keep the `/1` suffix.
pub fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses the canonical `p/q` form and rejects anything not already reduced.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let (n, d) = s
        .split_once('/')
        .ok_or_else(|| Error::parse(s, "rational must have the form p/q"))?;
    let num: BigInt = n
        .parse()
        .map_err(|_| Error::parse(s, "invalid numerator"))?;
    let den: BigInt = d
        .parse()
        .map_err(|_| Error::parse(s, "invalid denominator"))?;
    if den.sign() != Sign::Plus {
        return Err(Error::parse(s, "denominator must be positive"));
    }
    if !num.gcd(&den).is_one() {
        return Err(Error::parse(s, "rational is not in lowest terms"));
    }
    Ok(Rat::new_raw(num, den))
}

/// Lenient parser for user input: accepts `p/q`, `p`, reduces on the way in.
pub fn parse_rat_lenient(s: &str) -> Result<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let num: BigInt = n.trim().parse().map_err(|_| Error::parse(s, "invalid numerator"))?;
            let den: BigInt = d.trim().parse().map_err(|_| Error::parse(s, "invalid denominator"))?;
            if den.is_zero() {
                return Err(Error::parse(s, "zero denominator"));
            }
            Ok(Rat::new(num, den))
        }
        None => {
            let num: BigInt = s.parse().map_err(|_| Error::parse(s, "invalid integer"))?;
            Ok(Rat::from_integer(num))
        }
    }
}

fn int_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Exact rational square root, if the rational is a square.
pub fn rat_sqrt(r: &Rat) -> Option<Rat> {
    let n = int_sqrt_exact(r.numer())?;
    let d = int_sqrt_exact(r.denom())?;
    Some(Rat::new(n, d))
}

/// Smallest nonnegative integer `e` with `e^2 >= r`.
pub fn ceil_sqrt(r: &Rat) -> BigInt {
    if !r.is_positive() {
        return BigInt::zero();
    }
    let c = r.ceil().to_integer();
    let mut e = c.sqrt();
    while Rat::from_integer(&e * &e) < *r {
        e += 1;
    }
    e
}

/// Writes a positive rational as `c^2 * s` with `s` a squarefree integer.
///
/// Returns `None` when a cofactor above the trial-division bound cannot be
/// certified squarefree.
pub fn squarefree_decompose(r: &Rat) -> Option<(Rat, BigInt)> {
    if !r.is_positive() {
        return None;
    }
    // p/q = (p*q) / q^2
    let pq = r.numer() * r.denom();
    let (square, kernel) = squarefree_int(&pq)?;
    Some((Rat::new(square, r.denom().clone()), kernel))
}

const TRIAL_BOUND: u64 = 1_000_000;

/// `n = s^2 * k` with `k` squarefree; `n > 0`.
fn squarefree_int(n: &BigInt) -> Option<(BigInt, BigInt)> {
    let mut rest = n.clone();
    let mut square = BigInt::one();
    let mut kernel = BigInt::one();
    let mut p: u64 = 2;
    while p <= TRIAL_BOUND {
        let bp = BigInt::from(p);
        if &bp * &bp > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        if e > 0 {
            square *= bp.pow(e / 2);
            if e % 2 == 1 {
                kernel *= &bp;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest.is_one() {
        return Some((square, kernel));
    }
    let bound = BigInt::from(TRIAL_BOUND);
    if rest <= &bound * &bound {
        // no factor below sqrt(rest): rest is prime
        kernel *= rest;
        return Some((square, kernel));
    }
    if let Some(r) = int_sqrt_exact(&rest) {
        // large perfect square cofactor
        return Some((square * r, kernel));
    }
    None
}

/// Prime factors with odd multiplicity of a positive integer, if it can be
/// fully factored by trial division.
pub(crate) fn odd_prime_support(n: &BigInt) -> Option<Vec<BigInt>> {
    let (_, kernel) = squarefree_int(n)?;
    let mut out = Vec::new();
    let mut rest = kernel;
    let mut p: u64 = 2;
    while !rest.is_one() {
        if p > TRIAL_BOUND {
            out.push(rest);
            break;
        }
        let bp = BigInt::from(p);
        if &bp * &bp > rest {
            out.push(rest);
            break;
        }
        if (&rest % &bp).is_zero() {
            rest /= &bp;
            out.push(bp);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    Some(out)
}

pub(crate) fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_strings_round_trip() {
        for r in [rat(0, 1), rat(-3, 4), int(7), rat(10, 4)] {
            assert_eq!(parse_rat(&rat_to_string(&r)).unwrap(), r);
        }
        assert_eq!(rat_to_string(&rat(10, 4)), "5/2");
        assert_eq!(rat_to_string(&int(0)), "0/1");
    }

    #[test]
    fn non_canonical_rationals_rejected() {
        assert!(parse_rat("2/4").is_err());
        assert!(parse_rat("3/-1").is_err());
        assert!(parse_rat("3").is_err());
        assert!(parse_rat("0/2").is_err());
    }

    #[test]
    fn squarefree_parts() {
        let (c, s) = squarefree_decompose(&int(12)).unwrap();
        assert_eq!((c, s), (int(2), BigInt::from(3)));
        // 9/4 -> 9*4 / 16 = (6/4)^2 * 1
        let (c, s) = squarefree_decompose(&rat(9, 4)).unwrap();
        assert_eq!((c, s), (rat(3, 2), BigInt::from(1)));
        let (c, s) = squarefree_decompose(&rat(5, 4)).unwrap();
        assert_eq!((c, s), (rat(1, 2), BigInt::from(5)));
    }

    #[test]
    fn ceil_sqrt_is_minimal() {
        assert_eq!(ceil_sqrt(&int(3)), BigInt::from(2));
        assert_eq!(ceil_sqrt(&int(4)), BigInt::from(2));
        assert_eq!(ceil_sqrt(&int(20)), BigInt::from(5));
        assert_eq!(ceil_sqrt(&rat(1, 4)), BigInt::from(1));
    }

    #[test]
    fn rational_squares() {
        assert_eq!(rat_sqrt(&rat(49, 4)), Some(rat(7, 2)));
        assert_eq!(rat_sqrt(&int(2)), None);
        assert_eq!(rat_sqrt(&int(-4)), None);
    }
}
