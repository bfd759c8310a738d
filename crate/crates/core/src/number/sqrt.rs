use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::tower::Level;
use super::{odd_prime_support, rat_sqrt, squarefree_decompose, Rat, TReal, TowerCtx};
use crate::error::{Error, Result};

impl TowerCtx {
    /// Square root of `x` inside this tower, if one exists. The returned root
    /// is nonnegative.
    pub fn is_square(&self, x: &TReal) -> Option<TReal> {
        assert!(self.contains(x), "value does not belong to this tower");
        sqrt_in(self.levels(), x)
    }

    /// Returns the context extended by `sqrt(r)` (unchanged if `r` is already
    /// a square) together with the nonnegative root.
    ///
    /// Rational radicands are normalised to squarefree integers, so adjoining
    /// 12 records radicand 3 and returns `2*sqrt(3)`.
    pub fn adjoin_sqrt(&self, r: &TReal) -> Result<(TowerCtx, TReal)> {
        if !self.contains(r) {
            return Err(Error::domain("radicand does not belong to this tower"));
        }
        if r.sign() < 0 {
            return Err(Error::domain(format!("square root of negative value {r}")));
        }
        if let Some(root) = self.is_square(r) {
            return Ok((self.clone(), root));
        }
        if let Some(q) = r.as_rat() {
            if let Some((c, s)) = squarefree_decompose(q) {
                let (ctx, level) = self.push_level(TReal::from(Rat::from_integer(s)));
                let root = TReal::compose(&level, TReal::zero(), TReal::from(c));
                return Ok((ctx, root));
            }
        }
        let (ctx, level) = self.push_level(r.clone());
        Ok((ctx, TReal::generator(&level)))
    }
}

fn sqrt_in(levels: &[Arc<Level>], x: &TReal) -> Option<TReal> {
    match x.sign() {
        s if s < 0 => return None,
        0 => return Some(TReal::zero()),
        _ => {}
    }
    let Some((top, rest)) = levels.split_last() else {
        return rat_sqrt(x.as_rat().expect("rational at the base")).map(TReal::from);
    };
    if let Some(q) = x.as_rat() {
        if let Some(found) = rational_sqrt_multiquadratic(levels, q) {
            return found;
        }
    }
    let (a, b) = x.split(top);
    if b.is_zero() {
        if let Some(s) = sqrt_in(rest, &a) {
            return Some(s);
        }
        // a = v^2 * r  =>  sqrt(a) = v*sqrt(r)
        let q = a.try_div(top.radicand()).ok()?;
        let v = sqrt_in(rest, &q)?;
        return Some(TReal::compose(top, TReal::zero(), v));
    }
    // (u + v s)^2 = u^2 + v^2 r + 2uv s, so N = a^2 - b^2 r = (u^2 - v^2 r)^2
    let norm = a.square() - b.square() * top.radicand();
    let n = sqrt_in(rest, &norm)?;
    let half = Rat::new(1.into(), 2.into());
    for cand in [(&a + &n).scale(&half), (&a - &n).scale(&half)] {
        let Some(u) = sqrt_in(rest, &cand) else {
            continue;
        };
        if u.is_zero() {
            continue;
        }
        let v = b.try_div(&u.scale(&Rat::from_integer(2.into()))).ok()?;
        let root = TReal::compose(top, u, v);
        if &root * &root == *x {
            return Some(root.abs());
        }
    }
    None
}

/// Fast path for a rational inside a tower whose radicands are all rational.
///
/// Over such a tower `sqrt(q)` exists iff the odd-multiplicity primes of `q`
/// are a GF(2) combination of those of the radicands. Outer `None` means the
/// fast path does not apply.
fn rational_sqrt_multiquadratic(levels: &[Arc<Level>], q: &Rat) -> Option<Option<TReal>> {
    let radicands: Vec<&Rat> = levels
        .iter()
        .map(|l| l.radicand().as_rat())
        .collect::<Option<_>>()?;
    let (c, s) = squarefree_decompose(q)?;
    if s.is_one() {
        return Some(Some(TReal::from(c)));
    }
    let target: BTreeSet<BigInt> = odd_prime_support(&s)?.into_iter().collect();

    // Fully reduced basis: each pivot appears in exactly one basis vector.
    let mut basis: Vec<(BigInt, BTreeSet<BigInt>, BTreeSet<usize>)> = Vec::new();
    for (i, r) in radicands.iter().enumerate() {
        let n = r.numer() * r.denom();
        let mut v: BTreeSet<BigInt> = odd_prime_support(&n.abs())?.into_iter().collect();
        let mut combo: BTreeSet<usize> = [i].into();
        reduce(&basis, &mut v, &mut combo);
        if let Some(pivot) = v.iter().next_back().cloned() {
            for (_, bv, bc) in basis.iter_mut() {
                if bv.contains(&pivot) {
                    xor(bv, &v);
                    xor(bc, &combo);
                }
            }
            basis.push((pivot, v, combo));
        }
    }
    let mut t = target;
    let mut combo = BTreeSet::new();
    reduce(&basis, &mut t, &mut combo);
    if !t.is_empty() {
        return Some(None);
    }
    // prod(r_i) = w^2 * s, so sqrt(q) = c * sqrt(s) = (c / w) * prod(sqrt(r_i))
    let mut prod = Rat::one();
    let mut root = TReal::one();
    for &i in &combo {
        prod *= radicands[i];
        root = root * TReal::generator(&levels[i]);
    }
    let w = rat_sqrt(&(prod / Rat::from_integer(s)))?;
    Some(Some(root.scale(&(c / w)).abs()))
}

fn reduce<T: Ord + Clone>(
    basis: &[(T, BTreeSet<T>, BTreeSet<usize>)],
    v: &mut BTreeSet<T>,
    combo: &mut BTreeSet<usize>,
) {
    for (pivot, bv, bc) in basis {
        if v.contains(pivot) {
            xor(v, bv);
            xor(combo, bc);
        }
    }
}

fn xor<T: Ord + Clone>(a: &mut BTreeSet<T>, b: &BTreeSet<T>) {
    for x in b {
        if !a.remove(x) {
            a.insert(x.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{int, rat};

    #[test]
    fn adjoining_a_square_keeps_the_tower() {
        let ctx = TowerCtx::new();
        let (ctx2, r) = ctx.adjoin_sqrt(&TReal::from(rat(9, 4))).unwrap();
        assert_eq!(ctx2.depth(), 0);
        assert_eq!(r, TReal::from(rat(3, 2)));
    }

    #[test]
    fn radicands_are_squarefree() {
        let mut ctx = TowerCtx::new();
        let r = ctx.sqrt_rat(&int(12)).unwrap();
        assert_eq!(ctx.depth(), 1);
        assert_eq!(ctx.levels()[0].radicand(), &TReal::from(3));
        assert_eq!(r.square(), TReal::from(12));
    }

    #[test]
    fn sqrt6_in_q_sqrt2_sqrt3() {
        let mut ctx = TowerCtx::new();
        let s2 = ctx.sqrt_rat(&int(2)).unwrap();
        let s3 = ctx.sqrt_rat(&int(3)).unwrap();
        let r = ctx.is_square(&TReal::from(6)).unwrap();
        assert_eq!(r, &s2 * &s3);
        let before = ctx.depth();
        let again = ctx.sqrt_rat(&int(6)).unwrap();
        assert_eq!(ctx.depth(), before);
        assert_eq!(again, r);
        assert!(ctx.is_square(&TReal::from(5)).is_none());
    }

    #[test]
    fn nested_square_detected() {
        // 3 + 2 sqrt 2 = (1 + sqrt 2)^2
        let mut ctx = TowerCtx::new();
        let s2 = ctx.sqrt_rat(&int(2)).unwrap();
        let x = TReal::from(3) + s2.scale(&int(2));
        assert_eq!(ctx.is_square(&x).unwrap(), TReal::one() + &s2);
        // 1 + sqrt 2 is not a square in Q(sqrt 2)
        let y = TReal::one() + &s2;
        assert!(ctx.is_square(&y).is_none());
        let depth = ctx.depth();
        let root = ctx.sqrt(&y).unwrap();
        assert_eq!(ctx.depth(), depth + 1);
        assert_eq!(root.square(), y);
    }

    #[test]
    fn negative_radicand_is_domain_error() {
        let ctx = TowerCtx::new();
        assert!(matches!(
            ctx.adjoin_sqrt(&TReal::from(-2)),
            Err(Error::Domain(_))
        ));
    }
}
