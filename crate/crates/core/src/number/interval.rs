use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{Rat, TReal};

/// Closed interval with rational endpoints on a dyadic grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Rat,
    hi: Rat,
}

fn scale(prec: u32) -> BigInt {
    BigInt::from(1) << prec
}

fn round_down(r: &Rat, prec: u32) -> Rat {
    let s = scale(prec);
    Rat::new((r * Rat::from_integer(s.clone())).floor().to_integer(), s)
}

fn round_up(r: &Rat, prec: u32) -> Rat {
    let s = scale(prec);
    Rat::new((r * Rat::from_integer(s.clone())).ceil().to_integer(), s)
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, r: &Rat) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    fn point(r: &Rat, prec: u32) -> Self {
        Interval::new(round_down(r, prec), round_up(r, prec))
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    fn mul(&self, o: &Interval, prec: u32) -> Interval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap();
        let hi = c.iter().max().unwrap();
        Interval::new(round_down(lo, prec), round_up(hi, prec))
    }

    /// Enclosure of `sqrt` over the nonnegative part of the interval.
    fn sqrt(&self, prec: u32) -> Interval {
        let s = scale(prec);
        let s2 = Rat::from_integer(&s * &s);
        let lo = if self.lo.is_positive() {
            let n = (&self.lo * &s2).floor().to_integer();
            Rat::new(n.sqrt(), s.clone())
        } else {
            Rat::zero()
        };
        let hi = if self.hi.is_positive() {
            let n = (&self.hi * &s2).ceil().to_integer();
            let mut r = n.sqrt();
            if &r * &r < n {
                r += 1;
            }
            Rat::new(r, s)
        } else {
            Rat::zero()
        };
        Interval::new(lo, hi)
    }

    /// Outward-rounded enclosure of a tower element at `2^-prec` granularity
    /// per operation.
    pub fn enclose(x: &TReal, prec: u32) -> Interval {
        match x {
            TReal::Rat(r) => Interval::point(r, prec),
            TReal::Ext(e) => {
                let a = Interval::enclose(e.a(), prec);
                let b = Interval::enclose(e.b(), prec);
                let r = Interval::enclose(e.level().radicand(), prec);
                a.add(&b.mul(&r.sqrt(prec), prec))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{int, rat, TowerCtx};

    #[test]
    fn sqrt2_enclosure_is_tight() {
        let mut ctx = TowerCtx::new();
        let s2 = ctx.sqrt_rat(&int(2)).unwrap();
        let iv = Interval::enclose(&s2, 64);
        assert!(iv.contains(&rat(1_414_213_562, 1_000_000_000)) || iv.lo() > &rat(1414, 1000));
        assert!(iv.width() < rat(1, 1 << 60));
        assert!(iv.lo() * iv.lo() <= int(2) && iv.hi() * iv.hi() >= int(2));
    }
}
