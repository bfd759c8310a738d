//! Multi-quadratic fields `Q(sqrt r1, ..., sqrt rk)` with integer radicands,
//! stored as integer coefficient vectors over one common denominator.
//!
//! Tower values whose radicands are all integers embed here, and squaring
//! needs no gcd work, so bulk checks of squared distances run far faster
//! than through [`TReal`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{Rat, TReal};

/// Coefficient `i` belongs to the product of `sqrt r_(b+1)` over the set bits
/// `b` of `i`.
#[derive(Clone, Debug)]
pub struct MqElem {
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for MqElem {
    fn eq(&self, other: &Self) -> bool {
        self.num.len() == other.num.len()
            && self
                .num
                .iter()
                .zip(&other.num)
                .all(|(x, y)| x * &other.den == y * &self.den)
    }
}

/// The field spanned by the first `k` levels of a tower.
#[derive(Clone, Debug)]
pub struct MultiQuad {
    radicands: Vec<BigInt>,
}

impl MultiQuad {
    /// The smallest field holding all `values`, or `None` if some level has a
    /// non-integer radicand or two values disagree on a level's radicand.
    pub fn spanning<'a>(values: impl IntoIterator<Item = &'a TReal>) -> Option<MultiQuad> {
        let mut radicands: Vec<Option<BigInt>> = Vec::new();
        let mut stack: Vec<&TReal> = values.into_iter().collect();
        while let Some(x) = stack.pop() {
            let Some(e) = x.ext() else { continue };
            let r = e.level().radicand().as_rat()?;
            if !r.is_integer() {
                return None;
            }
            let i = e.level().index() - 1;
            if radicands.len() <= i {
                radicands.resize(i + 1, None);
            }
            match &radicands[i] {
                Some(prev) if prev != r.numer() => return None,
                Some(_) => {}
                None => radicands[i] = Some(r.numer().clone()),
            }
            stack.push(e.a());
            stack.push(e.b());
        }
        // a level never seen carries only zero coefficients
        Some(MultiQuad {
            radicands: radicands.into_iter().map(|r| r.unwrap_or_else(BigInt::one)).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        1 << self.radicands.len()
    }

    pub fn embed(&self, x: &TReal) -> Option<MqElem> {
        let mut coeffs = vec![Rat::zero(); self.degree()];
        self.collect(x, 0, &mut coeffs)?;
        let den = coeffs.iter().fold(BigInt::one(), |d, c| d.lcm(c.denom()));
        let num = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Some(MqElem { num, den })
    }

    fn collect(&self, x: &TReal, offset: usize, out: &mut [Rat]) -> Option<()> {
        match x {
            TReal::Rat(r) => {
                out[offset] += r;
                Some(())
            }
            TReal::Ext(e) => {
                let i = e.level().index() - 1;
                if i >= self.radicands.len() || e.level().radicand().as_rat()? != &Rat::from_integer(self.radicands[i].clone()) {
                    return None;
                }
                self.collect(e.a(), offset, out)?;
                self.collect(e.b(), offset | (1 << i), out)
            }
        }
    }

    pub fn rational(&self, r: &Rat) -> MqElem {
        let mut num = vec![BigInt::zero(); self.degree()];
        num[0] = r.numer().clone();
        MqElem {
            num,
            den: r.denom().clone(),
        }
    }

    pub fn sub(&self, x: &MqElem, y: &MqElem) -> MqElem {
        self.combine(x, y, false)
    }

    pub fn add(&self, x: &MqElem, y: &MqElem) -> MqElem {
        self.combine(x, y, true)
    }

    fn combine(&self, x: &MqElem, y: &MqElem, plus: bool) -> MqElem {
        let den = x.den.lcm(&y.den);
        let (fx, fy) = (&den / &x.den, &den / &y.den);
        let num = x
            .num
            .iter()
            .zip(&y.num)
            .map(|(a, b)| {
                let (a, b) = (a * &fx, b * &fy);
                if plus {
                    a + b
                } else {
                    a - b
                }
            })
            .collect();
        MqElem { num, den }
    }

    pub fn square(&self, x: &MqElem) -> MqElem {
        MqElem {
            num: square(&x.num, &self.radicands),
            den: &x.den * &x.den,
        }
    }

    /// Squared Euclidean distance between two embedded points.
    pub fn phi(&self, p: &[MqElem], q: &[MqElem]) -> MqElem {
        let mut acc = self.rational(&Rat::zero());
        for (x, y) in p.iter().zip(q) {
            acc = self.add(&acc, &self.square(&self.sub(x, y)));
        }
        acc
    }
}

// (a + b s)^2 = a^2 + r b^2 + ((a + b)^2 - a^2 - b^2) s, recursively.
fn square(v: &[BigInt], radicands: &[BigInt]) -> Vec<BigInt> {
    if v.len() == 1 {
        return vec![&v[0] * &v[0]];
    }
    let h = v.len() / 2;
    let (a, b) = v.split_at(h);
    let (r, lower) = radicands.split_last().expect("one radicand per halving");
    let mut out = Vec::with_capacity(v.len());
    if b.iter().all(Zero::is_zero) {
        out.extend(square(a, lower));
        out.resize(v.len(), BigInt::zero());
        return out;
    }
    let b2 = square(b, lower);
    if a.iter().all(Zero::is_zero) {
        out.extend(b2.iter().map(|c| c * r));
        out.resize(v.len(), BigInt::zero());
        return out;
    }
    let a2 = square(a, lower);
    let s: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let s2 = square(&s, lower);
    out.extend(a2.iter().zip(&b2).map(|(x, y)| x + y * r));
    out.extend(s2.into_iter().zip(a2.iter().zip(&b2)).map(|(s, (x, y))| s - x - y));
    out
}
