use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::{rat_to_string, Rat};
use crate::error::{Error, Result};

/// One level of a quadratic tower: the field below it adjoined `sqrt(radicand)`.
#[derive(Debug)]
pub struct Level {
    index: usize,
    radicand: TReal,
}

impl Level {
    /// 1-based position in the tower.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn radicand(&self) -> &TReal {
        &self.radicand
    }
}

fn same_level(x: &Arc<Level>, y: &Arc<Level>) -> bool {
    Arc::ptr_eq(x, y) || (x.index == y.index && x.radicand == y.radicand)
}

/// An ordered list of genuine quadratic extensions over Q.
///
/// Contexts are values: extending one returns a new context that shares the
/// prefix, so numbers built in an older context stay valid in the newer one.
#[derive(Clone, Debug, Default)]
pub struct TowerCtx {
    levels: Vec<Arc<Level>>,
}

impl TowerCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Arc<Level>] {
        &self.levels
    }

    /// Level by 1-based index.
    pub fn level(&self, index: usize) -> Option<&Arc<Level>> {
        index.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    /// True when every level `x` mentions belongs to this context.
    pub fn contains(&self, x: &TReal) -> bool {
        match x {
            TReal::Rat(_) => true,
            TReal::Ext(e) => {
                self.level(e.level.index)
                    .is_some_and(|l| same_level(l, &e.level))
                    && self.contains(&e.a)
                    && self.contains(&e.b)
            }
        }
    }

    /// Appends a level without any squareness check. Callers guarantee the
    /// radicand is positive and not a square in `self`.
    pub(crate) fn push_level(&self, radicand: TReal) -> (TowerCtx, Arc<Level>) {
        let level = Arc::new(Level {
            index: self.levels.len() + 1,
            radicand,
        });
        let mut levels = self.levels.clone();
        levels.push(level.clone());
        (TowerCtx { levels }, level)
    }

    /// In-place variant of [`TowerCtx::adjoin_sqrt`].
    pub fn sqrt(&mut self, r: &TReal) -> Result<TReal> {
        let (ctx, root) = self.adjoin_sqrt(r)?;
        *self = ctx;
        Ok(root)
    }

    pub fn sqrt_rat(&mut self, r: &Rat) -> Result<TReal> {
        self.sqrt(&TReal::from(r.clone()))
    }
}

/// Exact element of a real quadratic tower: a rational, or `a + b*sqrt(r)`
/// with `a`, `b` strictly below the level of `r` and `b != 0`.
#[derive(Clone)]
pub enum TReal {
    Rat(Rat),
    Ext(Arc<Ext>),
}

#[derive(Debug)]
pub struct Ext {
    level: Arc<Level>,
    a: TReal,
    b: TReal,
}

impl Ext {
    pub fn level(&self) -> &Arc<Level> {
        &self.level
    }

    pub fn a(&self) -> &TReal {
        &self.a
    }

    pub fn b(&self) -> &TReal {
        &self.b
    }
}

impl From<Rat> for TReal {
    fn from(r: Rat) -> Self {
        TReal::Rat(r)
    }
}

impl From<i64> for TReal {
    fn from(n: i64) -> Self {
        TReal::Rat(super::int(n))
    }
}

impl TReal {
    pub fn zero() -> Self {
        TReal::Rat(Rat::zero())
    }

    pub fn one() -> Self {
        TReal::Rat(Rat::one())
    }

    /// `a + b*sqrt(r_level)`, trimmed to a lower level when `b` is zero.
    ///
    /// Panics if `a` or `b` do not live strictly below `level`.
    pub fn compose(level: &Arc<Level>, a: TReal, b: TReal) -> TReal {
        assert!(
            a.level() < level.index && b.level() < level.index,
            "coefficients must live below level {}",
            level.index
        );
        if b.is_zero() {
            a
        } else {
            TReal::Ext(Arc::new(Ext {
                level: level.clone(),
                a,
                b,
            }))
        }
    }

    /// `sqrt(r_level)` itself.
    pub fn generator(level: &Arc<Level>) -> TReal {
        TReal::compose(level, TReal::zero(), TReal::one())
    }

    /// 0 for rationals, otherwise the index of the top level used.
    pub fn level(&self) -> usize {
        match self {
            TReal::Rat(_) => 0,
            TReal::Ext(e) => e.level.index,
        }
    }

    pub fn ext(&self) -> Option<&Ext> {
        match self {
            TReal::Rat(_) => None,
            TReal::Ext(e) => Some(e),
        }
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            TReal::Rat(r) => Some(r),
            TReal::Ext(_) => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, TReal::Rat(_))
    }

    /// Structural zero test; exact because towers are genuine.
    pub fn is_zero(&self) -> bool {
        matches!(self, TReal::Rat(r) if r.is_zero())
    }

    fn level_ref(&self) -> Option<&Arc<Level>> {
        self.ext().map(|e| &e.level)
    }

    /// Coefficients with respect to `level`; values below it get `b = 0`.
    pub(crate) fn split(&self, level: &Arc<Level>) -> (TReal, TReal) {
        match self {
            TReal::Ext(e) if e.level.index == level.index => (e.a.clone(), e.b.clone()),
            _ => (self.clone(), TReal::zero()),
        }
    }

    fn top(x: &TReal, y: &TReal) -> Option<Arc<Level>> {
        match (x.level_ref(), y.level_ref()) {
            (None, None) => None,
            (Some(l), None) | (None, Some(l)) => Some(l.clone()),
            (Some(a), Some(b)) => match a.index.cmp(&b.index) {
                Ordering::Greater => Some(a.clone()),
                Ordering::Less => Some(b.clone()),
                Ordering::Equal => {
                    assert!(same_level(a, b), "values from incompatible towers");
                    Some(a.clone())
                }
            },
        }
    }

    fn add_ref(&self, other: &TReal) -> TReal {
        if let (TReal::Rat(a), TReal::Rat(b)) = (self, other) {
            return TReal::Rat(a + b);
        }
        let level = TReal::top(self, other).expect("non-rational operand");
        let (a, b) = self.split(&level);
        let (c, d) = other.split(&level);
        TReal::compose(&level, a.add_ref(&c), b.add_ref(&d))
    }

    fn neg_ref(&self) -> TReal {
        match self {
            TReal::Rat(r) => TReal::Rat(-r),
            TReal::Ext(e) => TReal::compose(&e.level, e.a.neg_ref(), e.b.neg_ref()),
        }
    }

    fn mul_ref(&self, other: &TReal) -> TReal {
        match (self, other) {
            (TReal::Rat(a), TReal::Rat(b)) => return TReal::Rat(a * b),
            (TReal::Rat(a), _) | (_, TReal::Rat(a)) if a.is_zero() => return TReal::zero(),
            _ => {}
        }
        let level = TReal::top(self, other).expect("non-rational operand");
        let (a, b) = self.split(&level);
        let (c, d) = other.split(&level);
        if b.is_zero() {
            return TReal::compose(&level, a.mul_ref(&c), a.mul_ref(&d));
        }
        if d.is_zero() {
            return TReal::compose(&level, a.mul_ref(&c), b.mul_ref(&c));
        }
        if self == other {
            return self.square();
        }
        // (a + b s)(c + d s) = ac + bd r + (ad + bc) s
        let bd_r = b.mul_ref(&d).mul_ref(&level.radicand);
        let real = a.mul_ref(&c).add_ref(&bd_r);
        let surd = a.mul_ref(&d).add_ref(&b.mul_ref(&c));
        TReal::compose(&level, real, surd)
    }

    pub fn scale(&self, k: &Rat) -> TReal {
        match self {
            TReal::Rat(r) => TReal::Rat(r * k),
            _ if k.is_zero() => TReal::zero(),
            TReal::Ext(e) => TReal::compose(&e.level, e.a.scale(k), e.b.scale(k)),
        }
    }

    pub fn square(&self) -> TReal {
        match self {
            TReal::Rat(r) => TReal::Rat(r * r),
            // (a + b s)^2 = a^2 + b^2 r + 2ab s
            TReal::Ext(e) => {
                let real = e.a.square().add_ref(&e.b.square().mul_ref(&e.level.radicand));
                let surd = e.a.mul_ref(&e.b).scale(&Rat::from_integer(2.into()));
                TReal::compose(&e.level, real, surd)
            }
        }
    }

    /// Multiplicative inverse, rationalising one level at a time.
    pub fn inv(&self) -> Result<TReal> {
        match self {
            TReal::Rat(r) => {
                if r.is_zero() {
                    Err(Error::domain("division by exact zero"))
                } else {
                    Ok(TReal::Rat(r.recip()))
                }
            }
            TReal::Ext(e) => {
                // 1/(a + b s) = (a - b s) / (a^2 - b^2 r)
                let norm = e.a.square() - e.b.square().mul_ref(&e.level.radicand);
                let inv_norm = norm.inv()?;
                Ok(TReal::compose(
                    &e.level,
                    e.a.mul_ref(&inv_norm),
                    e.b.neg_ref().mul_ref(&inv_norm),
                ))
            }
        }
    }

    pub fn try_div(&self, other: &TReal) -> Result<TReal> {
        Ok(self.mul_ref(&other.inv()?))
    }

    pub fn abs(&self) -> TReal {
        if self.sign() < 0 {
            self.neg_ref()
        } else {
            self.clone()
        }
    }

    /// Applies the automorphism `sqrt(r_level) -> -sqrt(r_level)`.
    ///
    /// Fails when a radicand above `level` is moved by the map, in which
    /// case the map does not extend to the whole tower.
    pub fn conjugate_level(&self, level: usize) -> Result<TReal> {
        match self {
            TReal::Rat(_) => Ok(self.clone()),
            TReal::Ext(e) => match e.level.index.cmp(&level) {
                Ordering::Less => Ok(self.clone()),
                Ordering::Equal => Ok(TReal::compose(&e.level, e.a.clone(), e.b.neg_ref())),
                Ordering::Greater => {
                    if e.level.radicand.conjugate_level(level)? != e.level.radicand {
                        return Err(Error::domain(format!(
                            "conjugating level {level} moves the radicand of level {}",
                            e.level.index
                        )));
                    }
                    Ok(TReal::compose(
                        &e.level,
                        e.a.conjugate_level(level)?,
                        e.b.conjugate_level(level)?,
                    ))
                }
            },
        }
    }

    /// Total order on real values; decided by the sign of the difference.
    pub fn cmp_value(&self, other: &TReal) -> Ordering {
        (self - other).sign().cmp(&0)
    }
}

impl PartialEq for TReal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TReal::Rat(a), TReal::Rat(b)) => a == b,
            (TReal::Ext(x), TReal::Ext(y)) => {
                Arc::ptr_eq(x, y)
                    || (same_level(&x.level, &y.level) && x.a == y.a && x.b == y.b)
            }
            _ => false,
        }
    }
}

impl Eq for TReal {}

impl Hash for TReal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            TReal::Rat(r) => {
                0u8.hash(state);
                r.hash(state);
            }
            TReal::Ext(e) => {
                1u8.hash(state);
                e.level.index.hash(state);
                e.a.hash(state);
                e.b.hash(state);
            }
        }
    }
}

impl fmt::Debug for TReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TReal::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}", rat_to_string(r))
                }
            }
            TReal::Ext(e) => {
                let surd = format!("sqrt({})", e.level.radicand);
                let b = if e.b == TReal::one() {
                    surd
                } else if e.b == TReal::from(-1) {
                    format!("-{surd}")
                } else {
                    format!("({})*{surd}", e.b)
                };
                if e.a.is_zero() {
                    write!(f, "{b}")
                } else {
                    write!(f, "({}) + {b}", e.a)
                }
            }
        }
    }
}

impl PartialEq<Rat> for TReal {
    fn eq(&self, other: &Rat) -> bool {
        self.as_rat() == Some(other)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr<&TReal> for &TReal {
            type Output = TReal;
            fn $method(self, rhs: &TReal) -> TReal {
                self.$inner(rhs)
            }
        }
        impl $tr<TReal> for TReal {
            type Output = TReal;
            fn $method(self, rhs: TReal) -> TReal {
                (&self).$inner(&rhs)
            }
        }
        impl $tr<&TReal> for TReal {
            type Output = TReal;
            fn $method(self, rhs: &TReal) -> TReal {
                (&self).$inner(rhs)
            }
        }
        impl $tr<TReal> for &TReal {
            type Output = TReal;
            fn $method(self, rhs: TReal) -> TReal {
                self.$inner(&rhs)
            }
        }
    };
}

impl TReal {
    fn sub_ref(&self, other: &TReal) -> TReal {
        self.add_ref(&other.neg_ref())
    }
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl Neg for &TReal {
    type Output = TReal;
    fn neg(self) -> TReal {
        self.neg_ref()
    }
}

impl Neg for TReal {
    type Output = TReal;
    fn neg(self) -> TReal {
        self.neg_ref()
    }
}

impl TReal {
    /// Sign of the real value: exact zero first, then interval refinement
    /// starting at 64 bits and doubling.
    pub fn sign(&self) -> i32 {
        match self {
            TReal::Rat(r) => {
                if r.is_positive() {
                    1
                } else if r.is_negative() {
                    -1
                } else {
                    0
                }
            }
            TReal::Ext(_) => {
                let mut prec = 64u32;
                loop {
                    let iv = super::Interval::enclose(self, prec);
                    if iv.lo().is_positive() {
                        return 1;
                    }
                    if iv.hi().is_negative() {
                        return -1;
                    }
                    assert!(prec < (1 << 24), "sign refinement did not converge");
                    prec *= 2;
                }
            }
        }
    }

    /// Decimal approximation for display only.
    pub fn to_f64(&self) -> f64 {
        match self {
            TReal::Rat(r) => super::rat_to_f64(r),
            TReal::Ext(_) => {
                let iv = super::Interval::enclose(self, 64);
                super::rat_to_f64(&((iv.lo() + iv.hi()) / Rat::from_integer(2.into())))
            }
        }
    }
}
