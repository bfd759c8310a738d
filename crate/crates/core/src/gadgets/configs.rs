//! Exact configurations used by the vector-transfer and perpendicularity
//! arguments, each with a machine-checkable list of distance claims.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cayley_menger::{phi, PointN};
use crate::error::{Error, Result};
use crate::number::{int, rat, rat_to_string, Rat, TReal, TowerCtx};

/// `|p q|^2 = sqdist`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceClaim {
    pub p: String,
    pub q: String,
    pub sqdist: TReal,
}

/// Named points plus the squared distances they are claimed to realise.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub points: Vec<(String, PointN)>,
    pub claims: Vec<DistanceClaim>,
}

impl Configuration {
    pub fn get(&self, name: &str) -> Option<&PointN> {
        self.points.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    fn must(&self, name: &str) -> Result<&PointN> {
        self.get(name)
            .ok_or_else(|| Error::validation("configuration", format!("no point named {name}")))
    }

    /// Checks every claim exactly.
    pub fn verify(&self) -> Result<()> {
        for c in &self.claims {
            let got = phi(self.must(&c.p)?, self.must(&c.q)?)?;
            if got != c.sqdist {
                return Err(Error::validation(
                    format!("claim |{}{}|^2", c.p, c.q),
                    format!("got {got}, claimed {}", c.sqdist),
                ));
            }
        }
        Ok(())
    }

    fn claim(&mut self, p: &str, q: &str, sqdist: TReal) {
        self.claims.push(DistanceClaim {
            p: p.into(),
            q: q.into(),
            sqdist,
        });
    }
}

/// The straight-line linkage: `|AB| = |AD| = 4`, `|CB| = |CD| = |CE| = 2`,
/// `|AF| = 3`, `|FB| = |FE| = 1`, translated to `origin`.
pub fn kempe_config(ctx: &mut TowerCtx, origin: &PointN) -> Result<Configuration> {
    let s7 = ctx.sqrt_rat(&int(7))?;
    let q = |n: i64| TReal::from(rat(n, 4));
    let at = |x: TReal, y: TReal| origin.add(&PointN::xy(x, y));
    let raw = [
        ("A", at(q(0), q(0))?),
        ("B", at(q(16), q(0))?),
        ("C", at(q(15), s7.scale(&rat(3, 4)))?),
        ("D", at(q(9), s7.scale(&rat(5, 4)))?),
        ("E", at(q(9), s7.scale(&rat(1, 4)))?),
        ("F", at(q(12), q(0))?),
    ];
    let mut cfg = Configuration {
        points: raw.into_iter().map(|(n, p)| (n.to_string(), p)).collect(),
        claims: Vec::new(),
    };
    for (p, q, d2) in [
        ("A", "B", 16),
        ("A", "D", 16),
        ("C", "B", 4),
        ("C", "D", 4),
        ("C", "E", 4),
        ("A", "F", 9),
        ("F", "B", 1),
        ("F", "E", 1),
    ] {
        cfg.claim(p, q, TReal::from(d2));
    }
    cfg.verify()?;
    Ok(cfg)
}

/// Dot product of `DE` and `AB` in a linkage configuration.
pub fn kempe_perpendicularity(cfg: &Configuration) -> Result<TReal> {
    let de = cfg.must("E")?.sub(cfg.must("D")?)?;
    let ab = cfg.must("B")?.sub(cfg.must("A")?)?;
    de.dot(&ab)
}

/// Simplest rational (least denominator, then least numerator) strictly
/// inside `(sqrt(lo2), sqrt(lo2) / |1 - 2t|)`; the upper end is infinite at
/// `t = 1/2`.
fn simplest_radius(lo2: &Rat, t: &Rat) -> Result<Rat> {
    let k = (Rat::one() - t * int(2)).abs();
    let k2 = &k * &k;
    for q in 1u32..=1_000_000 {
        let qq = Rat::from_integer(BigInt::from(q));
        // least p with p/q > sqrt(lo2)
        let scaled = lo2 * &qq * &qq;
        let mut p: BigInt = scaled.floor().to_integer().sqrt();
        while Rat::from_integer(&p * &p) <= scaled {
            p += 1;
        }
        let r = Rat::new(p, BigInt::from(q));
        if k2.is_zero() || &r * &r * &k2 < *lo2 {
            return Ok(r);
        }
    }
    Err(Error::domain("admissible radius interval is empty"))
}

/// Points `C, D, E, F` for interpolating at parameter `t` on `AB`, with
/// rational lengths `|AE|, |ED|, |AD|, |BF|, |FD|, |BD|, |EC|, |FC|`.
pub fn interpolation_config(ctx: &mut TowerCtx, a: &PointN, b: &PointN, t: &Rat) -> Result<(Rat, Configuration)> {
    if !(t.is_positive() && t < &Rat::one()) {
        return Err(Error::domain(format!("t must lie in (0, 1), got {}", rat_to_string(t))));
    }
    let l2 = phi(a, b)?;
    let l2 = l2
        .as_rat()
        .filter(|r| r.is_positive())
        .cloned()
        .ok_or_else(|| Error::domain(format!("|AB|^2 must be a positive rational, got {l2}")))?;
    let r = simplest_radius(&l2, t)?;
    let s = Rat::one() - t;
    let (ad, bd) = (&s * &r, t * &r);
    // D = A + alpha (B - A) + beta perp(B - A)
    let alpha = (&l2 + &ad * &ad - &bd * &bd) / (&l2 * int(2));
    let beta2 = &ad * &ad / &l2 - &alpha * &alpha;
    if !beta2.is_positive() {
        return Err(Error::domain("radius violates the strict triangle inequality"));
    }
    let beta = ctx.sqrt_rat(&beta2)?;
    let v = b.sub(a)?;
    let d = a.add(&v.scale(&TReal::from(alpha)))?.add(&v.perp().scale(&beta))?;
    let tt = TReal::from(t.clone());
    let ss = TReal::from(s.clone());
    let e = a.scale(&tt).add(&d.scale(&ss))?;
    let f = b.scale(&ss).add(&d.scale(&tt))?;
    let c = a.scale(&tt).add(&b.scale(&ss))?;
    let mut cfg = Configuration {
        points: [("A", a.clone()), ("B", b.clone()), ("C", c), ("D", d), ("E", e), ("F", f)]
            .into_iter()
            .map(|(n, p)| (n.to_string(), p))
            .collect(),
        claims: Vec::new(),
    };
    let sq = |x: Rat| TReal::from(&x * &x);
    let ts = t * &s;
    cfg.claim("A", "E", sq(&s * &s * &r));
    cfg.claim("E", "D", sq(&ts * &r));
    cfg.claim("A", "D", sq(ad.clone()));
    cfg.claim("B", "F", sq(t * t * &r));
    cfg.claim("F", "D", sq(&ts * &r));
    cfg.claim("B", "D", sq(bd.clone()));
    cfg.claim("E", "C", sq(&ts * &r));
    cfg.claim("F", "C", sq(&ts * &r));
    cfg.verify()?;
    Ok((r, cfg))
}

/// A chain `A0 = A, ..., Am = B` and `Ci = Ai + (C - A)` in which every
/// `Ai Ci C(i+1) A(i+1)` is a rhombus of rational side `side = |AC|`.
pub fn rhombus_chain(
    ctx: &mut TowerCtx,
    a: &PointN,
    b: &PointN,
    c: &PointN,
    d: &PointN,
    side: &Rat,
) -> Result<Configuration> {
    if b.sub(a)? != d.sub(c)? {
        return Err(Error::domain("rhombus chain needs AB = CD as vectors"));
    }
    let s2 = TReal::from(side * side);
    if !side.is_positive() || phi(a, c)? != s2 {
        return Err(Error::domain(format!("|AC| must equal the side {}", rat_to_string(side))));
    }
    let u = c.sub(a)?;
    let l2 = phi(a, b)?;
    let mut chain = vec![a.clone()];
    if !l2.is_zero() {
        let l = ctx.sqrt(&l2)?;
        let ratio = l.try_div(&TReal::from(side.clone()))?;
        // m = max(2, ceil(|AB| / side))
        let mut m = BigInt::from(ratio.to_f64().ceil().max(0.0) as u64);
        while TReal::from(Rat::from_integer(m.clone())).cmp_value(&ratio).is_lt() {
            m += 1;
        }
        while m > BigInt::one() && TReal::from(Rat::from_integer(&m - 1)).cmp_value(&ratio).is_ge() {
            m -= 1;
        }
        let m = m.max(BigInt::from(2));
        let m: usize = m.try_into().map_err(|_| Error::domain("chain too long"))?;
        let v = b.sub(a)?;
        let step = v.scale(&TReal::from(side.clone()).try_div(&l)?);
        for _ in 0..m - 2 {
            let next = chain.last().unwrap().add(&step)?;
            chain.push(next);
        }
        // close with an isosceles apex over the remaining segment
        let last = chain.last().unwrap().clone();
        let w = b.sub(&last)?;
        let w2 = w.dot(&w)?;
        let h2 = (s2.clone() - w2.scale(&rat(1, 4))).try_div(&w2)?;
        let h = ctx.sqrt(&h2)?;
        let apex = last.add(&w.scale(&TReal::from(rat(1, 2))))?.add(&w.perp().scale(&h))?;
        chain.push(apex);
        chain.push(b.clone());
    }
    let mut cfg = Configuration {
        points: Vec::new(),
        claims: Vec::new(),
    };
    for (i, p) in chain.iter().enumerate() {
        cfg.points.push((format!("A{i}"), p.clone()));
    }
    for (i, p) in chain.iter().enumerate() {
        cfg.points.push((format!("C{i}"), p.add(&u)?));
    }
    for i in 0..chain.len() {
        cfg.claim(&format!("A{i}"), &format!("C{i}"), s2.clone());
        if i + 1 < chain.len() {
            cfg.claim(&format!("A{i}"), &format!("A{}", i + 1), s2.clone());
            cfg.claim(&format!("C{i}"), &format!("C{}", i + 1), s2.clone());
        }
    }
    cfg.verify()?;
    Ok(cfg)
}

/// `E, F` with `AB = EF = CD` as vectors, `|AE| = |BF|` and `|EC| = |FD|`
/// rational.
pub fn parallelogram_transfer(
    ctx: &mut TowerCtx,
    a: &PointN,
    b: &PointN,
    c: &PointN,
    d: &PointN,
) -> Result<Configuration> {
    let ab = b.sub(a)?;
    if ab != d.sub(c)? {
        return Err(Error::domain("parallelogram transfer needs AB = CD as vectors"));
    }
    let v = c.sub(a)?;
    let l2 = v.dot(&v)?;
    let mut cfg = Configuration {
        points: Vec::new(),
        claims: Vec::new(),
    };
    let e = if ab.coords.iter().all(TReal::is_zero) || l2.is_zero() {
        a.clone()
    } else {
        // E on the perpendicular bisector of AC at rational distance rho
        let l = ctx.sqrt(&l2)?;
        let rho = Rat::from_integer(BigInt::from((l.to_f64() / 2.0).floor().max(0.0) as u64));
        let mut rho = rho;
        while TReal::from(&rho * int(2)).cmp_value(&l).is_le() {
            rho += Rat::one();
        }
        let h2 = TReal::from(&rho * &rho).try_div(&l2)? - TReal::from(rat(1, 4));
        let h = ctx.sqrt(&h2)?;
        let rho2 = TReal::from(&rho * &rho);
        cfg.claim("A", "E", rho2.clone());
        cfg.claim("B", "F", rho2.clone());
        cfg.claim("E", "C", rho2.clone());
        cfg.claim("F", "D", rho2);
        a.add(&v.scale(&TReal::from(rat(1, 2))))?.add(&v.perp().scale(&h))?
    };
    let f = e.add(&ab)?;
    if cfg.claims.is_empty() {
        let ec = phi(&e, c)?;
        cfg.claim("A", "E", TReal::zero());
        cfg.claim("B", "F", TReal::zero());
        cfg.claim("E", "C", ec.clone());
        cfg.claim("F", "D", ec);
    }
    cfg.points = [("A", a), ("B", b), ("C", c), ("D", d), ("E", &e), ("F", &f)]
        .into_iter()
        .map(|(n, p)| (n.to_string(), p.clone()))
        .collect();
    cfg.verify()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i64, y: i64) -> PointN {
        PointN::rat2(int(x), int(y))
    }

    #[test]
    fn kempe_distances_and_perpendicularity() {
        let mut ctx = TowerCtx::new();
        let cfg = kempe_config(&mut ctx, &PointN::origin(2)).unwrap();
        assert_eq!(cfg.claims.len(), 8);
        assert!(kempe_perpendicularity(&cfg).unwrap().is_zero());
        let p = |n| cfg.get(n).unwrap();
        assert_eq!(phi(p("A"), p("B")).unwrap(), TReal::from(16));
        let c = phi(p("B"), p("E")).unwrap();
        let d = phi(p("C"), p("F")).unwrap();
        assert_eq!((c.clone(), d.clone()), (TReal::from(rat(7, 2)), TReal::from(rat(9, 2))));
        // c d + d^2 - 10 d + 9 = 0
        let rel = &c * &d + d.square() - d.scale(&int(10)) + TReal::from(9);
        assert!(rel.is_zero());
        assert_eq!(phi(p("B"), p("D")).unwrap(), c.scale(&int(4)));
        assert_eq!(phi(p("A"), p("C")).unwrap(), d.scale(&int(4)));
        assert_eq!(phi(p("A"), p("E")).unwrap(), TReal::from(16) - c.scale(&int(3)));
        // translated copy still works
        let moved = kempe_config(&mut ctx, &pt(5, -2)).unwrap();
        assert!(kempe_perpendicularity(&moved).unwrap().is_zero());
    }

    #[test]
    fn interpolation_at_half_and_third() {
        let mut ctx = TowerCtx::new();
        let (r, cfg) = interpolation_config(&mut ctx, &pt(0, 0), &pt(3, 0), &rat(1, 2)).unwrap();
        assert_eq!(r, int(4));
        assert_eq!(cfg.get("C").unwrap(), &PointN::rat2(rat(3, 2), int(0)));
        let (r, _) = interpolation_config(&mut ctx, &pt(0, 0), &pt(1, 1), &rat(1, 3)).unwrap();
        assert!(&r * &r > int(2) && &r * &r * rat(1, 9) < int(2));
        assert!(interpolation_config(&mut ctx, &pt(0, 0), &pt(1, 0), &int(1)).is_err());
    }

    #[test]
    fn rhombus_chain_three_steps() {
        let mut ctx = TowerCtx::new();
        let (a, b) = (pt(0, 0), pt(5, 0));
        let (c, d) = (pt(0, 2), pt(5, 2));
        let cfg = rhombus_chain(&mut ctx, &a, &b, &c, &d, &int(2)).unwrap();
        assert_eq!(cfg.points.len(), 8);
        assert_eq!(cfg.get("A3").unwrap(), &b);
        assert_eq!(cfg.get("C3").unwrap(), &d);
        assert!(rhombus_chain(&mut ctx, &a, &b, &c, &pt(5, 3), &int(2)).is_err());
    }

    #[test]
    fn parallelogram_cases() {
        let mut ctx = TowerCtx::new();
        let cfg = parallelogram_transfer(&mut ctx, &pt(0, 0), &pt(1, 3), &pt(4, 0), &pt(5, 3)).unwrap();
        let e = cfg.get("E").unwrap();
        let f = cfg.get("F").unwrap();
        assert_eq!(f.sub(e).unwrap(), pt(1, 3));
        let degenerate = parallelogram_transfer(&mut ctx, &pt(0, 0), &pt(0, 0), &pt(1, 1), &pt(1, 1)).unwrap();
        assert_eq!(degenerate.get("E").unwrap(), &pt(0, 0));
    }
}
