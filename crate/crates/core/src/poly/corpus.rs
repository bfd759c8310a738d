//! The determinant identity corpus: bordered squared-distance matrices whose
//! expansions must equal a stated closed form times a pinned constant.

use serde::Deserialize;

use super::{det_symbolic, parse_poly, MPoly};
use crate::cayley_menger::bordered;
use crate::error::{Error, Result};
use crate::number::{int, parse_rat, Rat};

const CORPUS: &str = include_str!("../../data/identities.json");

#[derive(Deserialize)]
struct RawIdentity {
    name: String,
    description: String,
    body: Vec<Vec<String>>,
    expected: String,
    multiplier: String,
}

#[derive(Clone, Debug)]
pub struct Identity {
    pub name: String,
    pub description: String,
    /// Squared-distance body; the determinant is taken of its bordered form.
    pub body: Vec<Vec<MPoly>>,
    pub expected: MPoly,
    /// Source form of `expected`, kept for reporting.
    pub expected_text: String,
    pub multiplier: Rat,
}

impl Identity {
    pub fn matrix(&self) -> Vec<Vec<MPoly>> {
        bordered(&self.body)
    }

    pub fn check(&self) -> Result<IdentityReport> {
        let computed = det_symbolic(&self.matrix())?;
        let target = self.expected.scale(&self.multiplier);
        Ok(IdentityReport {
            name: self.name.clone(),
            expected: self.expected_text.clone(),
            ok: computed == target,
            computed,
        })
    }
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub name: String,
    pub expected: String,
    pub computed: MPoly,
    pub ok: bool,
}

pub fn identity_corpus() -> Result<Vec<Identity>> {
    let raw: Vec<RawIdentity> = serde_json::from_str(CORPUS)
        .map_err(|e| Error::parse("identity corpus", e.to_string()))?;
    raw.into_iter()
        .map(|r| {
            let body = r
                .body
                .iter()
                .map(|row| row.iter().map(|s| parse_poly(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(Identity {
                expected: parse_poly(&r.expected)?,
                expected_text: r.expected,
                multiplier: parse_rat(&r.multiplier)?,
                name: r.name,
                description: r.description,
                body,
            })
        })
        .collect()
}

/// Runs every corpus identity.
pub fn run_corpus() -> Result<Vec<IdentityReport>> {
    identity_corpus()?.iter().map(Identity::check).collect()
}

/// Symbolic check, for generic points in dimension `n`, that the squared
/// coordinate determinant equals `(-1)^(n+1) / 2^n` times the Cayley-Menger
/// determinant.
pub fn volume_identity_symbolic(n: usize) -> Result<bool> {
    if !(1..=3).contains(&n) {
        return Err(Error::domain(format!("symbolic volume identity supports n = 1..3, got {n}")));
    }
    let pts: Vec<Vec<MPoly>> = (0..=n)
        .map(|i| (0..n).map(|j| MPoly::var(&format!("x{i}_{j}"))).collect())
        .collect();
    let coord: Vec<Vec<MPoly>> = pts
        .iter()
        .map(|p| {
            let mut row = p.clone();
            row.push(MPoly::constant(int(1)));
            row
        })
        .collect();
    let vol = det_symbolic(&coord)?;
    let body: Vec<Vec<MPoly>> = pts
        .iter()
        .map(|p| {
            pts.iter()
                .map(|q| {
                    p.iter().zip(q).fold(MPoly::zero(), |acc, (a, b)| {
                        let diff = a - b;
                        &acc + &(&diff * &diff)
                    })
                })
                .collect()
        })
        .collect();
    let delta = det_symbolic(&bordered(&body))?;
    let sign = if n % 2 == 1 { 1 } else { -1 };
    let factor = Rat::new(sign.into(), num_bigint::BigInt::from(1) << n);
    Ok(&vol * &vol == delta.scale(&factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    #[test]
    fn corpus_parses_and_holds() {
        let reports = run_corpus().unwrap();
        assert_eq!(reports.len(), 8);
        for r in reports {
            assert!(r.ok, "{} expanded to {}", r.name, r.computed);
        }
    }

    #[test]
    fn symbolic_matches_numeric_under_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for id in identity_corpus().unwrap() {
            let sym = det_symbolic(&id.matrix()).unwrap();
            let vars = ["a", "b", "c", "d", "e", "t"];
            for _ in 0..100 {
                let env: BTreeMap<String, Rat> = vars
                    .iter()
                    .map(|v| (v.to_string(), rat(rng.gen_range(-20..=20), rng.gen_range(1..=9))))
                    .collect();
                let numeric: Vec<Vec<Rat>> = id
                    .matrix()
                    .iter()
                    .map(|row| row.iter().map(|p| p.eval_rat(&env).unwrap()).collect())
                    .collect();
                let det = crate::ring::det_gauss(&numeric).unwrap();
                assert_eq!(sym.eval_rat(&env).unwrap(), det, "{}", id.name);
            }
        }
    }

    #[test]
    fn volume_identity_in_the_plane() {
        assert!(volume_identity_symbolic(1).unwrap());
        assert!(volume_identity_symbolic(2).unwrap());
    }
}
