use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::{Rule, TraceEntry, UnitGraph};
use crate::cayley_menger::cm_det_rat;
use crate::error::{Error, Result};
use crate::number::{int, rat_sqrt, rat_to_string, Rat};
use crate::poly::MPoly;

/// Relations consulted per unknown pair before giving up on the rest.
const MAX_RELATIONS: usize = 24;

/// Completed 4-point relations re-checked when a pair becomes known.
const MAX_CHECKS: usize = 48;

/// Outcome of one Cayley-Menger relation in a single unknown squared distance.
#[derive(Clone, Debug, PartialEq)]
pub struct CmStep {
    /// The unknown pair, as class representatives.
    pub pair: (usize, usize),
    /// Coefficients of `c0 + c1 t + c2 t^2`.
    pub coeffs: [Rat; 3],
    /// Rational roots, ascending. Empty for the zero polynomial.
    pub roots: Vec<Rat>,
    /// True when the polynomial has roots but none of them is rational.
    pub irrational: bool,
}

impl CmStep {
    pub fn polynomial(&self) -> MPoly {
        let t = MPoly::var("t");
        let [c0, c1, c2] = &self.coeffs;
        &(&MPoly::constant(c0.clone()) + &t.scale(c1)) + &(&t * &t).scale(c2)
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// A nonzero constant: no value satisfies the relation.
    pub fn is_inconsistent(&self) -> bool {
        self.coeffs[1].is_zero() && self.coeffs[2].is_zero() && !self.coeffs[0].is_zero()
    }
}

/// Result of [`PropState::zero_collapse`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Collapse {
    Merged { anchors: [usize; 3] },
    AlreadyIdentified,
    NoAnchors,
    Contradiction(String),
}

/// Known squared distances between classes of identified points.
#[derive(Clone, Debug)]
pub struct PropState {
    parent: Vec<usize>,
    adj: Vec<BTreeMap<usize, Rat>>,
    pending: BTreeMap<(usize, usize), Vec<Rat>>,
    dirty: BTreeSet<(usize, usize)>,
    zeros: BTreeSet<(usize, usize)>,
    /// Collinear triples `x - z = lambda (w - z)`, grouped by `(z, lambda)`.
    collinear: BTreeMap<(usize, Rat), BTreeSet<(usize, usize)>>,
    ratio_dirty: bool,
    contradiction: Option<String>,
    pub(crate) trace: Vec<TraceEntry>,
    pub(crate) branch: usize,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn quadratic_roots(c0: &Rat, c1: &Rat, c2: &Rat) -> (Vec<Rat>, bool) {
    if c2.is_zero() {
        if c1.is_zero() {
            return (Vec::new(), false);
        }
        return (vec![-c0 / c1], false);
    }
    let disc = c1 * c1 - int(4) * c2 * c0;
    if disc.is_negative() {
        return (Vec::new(), true);
    }
    match rat_sqrt(&disc) {
        Some(s) => {
            let two_a = int(2) * c2;
            let mut r = vec![(-c1 - &s) / &two_a, (-c1 + &s) / &two_a];
            r.sort();
            r.dedup();
            (r, false)
        }
        None => (Vec::new(), true),
    }
}

impl PropState {
    /// Unit edges with value 1; nothing else is known.
    pub fn seed(g: &UnitGraph) -> PropState {
        let n = g.len();
        let mut s = PropState {
            parent: (0..n).collect(),
            adj: vec![BTreeMap::new(); n],
            pending: BTreeMap::new(),
            dirty: BTreeSet::new(),
            zeros: BTreeSet::new(),
            collinear: BTreeMap::new(),
            ratio_dirty: false,
            contradiction: None,
            trace: Vec::new(),
            branch: 0,
        };
        for &(u, v) in g.edges() {
            s.adj[u].insert(v, Rat::one());
            s.adj[v].insert(u, Rat::one());
        }
        for &(u, v) in g.edges() {
            s.touch(u, v);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&self, mut u: usize) -> usize {
        while self.parent[u] != u {
            u = self.parent[u];
        }
        u
    }

    pub fn identified(&self, u: usize, v: usize) -> bool {
        self.find(u) == self.find(v)
    }

    /// The known squared distance between the classes of `u` and `v`.
    pub fn known(&self, u: usize, v: usize) -> Option<Rat> {
        let (u, v) = (self.find(u), self.find(v));
        if u == v {
            return Some(Rat::zero());
        }
        self.adj[u].get(&v).cloned()
    }

    /// Number of known pairs between distinct classes.
    pub fn num_known(&self) -> usize {
        self.adj.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn contradiction(&self) -> Option<&str> {
        self.contradiction.as_deref()
    }

    /// Unknown pairs with several surviving rational candidates.
    pub fn pending(&self) -> &BTreeMap<(usize, usize), Vec<Rat>> {
        &self.pending
    }

    pub(crate) fn log(&mut self, rule: Rule, points: Vec<usize>, polynomial: Option<String>, values: Vec<Rat>, note: impl Into<String>) {
        self.trace.push(TraceEntry {
            branch: self.branch,
            rule,
            points,
            polynomial,
            values,
            note: note.into(),
        });
    }

    pub(crate) fn fail(&mut self, points: Vec<usize>, note: String) {
        if self.contradiction.is_none() {
            self.log(Rule::Contradiction, points, None, Vec::new(), note.clone());
            self.contradiction = Some(note);
        }
    }

    fn common(&self, u: usize, v: usize) -> Vec<usize> {
        let (a, b) = (&self.adj[u], &self.adj[v]);
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        small.keys().filter(|w| large.contains_key(w)).copied().collect()
    }

    /// Queues every unknown pair that may gain a relation from `(u, v)`.
    fn touch(&mut self, u: usize, v: usize) {
        for (x, y) in [(u, v), (v, u)] {
            let ws: Vec<usize> = self.adj[y].keys().copied().collect();
            for w in ws {
                if w != x && !self.adj[x].contains_key(&w) {
                    self.dirty.insert(ordered(x, w));
                }
            }
        }
        let c = self.common(u, v);
        for (i, &p) in c.iter().enumerate() {
            for &q in &c[i + 1..] {
                if !self.adj[p].contains_key(&q) {
                    self.dirty.insert((p, q));
                }
            }
        }
    }

    fn det(&self, ids: &[usize], unknown: (usize, usize), t: &Rat) -> Rat {
        cm_det_rat(&self.body(ids, unknown, t))
    }

    fn body(&self, ids: &[usize], unknown: (usize, usize), t: &Rat) -> Vec<Vec<Rat>> {
        let n = ids.len();
        let mut body = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = if ordered(ids[i], ids[j]) == unknown {
                    t.clone()
                } else {
                    self.adj[ids[i]][&ids[j]].clone()
                };
                body[i][j] = v.clone();
                body[j][i] = v;
            }
        }
        body
    }

    fn relation(&self, ids: &[usize], unknown: (usize, usize)) -> CmStep {
        let eval = |t: i64| self.det(ids, unknown, &int(t));
        let (d0, d1, dm) = (eval(0), eval(1), eval(-1));
        let two = int(2);
        let c2 = (&d1 + &dm) / &two - &d0;
        let c1 = (&d1 - &dm) / &two;
        let (roots, irrational) = quadratic_roots(&d0, &c1, &c2);
        CmStep {
            pair: unknown,
            coeffs: [d0, c1, c2],
            roots,
            irrational,
        }
    }

    /// Solves the vanishing Cayley-Menger relation of 4 or 5 points with
    /// exactly one unknown pair.
    pub fn cm_step(&self, ids: &[usize]) -> Result<CmStep> {
        if !(4..=5).contains(&ids.len()) {
            return Err(Error::domain(format!("relation needs 4 or 5 points, got {}", ids.len())));
        }
        let reps: Vec<usize> = ids.iter().map(|&i| self.find(i)).collect();
        let mut unknown = Vec::new();
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                if reps[i] == reps[j] {
                    return Err(Error::domain("points are identified"));
                }
                if !self.adj[reps[i]].contains_key(&reps[j]) {
                    unknown.push(ordered(reps[i], reps[j]));
                }
            }
        }
        match unknown.as_slice() {
            [pair] => Ok(self.relation(&reps, *pair)),
            [] => Err(Error::domain("every pair is already known")),
            _ => Err(Error::domain(format!("{} unknown pairs, need exactly one", unknown.len()))),
        }
    }

    /// Records a squared distance, checking every 4-point relation it completes.
    pub(crate) fn set_known(&mut self, u: usize, v: usize, val: Rat, why: &str) {
        if self.contradiction.is_some() {
            return;
        }
        let (u, v) = (self.find(u), self.find(v));
        if u == v {
            if !val.is_zero() {
                self.fail(vec![u, v], format!("identified points given squared distance {}", rat_to_string(&val)));
            }
            return;
        }
        if let Some(old) = self.adj[u].get(&v) {
            if *old != val {
                let note = format!("{why} gives {} but {} is known", rat_to_string(&val), rat_to_string(old));
                self.fail(vec![u, v], note);
            }
            return;
        }
        self.adj[u].insert(v, val.clone());
        self.adj[v].insert(u, val.clone());
        self.ratio_dirty = true;
        self.pending.remove(&ordered(u, v));
        self.dirty.remove(&ordered(u, v));
        if val.is_zero() {
            self.zeros.insert(ordered(u, v));
        }
        let c = self.common(u, v);
        let mut checks = 0;
        'check: for (i, &a) in c.iter().enumerate() {
            for &b in &c[i + 1..] {
                if self.adj[a].contains_key(&b) {
                    let d = self.det(&[u, v, a, b], (usize::MAX, usize::MAX), &Rat::zero());
                    if !d.is_zero() {
                        let note = format!("{why}: relation on {{{u},{v},{a},{b}}} evaluates to {}", rat_to_string(&d));
                        self.fail(vec![u, v, a, b], note);
                        return;
                    }
                    checks += 1;
                    if checks >= MAX_CHECKS {
                        break 'check;
                    }
                }
            }
        }
        if rat_sqrt(&val).is_some_and(|r| !r.is_zero()) {
            for &w in &c {
                self.index_triple(u, v, w);
            }
        }
        self.touch(u, v);
    }

    /// Records every collinear reading of the triangle `{p, q, r}`, all of
    /// whose sides are known.
    fn index_triple(&mut self, p: usize, q: usize, r: usize) {
        let side = |s: &Self, a: usize, b: usize| rat_sqrt(&s.adj[a][&b]).filter(|x| !x.is_zero());
        let (Some(pq), Some(pr), Some(qr)) = (side(self, p, q), side(self, p, r), side(self, q, r)) else {
            return;
        };
        // (z, x, w, |zx|, |zw|, |xw|)
        let readings = [
            (p, q, r, &pq, &pr, &qr),
            (p, r, q, &pr, &pq, &qr),
            (q, p, r, &pq, &qr, &pr),
            (q, r, p, &qr, &pq, &pr),
            (r, p, q, &pr, &qr, &pq),
            (r, q, p, &qr, &pr, &pq),
        ];
        for (z, x, w, a, c, b) in readings {
            for lambda in [a / c, -(a / c)] {
                let rest = (Rat::one() - &lambda) * c;
                if rest.abs() == *b {
                    if self.collinear.entry((z, lambda)).or_default().insert((x, w)) {
                        self.ratio_dirty = true;
                    }
                }
            }
        }
    }

    /// Intersects the rational root sets of all relations on an unknown pair.
    fn solve(&mut self, u: usize, v: usize) -> bool {
        if self.find(u) != u || self.find(v) != v || u == v || self.adj[u].contains_key(&v) {
            return false;
        }
        let c = self.common(u, v);
        let mut rels = Vec::new();
        'four: for (i, &a) in c.iter().enumerate() {
            for &b in &c[i + 1..] {
                if self.adj[a].contains_key(&b) {
                    rels.push(vec![u, v, a, b]);
                    if rels.len() >= MAX_RELATIONS {
                        break 'four;
                    }
                }
            }
        }
        if rels.is_empty() {
            'five: for (i, &a) in c.iter().enumerate() {
                for (j, &b) in c.iter().enumerate().skip(i + 1) {
                    if !self.adj[a].contains_key(&b) {
                        continue;
                    }
                    for &d in &c[j + 1..] {
                        if self.adj[a].contains_key(&d) && self.adj[b].contains_key(&d) {
                            rels.push(vec![u, v, a, b, d]);
                            if rels.len() >= MAX_RELATIONS {
                                break 'five;
                            }
                        }
                    }
                }
            }
        }
        let mut cands: Option<Vec<Rat>> = None;
        let mut irrational: Option<(Vec<usize>, CmStep)> = None;
        let mut first: Option<(Vec<usize>, CmStep)> = None;
        for ids in rels {
            let r = self.relation(&ids, ordered(u, v));
            if r.is_trivial() {
                continue;
            }
            if r.is_inconsistent() {
                let note = format!("relation {} has no solution", r.polynomial());
                self.fail(ids, note);
                return true;
            }
            if r.irrational {
                irrational.get_or_insert((ids, r));
                continue;
            }
            cands = Some(match cands {
                None => r.roots.clone(),
                Some(prev) => prev.into_iter().filter(|x| r.roots.contains(x)).collect(),
            });
            first.get_or_insert((ids, r));
        }
        let Some(cands) = cands else {
            if let Some((ids, r)) = irrational {
                if !self.pending.contains_key(&ordered(u, v)) {
                    self.log(Rule::Irrational, ids, Some(r.polynomial().to_string()), Vec::new(), "no rational root; pair left unknown");
                }
            }
            return false;
        };
        let (ids, r) = first.expect("candidates come from a relation");
        let poly = Some(r.polynomial().to_string());
        let rule = if ids.len() == 4 { Rule::Cm4 } else { Rule::Cm5 };
        if let Some((iids, ir)) = irrational {
            let note = format!("rational candidates conflict with {} (irrational roots only)", ir.polynomial());
            self.fail(iids, note);
            return true;
        }
        match cands.len() {
            0 => {
                self.log(rule, ids.clone(), poly, Vec::new(), "relations share no rational root");
                self.fail(ids, format!("no common candidate for pair {u}-{v}"));
                true
            }
            1 => {
                self.log(rule, ids, poly, cands.clone(), format!("pair {u}-{v} forced"));
                self.set_known(u, v, cands[0].clone(), "relation");
                true
            }
            _ => {
                let key = ordered(u, v);
                if self.pending.get(&key) != Some(&cands) {
                    self.log(rule, ids, poly, cands.clone(), format!("pair {u}-{v} has candidates"));
                    self.pending.insert(key, cands);
                }
                false
            }
        }
    }

    fn three_independent(&self, a: usize, b: usize, c: usize) -> bool {
        let (Some(ab), Some(ac), Some(bc)) = (self.adj[a].get(&b), self.adj[a].get(&c), self.adj[b].get(&c)) else {
            return false;
        };
        let z = Rat::zero();
        let body = vec![
            vec![z.clone(), ab.clone(), ac.clone()],
            vec![ab.clone(), z.clone(), bc.clone()],
            vec![ac.clone(), bc.clone(), z],
        ];
        !cm_det_rat(&body).is_zero()
    }

    /// Identifies `u` and `v` (known squared distance 0) when three
    /// affinely independent anchors are equidistant from both.
    pub fn zero_collapse(&mut self, u: usize, v: usize) -> Collapse {
        let (u, v) = (self.find(u), self.find(v));
        if u == v {
            return Collapse::AlreadyIdentified;
        }
        if self.adj[u].get(&v).is_none_or(|x| !x.is_zero()) {
            return Collapse::NoAnchors;
        }
        // u itself is an anchor: phi(u,u) = 0 = phi(v,u)
        let mut eq: Vec<usize> = vec![u];
        eq.extend(self.common(u, v).into_iter().filter(|w| *w != u && self.adj[u][w] == self.adj[v][w]));
        let mut anchors = None;
        'search: for i in 0..eq.len() {
            for j in i + 1..eq.len() {
                for k in j + 1..eq.len() {
                    if self.three_independent(eq[i], eq[j], eq[k]) {
                        anchors = Some([eq[i], eq[j], eq[k]]);
                        break 'search;
                    }
                }
            }
        }
        let Some(anchors) = anchors else {
            return Collapse::NoAnchors;
        };
        self.log(Rule::ZeroCollapse, vec![u, v, anchors[0], anchors[1], anchors[2]], None, Vec::new(), format!("identify {u} and {v}"));
        self.merge(u, v);
        match &self.contradiction {
            Some(c) => Collapse::Contradiction(c.clone()),
            None => Collapse::Merged { anchors },
        }
    }

    fn merge(&mut self, u: usize, v: usize) {
        let (r, o) = (u.min(v), u.max(v));
        self.parent[o] = r;
        let moved = std::mem::take(&mut self.adj[o]);
        for w in moved.keys() {
            self.adj[*w].remove(&o);
        }
        self.adj[r].remove(&o);
        self.zeros.remove(&(r, o));
        let remap = |s: &Self, p: (usize, usize)| {
            let (a, b) = (s.find(p.0), s.find(p.1));
            (a != b).then(|| ordered(a, b))
        };
        let dirty = std::mem::take(&mut self.dirty);
        self.dirty = dirty.into_iter().filter_map(|p| remap(self, p)).collect();
        let zeros = std::mem::take(&mut self.zeros);
        self.zeros = zeros.into_iter().filter_map(|p| remap(self, p)).collect();
        let collinear = std::mem::take(&mut self.collinear);
        for ((z, lambda), members) in collinear {
            let z = self.find(z);
            for (x, w) in members {
                let (x, w) = (self.find(x), self.find(w));
                if x != z && w != z && x != w {
                    self.collinear.entry((z, lambda.clone())).or_default().insert((x, w));
                }
            }
        }
        self.ratio_dirty = true;
        let pending = std::mem::take(&mut self.pending);
        let requeue: Vec<_> = pending.into_keys().filter_map(|p| remap(self, p)).collect();
        self.dirty.extend(requeue);
        for (w, val) in moved {
            if w != r {
                self.set_known(r, w, val, "identification");
            }
        }
        let ws: Vec<usize> = self.adj[r].keys().copied().collect();
        for w in ws {
            self.touch(r, w);
        }
    }

    /// Equal-ratio transfer: if `x - z = l (w - z)` and `x' - z = l (w' - z)`
    /// then `phi(x, x') = l^2 phi(w, w')`.
    pub(crate) fn ratio_transfer(&mut self) -> bool {
        let mut progress = false;
        if !std::mem::take(&mut self.ratio_dirty) {
            return false;
        }
        let groups: Vec<((usize, Rat), Vec<(usize, usize)>)> = self
            .collinear
            .iter()
            .filter(|(_, m)| m.len() > 1)
            .map(|(k, m)| (k.clone(), m.iter().copied().collect()))
            .collect();
        for ((z, lambda), members) in groups {
            let l2 = &lambda * &lambda;
            for (i, (x, w)) in members.iter().enumerate() {
                for (x2, w2) in &members[i + 1..] {
                    if self.contradiction.is_some() {
                        return true;
                    }
                    if x == x2 {
                        continue;
                    }
                    let (xx, ww) = (self.known(*x, *x2), self.known(*w, *w2));
                    let pts = vec![z, *x, *w, *x2, *w2];
                    match (xx, ww) {
                        (None, Some(ww)) => {
                            let val = &l2 * &ww;
                            self.log(Rule::RatioTransfer, pts, None, vec![val.clone()], format!("ratio {} about {z}", rat_to_string(&lambda)));
                            self.set_known(*x, *x2, val, "ratio transfer");
                            progress = true;
                        }
                        (Some(xx), None) => {
                            let val = &xx / &l2;
                            self.log(Rule::RatioTransfer, pts, None, vec![val.clone()], format!("ratio {} about {z}", rat_to_string(&lambda)));
                            self.set_known(*w, *w2, val, "ratio transfer");
                            progress = true;
                        }
                        (Some(xx), Some(ww)) if xx != &l2 * &ww => {
                            self.fail(pts, format!("ratio {} about {z} is violated", rat_to_string(&lambda)));
                            return true;
                        }
                        _ => {}
                    }
                }
            }
        }
        progress
    }

    /// Applies relations, identifications and ratio transfer until nothing changes.
    pub fn saturate(&mut self) {
        if self.contradiction.is_some() {
            return;
        }
        loop {
            while let Some(p) = self.dirty.pop_first() {
                self.solve(p.0, p.1);
                if self.contradiction.is_some() {
                    return;
                }
            }
            let mut progress = false;
            for (u, v) in self.zeros.clone() {
                if !self.zeros.contains(&(u, v)) {
                    continue;
                }
                match self.zero_collapse(u, v) {
                    Collapse::Merged { .. } => progress = true,
                    Collapse::Contradiction(_) => return,
                    Collapse::AlreadyIdentified => {
                        self.zeros.remove(&(u, v));
                    }
                    Collapse::NoAnchors => {}
                }
            }
            if !progress && self.dirty.is_empty() {
                progress = self.ratio_transfer();
                if self.contradiction.is_some() {
                    return;
                }
            }
            if !progress && self.dirty.is_empty() {
                return;
            }
        }
    }
}
