//! Rigidity oracle working from unit edges alone: Cayley-Menger relations on
//! 4- and 5-point subsets, depth-first branching over rational roots, point
//! identification at squared distance zero, and equal-ratio transfer along
//! collinear triples.

mod state;

pub use state::{CmStep, Collapse, PropState};

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::number::{rat_to_string, Rat};

/// Branch nodes explored before the search gives up.
pub const DEFAULT_MAX_BRANCHES: usize = 10_000;

/// Points `0..n` and their unit edges; the only input the oracle sees.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnitGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl UnitGraph {
    /// Loops are dropped, duplicates merged, endpoints must be `< n`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> UnitGraph {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| {
                assert!(u < n && v < n, "edge {u}-{v} out of range for {n} points");
                (u.min(v), u.max(v))
            })
            .collect();
        UnitGraph {
            n,
            edges: set.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn with_edge(&self, u: usize, v: usize) -> UnitGraph {
        UnitGraph::new(self.n, self.edges.iter().copied().chain([(u, v)]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// A 4-point relation fixed or narrowed a pair.
    Cm4,
    /// A 5-point relation, used when no 4-point one exists.
    Cm5,
    /// A relation whose roots are all irrational.
    Irrational,
    ZeroCollapse,
    RatioTransfer,
    /// A pending pair settled by refuting all but one candidate.
    Probe,
    Branch,
    Contradiction,
    Leaf,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Cm4 => "cm4",
            Rule::Cm5 => "cm5",
            Rule::Irrational => "irrational",
            Rule::ZeroCollapse => "zero-collapse",
            Rule::RatioTransfer => "ratio-transfer",
            Rule::Probe => "probe",
            Rule::Branch => "branch",
            Rule::Contradiction => "contradiction",
            Rule::Leaf => "leaf",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub branch: usize,
    pub rule: Rule,
    pub points: Vec<usize>,
    pub polynomial: Option<String>,
    pub values: Vec<Rat>,
    pub note: String,
}

impl TraceEntry {
    pub fn to_json(&self) -> Value {
        json!({
            "branch": self.branch,
            "rule": self.rule.name(),
            "points": self.points,
            "polynomial": self.polynomial,
            "values": self.values.iter().map(rat_to_string).collect::<Vec<_>>(),
            "note": self.note,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Forced(Rat),
    /// Surviving branches disagree, or some leave the target unknown.
    Ambiguous { values: BTreeSet<Rat>, undetermined: bool },
    Contradiction,
    /// The branch budget ran out; nothing is claimed.
    Capped { branches: usize },
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Forced(v) => write!(f, "Forced({})", rat_to_string(v)),
            Outcome::Ambiguous { values, undetermined } => {
                let vs: Vec<String> = values.iter().map(rat_to_string).collect();
                write!(f, "Ambiguous({{{}}}{})", vs.join(", "), if *undetermined { ", undetermined" } else { "" })
            }
            Outcome::Contradiction => write!(f, "Contradiction"),
            Outcome::Capped { branches } => write!(f, "Capped(after {branches} branches)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ForcedResult {
    pub outcome: Outcome,
    pub trace: Vec<TraceEntry>,
    /// Branch nodes visited, the root included.
    pub branches: usize,
}

impl ForcedResult {
    pub fn to_json(&self) -> Value {
        let outcome = match &self.outcome {
            Outcome::Forced(v) => json!({"kind": "forced", "value": rat_to_string(v)}),
            Outcome::Ambiguous { values, undetermined } => json!({
                "kind": "ambiguous",
                "values": values.iter().map(rat_to_string).collect::<Vec<_>>(),
                "undetermined": undetermined,
            }),
            Outcome::Contradiction => json!({"kind": "contradiction"}),
            Outcome::Capped { branches } => json!({"kind": "capped", "branches": branches}),
        };
        json!({
            "outcome": outcome,
            "branches": self.branches,
            "trace": self.trace.iter().map(TraceEntry::to_json).collect::<Vec<_>>(),
        })
    }

    /// True if some branch was closed by identifying two points.
    pub fn used_zero_collapse(&self) -> bool {
        let collapsed: BTreeSet<usize> = self
            .trace
            .iter()
            .filter(|e| e.rule == Rule::ZeroCollapse)
            .map(|e| e.branch)
            .collect();
        self.trace
            .iter()
            .any(|e| e.rule == Rule::Contradiction && collapsed.contains(&e.branch))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_branches: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_branches: DEFAULT_MAX_BRANCHES,
        }
    }
}

/// Tries each candidate of each pending pair on a scratch copy; a pair with a
/// single surviving candidate is fixed without branching. Repeats until no
/// pair is settled this way or the budget runs out.
fn probe(s: &mut PropState, budget_used: &mut usize, budget: usize) {
    loop {
        let mut settled = false;
        let keys: Vec<(usize, usize)> = s.pending().keys().copied().collect();
        for (u, v) in keys {
            if s.contradiction().is_some() {
                return;
            }
            let Some(cands) = s.pending().get(&(u, v)).cloned() else { continue };
            if *budget_used + cands.len() > budget {
                return;
            }
            let mut alive = Vec::new();
            let mut refuted = Vec::new();
            for c in cands {
                let mut t = s.clone();
                t.trace = Vec::new();
                t.branch = *budget_used;
                *budget_used += 1;
                t.log(Rule::Probe, vec![u, v], None, vec![c.clone()], format!("lookahead from branch {}", s.branch));
                t.set_known(u, v, c.clone(), "probe");
                t.saturate();
                match t.contradiction() {
                    None => alive.push(c),
                    Some(_) => refuted.append(&mut t.trace),
                }
            }
            if alive.len() <= 1 {
                s.trace.append(&mut refuted);
            }
            if alive.len() <= 1 {
                let note = format!("pair {u}-{v}: other candidates refuted by lookahead");
                s.log(Rule::Probe, vec![u, v], None, alive.clone(), note);
                match alive.into_iter().next() {
                    Some(c) => s.set_known(u, v, c, "probe"),
                    None => s.fail(vec![u, v], format!("every candidate for pair {u}-{v} is refuted")),
                }
                s.saturate();
                settled = true;
            }
        }
        if !settled {
            return;
        }
    }
}

/// Searches for the squared distance of `target` forced by the unit edges.
///
/// A branch survives once no pair has several candidates left. Inside a
/// subtree whose target value is already fixed, the first surviving leaf
/// settles that value and the remaining siblings are skipped.
pub fn run(g: &UnitGraph, target: (usize, usize), limits: Limits) -> ForcedResult {
    assert!(target.0 < g.len() && target.1 < g.len(), "target out of range");
    struct Frame {
        state: PropState,
        pair: (usize, usize),
        cands: Vec<Rat>,
        next: usize,
        fixed: bool,
        survived: bool,
    }
    let mut trace = Vec::new();
    let mut values = BTreeSet::new();
    let mut undetermined = false;
    let mut branches = 1usize;
    let mut stack: Vec<Frame> = Vec::new();
    let mut node = Some(PropState::seed(g));
    loop {
        if let Some(mut s) = node.take() {
            s.saturate();
            probe(&mut s, &mut branches, limits.max_branches);
            trace.append(&mut s.trace);
            let known = s.known(target.0, target.1);
            let next = s.pending().iter().next().map(|(k, v)| (*k, v.clone()));
            let survived = if s.contradiction().is_some() {
                Some(false)
            } else if let Some((pair, cands)) = next {
                stack.push(Frame {
                    state: s,
                    pair,
                    cands,
                    next: 0,
                    fixed: known.is_some(),
                    survived: false,
                });
                None
            } else {
                match known {
                    Some(v) => {
                        s.log(Rule::Leaf, vec![target.0, target.1], None, vec![v.clone()], "target known");
                        values.insert(v);
                    }
                    None => {
                        s.log(Rule::Leaf, vec![target.0, target.1], None, Vec::new(), "target undetermined");
                        undetermined = true;
                    }
                }
                trace.append(&mut s.trace);
                Some(true)
            };
            if let (Some(ok), Some(top)) = (survived, stack.last_mut()) {
                top.survived |= ok;
            }
        }
        let Some(top) = stack.last_mut() else { break };
        if top.next < top.cands.len() && !(top.fixed && top.survived) {
            if branches >= limits.max_branches {
                return ForcedResult {
                    outcome: Outcome::Capped { branches },
                    trace,
                    branches,
                };
            }
            let c = top.cands[top.next].clone();
            top.next += 1;
            let mut child = top.state.clone();
            child.branch = branches;
            branches += 1;
            let (u, v) = top.pair;
            child.log(Rule::Branch, vec![u, v], None, vec![c.clone()], format!("from branch {}", top.state.branch));
            child.set_known(u, v, c, "branch choice");
            node = Some(child);
        } else {
            let done = stack.pop().expect("nonempty");
            if let Some(parent) = stack.last_mut() {
                parent.survived |= done.survived;
            }
        }
    }
    let outcome = if values.is_empty() && !undetermined {
        Outcome::Contradiction
    } else if values.len() == 1 && !undetermined {
        Outcome::Forced(values.into_iter().next().expect("one value"))
    } else {
        Outcome::Ambiguous { values, undetermined }
    };
    ForcedResult {
        outcome,
        trace,
        branches,
    }
}

#[cfg(test)]
mod tests;
