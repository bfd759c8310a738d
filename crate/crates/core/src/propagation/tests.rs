use super::*;
use crate::gadgets::{Compiler, Strategy};
use crate::number::{int, rat};

fn flat_graph(strategy: Strategy, d2: Rat) -> (UnitGraph, (usize, usize)) {
    let mut c = Compiler::new(strategy);
    let w = c.compile(&d2).unwrap();
    let f = c.flatten(&w, 100_000).unwrap();
    (f.unit_graph(), (f.target.0, f.target.1))
}

fn divide_graph() -> (UnitGraph, (usize, usize)) {
    let mut c = Compiler::new(Strategy::Default);
    let plan = crate::gadgets::Plan::DivideK {
        d2: int(1),
        k: 2.into(),
        e: 1.into(),
    };
    let w = c.compile_plan(&plan).unwrap();
    let f = c.flatten(&w, 100_000).unwrap();
    (f.unit_graph(), (f.target.0, f.target.1))
}

fn certify(strategy: Strategy, d2: Rat) -> ForcedResult {
    let (g, t) = flat_graph(strategy, d2);
    run(&g, t, Limits::default())
}

fn equilateral_pair() -> UnitGraph {
    // x=0, y=1, p1=2, p2=3: x and y both adjacent to p1, p2
    UnitGraph::new(4, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
}

#[test]
fn seed_knows_only_unit_edges() {
    let s = PropState::seed(&UnitGraph::new(2, [(0, 1)]));
    assert_eq!(s.num_known(), 1);
    assert_eq!(s.known(0, 1), Some(int(1)));
    let (g, _) = flat_graph(Strategy::Sqrt3Peephole, int(3));
    assert_eq!(PropState::seed(&g).num_known(), g.edges().len());
    assert!(PropState::seed(&UnitGraph::default()).is_empty());
}

#[test]
fn cm_step_two_triangles() {
    let s = PropState::seed(&equilateral_pair());
    let r = s.cm_step(&[0, 2, 3, 1]).unwrap();
    assert_eq!(r.roots, vec![int(0), int(3)]);
    assert_eq!(r.polynomial().to_string(), "-2*t^2 + 6*t");
    assert!(s.cm_step(&[0, 1, 2]).is_err());
    assert!(s.cm_step(&[0, 1, 2, 3, 3]).is_err());
}

#[test]
fn cm_step_not_applicable() {
    let s = PropState::seed(&UnitGraph::new(4, [(0, 1), (1, 2)]));
    assert!(s.cm_step(&[0, 1, 2, 3]).is_err());
    let k4 = PropState::seed(&UnitGraph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]));
    assert!(k4.cm_step(&[0, 1, 2, 3]).is_err());
}

#[test]
fn cm_step_pythagorean_quad() {
    // x, y at unknown t; p1, p2 at b^2 = 1 from x, a^2 = 4 from y, p1p2 = 4
    let mut s = PropState::seed(&UnitGraph::new(4, [(0, 2), (0, 3)]));
    s.set_known(1, 2, int(4), "test");
    s.set_known(1, 3, int(4), "test");
    s.set_known(2, 3, int(4), "test");
    let r = s.cm_step(&[0, 1, 2, 3]).unwrap();
    assert_eq!(r.roots, vec![int(3)]);
    assert_eq!(r.polynomial(), crate::poly::parse_poly("-8*(t - 3)^2").unwrap());
}

#[test]
fn cm_step_five_points_double_root() {
    // x, three unit neighbours forming a rhombus chain, and y
    // x=0, y=1, p1=2, p2=3, p3=4 with |x p3|^2 = |y p2|^2 = 3
    let mut s = PropState::seed(&UnitGraph::new(5, [(0, 2), (1, 2), (0, 3), (2, 3), (3, 4), (2, 4), (1, 4)]));
    s.set_known(1, 3, int(3), "test");
    s.set_known(0, 4, int(3), "test");
    let r = s.cm_step(&[0, 1, 2, 3, 4]).unwrap();
    assert_eq!(r.roots, vec![int(4)]);
    assert_eq!(r.coeffs[0], int(48));
}

#[test]
fn zero_collapse_cases() {
    let mut s = PropState::seed(&equilateral_pair());
    assert_eq!(s.zero_collapse(0, 1), Collapse::NoAnchors);
    s.set_known(0, 1, int(0), "test");
    assert!(matches!(s.zero_collapse(0, 1), Collapse::Merged { .. }));
    assert!(s.identified(0, 1));
    assert_eq!(s.zero_collapse(0, 1), Collapse::AlreadyIdentified);
    assert_eq!(s.known(1, 2), Some(int(1)));

    // only two anchors: a path x - c - y plus zero distance
    let mut s = PropState::seed(&UnitGraph::new(3, [(0, 2), (1, 2)]));
    s.set_known(0, 1, int(0), "test");
    assert_eq!(s.zero_collapse(0, 1), Collapse::NoAnchors);
}

#[test]
fn zero_collapse_detects_conflict() {
    // y has an extra neighbour 4 at distance 1 that x sees at 3
    let mut s = PropState::seed(&UnitGraph::new(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (1, 4)]));
    s.set_known(0, 4, int(3), "test");
    s.set_known(0, 1, int(0), "test");
    assert!(matches!(s.zero_collapse(0, 1), Collapse::Contradiction(_)));
}

#[test]
fn rhombus_is_ambiguous() {
    let g = UnitGraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
    let r = run(&g, (0, 2), Limits::default());
    assert_eq!(
        r.outcome,
        Outcome::Ambiguous {
            values: BTreeSet::new(),
            undetermined: true
        }
    );
}

#[test]
fn sqrt3_gadget_forces_three() {
    let r = certify(Strategy::Sqrt3Peephole, int(3));
    assert_eq!(r.outcome, Outcome::Forced(int(3)));
    assert!(r.used_zero_collapse());
}

#[test]
fn doubling_gadget_forces_four() {
    assert_eq!(certify(Strategy::Default, int(4)).outcome, Outcome::Forced(int(4)));
}

#[test]
fn pythagorean_gadget_forces_three() {
    let r = certify(Strategy::Default, int(3));
    assert_eq!(r.outcome, Outcome::Forced(int(3)));
}

#[test]
fn divide_gadget_forces_quarter() {
    let (g, t) = divide_graph();
    let r = run(&g, t, Limits::default());
    assert_eq!(r.outcome, Outcome::Forced(rat(1, 4)));
}

#[test]
fn ratio_transfer_halves() {
    // z=0; x=1, y=2 are midpoints of z-x~ (3) and z-y~ (4)
    let mut s = PropState::seed(&UnitGraph::new(5, [(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)]));
    s.set_known(0, 3, int(4), "test");
    s.set_known(0, 4, int(4), "test");
    assert!(s.ratio_transfer());
    assert_eq!(s.known(1, 2), Some(rat(1, 4)));
    assert!(s.trace.iter().any(|e| e.rule == Rule::RatioTransfer));
}

#[test]
fn oracle_agrees_with_construction() {
    for strategy in [Strategy::Default, Strategy::Sqrt3Peephole] {
        for d2 in [int(1), int(3), int(4), rat(1, 4), int(7), int(12), rat(3, 4)] {
            let mut c = Compiler::new(strategy);
            let w = c.compile(&d2).unwrap();
            let Ok(f) = c.flatten(&w, 2_000) else { continue };
            let r = run(&f.unit_graph(), (f.target.0, f.target.1), Limits::default());
            match r.outcome {
                Outcome::Forced(v) => assert_eq!(v, d2, "{strategy} {d2}"),
                Outcome::Capped { .. } => {}
                other => panic!("{strategy} {d2}: {other}"),
            }
        }
    }
}

#[test]
fn tiny_cap_reports_capped() {
    let (g, t) = flat_graph(Strategy::Sqrt3Peephole, int(3));
    let r = run(&g, t, Limits { max_branches: 1 });
    assert!(matches!(r.outcome, Outcome::Capped { .. }));
}

#[test]
fn trace_serialises() {
    let r = certify(Strategy::Sqrt3Peephole, int(3));
    let j = r.to_json();
    assert_eq!(j["outcome"]["kind"], "forced");
    assert_eq!(j["outcome"]["value"], "3/1");
    assert!(j["trace"].as_array().unwrap().iter().any(|e| e["rule"] == "zero-collapse"));
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn extra_edges_never_change_a_forced_value(extra in proptest::collection::vec((0usize..64, 0usize..64), 0..4)) {
            let (mut g, t) = flat_graph(crate::gadgets::Strategy::Default, int(4));
            let n = g.len();
            for (u, v) in extra {
                g = g.with_edge(u % n, v % n);
            }
            let r = run(&g, t, Limits::default());
            if let Outcome::Forced(v) = r.outcome {
                prop_assert_eq!(v, int(4));
            }
        }
    }
}


