use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use transport_core::components::{cde_transportable, CdeVerdict};
use transport_core::error::{DiagramError, TransportError};
use transport_core::formula::Format;
use transport_core::oracle::*;
use transport_core::sid::{identify, Classification};
use transport_core::{examples, node_set, transport, validate_s_hedge, NodeSet, Query, SelectionDiagram, TransportResult};

fn xy() -> Query {
    Query::new(node_set(["X"]), node_set(["Y"])).unwrap()
}

fn formula(name: &str) -> (String, Classification) {
    match transport(&xy(), &examples::diagram(name).unwrap()).unwrap() {
        TransportResult::Formula { expr, classification } => (expr.to_string(), classification),
        TransportResult::Failure { .. } => panic!("{name} should be transportable"),
    }
}

#[test]
fn bundled_transportable_diagrams() {
    assert_eq!(formula("fig1a"), ("Σ_z P*(y|x,z) P*(z)".to_string(), Classification::Trivial));
    assert_eq!(formula("fig1b"), ("P(y|do(x))".to_string(), Classification::Direct));
    assert_eq!(formula("fig1c"), ("Σ_z P*(y|x,z) P*(z|x)".to_string(), Classification::Trivial));
    let (text, class) = formula("fig2");
    assert_eq!(class, Classification::General);
    assert!(text.contains("P(z|do(x))") && text.contains("P*(w|x,z)"), "{text}");
}

#[test]
fn rendering_is_deterministic() {
    let d = examples::diagram("fig2").unwrap();
    let a = transport(&xy(), &d).unwrap().formula().unwrap().render(Format::Latex);
    let b = transport(&xy(), &d).unwrap().formula().unwrap().render(Format::Latex);
    assert_eq!(a, b);
}

#[test]
fn bundled_failures_carry_valid_hedges() {
    for name in ["sbow", "fig3b", "fig4", "sp", "sb"] {
        let d = examples::diagram(name).unwrap();
        let r = transport(&xy(), &d).unwrap();
        let h = r.hedge().unwrap_or_else(|| panic!("{name} should fail"));
        assert!(validate_s_hedge(h, &d), "{name}");
        assert_eq!(h.query, xy());
    }
}

#[test]
fn empty_treatment_gives_the_target_marginal() {
    let d = examples::diagram("sbow").unwrap();
    let q = Query::new(NodeSet::new(), node_set(["Y"])).unwrap();
    assert_eq!(transport(&q, &d).unwrap().formula().unwrap().to_string(), "P*(y)");
}

#[test]
fn invalid_queries_are_rejected() {
    let d = examples::diagram("fig1c").unwrap();
    assert!(Query::new(node_set(["X"]), node_set(["X"])).is_err());
    let q = Query::new(node_set(["X"]), node_set(["Q"])).unwrap();
    assert!(matches!(transport(&q, &d), Err(TransportError::Diagram(DiagramError::UnknownNode { .. }))));
}

#[test]
fn null_interventions_are_averaged_out() {
    let d = SelectionDiagram::parse("nodes C E F\nedge E C\nedge C F\n").unwrap();
    let q = Query::new(node_set(["C"]), node_set(["F"])).unwrap();
    let e = transport(&q, &d).unwrap().formula().cloned().unwrap();
    assert!(e.free_variables().is_subset(&node_set(["C", "F"])), "{e}");
    assert!(verify_transport_formula(&e, &d, &q, 20, 0).unwrap().all_exact());
}

#[test]
fn identification_without_selection() {
    let bow = SelectionDiagram::parse("nodes X Y\nedge X Y\nbidir X Y\n").unwrap();
    assert!(!identify(&xy(), &bow).unwrap().is_transportable());
    let front = SelectionDiagram::parse("nodes X M Y\nedge X M\nedge M Y\nbidir X Y\n").unwrap();
    let e = identify(&xy(), &front).unwrap().formula().cloned().unwrap();
    assert!(e.terms().iter().all(|t| t.do_set().is_empty()));
    assert!(verify_transport_formula(&e, &front, &xy(), 20, 0).unwrap().all_exact());
    assert!(matches!(identify(&xy(), &examples::diagram("sbow").unwrap()), Err(TransportError::HasSelection(_))));
}

#[test]
fn direct_effect_criteria_on_bundled_diagrams() {
    let v = |name: &str, y: &str| cde_transportable(&examples::diagram(name).unwrap(), y).unwrap();
    assert_eq!(v("fig1a", "Y"), CdeVerdict::TransportableByCorollary1);
    assert_eq!(v("sbow", "Y"), CdeVerdict::Unknown);
}

/// Diagrams with at least two bidirected edges and a selection target,
/// where the recursion reaches its deeper cases more often.
fn dense_diagrams(count: usize, seed: u64) -> Vec<(SelectionDiagram, Query, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = DiagramShape {
        edge_probability: 0.5,
        ..DiagramShape::default()
    };
    let mut out = Vec::new();
    while out.len() < count {
        let d = random_diagram(&mut rng, &shape);
        let q = random_query(&mut rng, &d);
        let s: u64 = rng.gen();
        if d.len() >= 4 && d.bidirected_edges().len() >= 2 && !d.selection_targets().is_empty() {
            out.push((d, q, s));
        }
    }
    out
}

#[test]
fn dense_sweep_is_sound_and_certified() {
    let (mut formulas, mut failures) = (0, 0);
    for (i, (d, q, s)) in dense_diagrams(300, 99).into_iter().enumerate() {
        match transport(&q, &d).unwrap() {
            TransportResult::Formula { expr, .. } => {
                formulas += 1;
                let r = verify_with_cardinality(&expr, &d, &q, 3, s, 2).unwrap();
                assert!(r.all_exact(), "diagram {i}: {expr}\n{}{r:?}", d.render());
            }
            TransportResult::Failure { hedge, .. } => {
                failures += 1;
                assert!(validate_s_hedge(&hedge, &d), "diagram {i}");
                let (m1, m2) = build_counterexample(&hedge, &d, false).unwrap();
                let c = certify_counterexample(&m1, &m2, &q).unwrap();
                assert!(c.is_valid(), "diagram {i}: {c:?}\n{}", d.render());
            }
        }
    }
    assert!(formulas > 0 && failures > 0, "{formulas} formulas, {failures} failures");
}
