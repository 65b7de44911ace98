mod common;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use common::*;
use transport_core::examples;
use transport_core::oracle::*;
use transport_core::{node_set, transport, Population, Query, SelectionDiagram};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn assign(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn xy() -> Query {
    Query::new(node_set(["X"]), node_set(["Y"])).unwrap()
}

fn effect_at(pair: &ScmPair, x: usize, y: usize) -> BigRational {
    ground_truth_effect(pair, &xy()).unwrap()[&assign(&[("X", x), ("Y", y)])].clone()
}

#[test]
fn random_pairs_are_deterministic_in_the_seed() {
    let d = examples::diagram("fig2").unwrap();
    let a = random_scm_pair(&d, 11, 3).unwrap();
    let b = random_scm_pair(&d, 11, 3).unwrap();
    assert_eq!(a.source(), b.source());
    assert_eq!(a.target(), b.target());
    assert_ne!(random_scm_pair(&d, 12, 3).unwrap().source(), a.source());
}

#[test]
fn pairs_without_selection_targets_coincide() {
    let d = SelectionDiagram::parse("nodes X Y Z\nedge X Y\nedge Z Y\nbidir X Z\n").unwrap();
    for seed in 0..10 {
        let p = random_scm_pair(&d, seed, 3).unwrap();
        assert_eq!(p.source(), p.target());
    }
}

#[test]
fn s_bow_pairs_differ_only_at_the_outcome() {
    let d = examples::diagram("sbow").unwrap();
    for seed in 0..10 {
        let p = random_scm_pair(&d, seed, 2).unwrap();
        assert_eq!(p.source().mechanisms()["X"], p.target().mechanisms()["X"]);
        assert_eq!(p.source().latents(), p.target().latents());
        assert_ne!(p.source().mechanisms()["Y"], p.target().mechanisms()["Y"]);
    }
}

#[test]
fn random_pairs_are_strictly_positive() {
    let d = examples::diagram("fig4").unwrap();
    let p = random_scm_pair(&d, 5, 3).unwrap();
    for pop in [Population::Source, Population::Target] {
        let j = p.distribution(pop, &BTreeMap::new()).unwrap();
        let n: usize = p.source().cardinalities().values().product();
        assert_eq!(j.entries().filter(|(_, w)| !w.is_zero()).count(), n);
        assert!(j.mass().is_one());
    }
}

#[test]
fn point_mass_models_have_point_mass_joints() {
    let d = SelectionDiagram::parse("nodes X Y\nedge X Y\n").unwrap();
    let cards = [("X".to_string(), 2), ("Y".to_string(), 2)].into();
    let noise = [("X".to_string(), vec![1]), ("Y".to_string(), vec![1])].into();
    let m = DiscreteScm::from_fn(d, cards, vec![], noise, |v, i| if v == "X" { 1 } else { 1 - i.parent("X") }).unwrap();
    let j = m.joint_dist().unwrap();
    assert!(j.probability(&assign(&[("X", 1), ("Y", 0)])).is_one());
}

#[test]
fn s_bow_models_observational_behavior() {
    let (m1, m2) = sbow_models().unwrap();
    let j = m1.source().joint_dist().unwrap();
    assert_eq!(j.probability(&assign(&[("X", 0)])), ratio(1, 2));
    assert_eq!(j.entries().collect::<Vec<_>>(), m2.source().joint_dist().unwrap().entries().collect::<Vec<_>>());
}

#[test]
fn s_bow_models_target_effects() {
    let (m1, m2) = sbow_models().unwrap();
    // Y = X ⊕ U ⊕ S reduces to U at X = S = 1, while S ∨ (X ⊕ U) is 1.
    assert_eq!(effect_at(&m1, 1, 1), ratio(1, 2));
    assert_eq!(effect_at(&m2, 1, 1), ratio(1, 1));
    let do1 = assign(&[("X", 1)]);
    let t1 = m1.target().interventional_dist(&do1).unwrap();
    assert_eq!(t1.probability(&assign(&[("Y", 1)])), ratio(1, 2));
}

#[test]
fn empty_intervention_is_the_joint() {
    let d = examples::diagram("fig2").unwrap();
    let p = random_scm_pair(&d, 3, 2).unwrap();
    let j = p.source().joint_dist().unwrap();
    let i = p.source().interventional_dist(&BTreeMap::new()).unwrap();
    assert_eq!(j.entries().collect::<Vec<_>>(), i.entries().collect::<Vec<_>>());
    assert!(j.mass().is_one());
}

#[test]
fn identical_pairs_give_source_effects() {
    let d = examples::diagram("fig1b").unwrap();
    let m = random_scm_pair(&d, 9, 2).unwrap().source().clone();
    let pair = ScmPair::identical(m.clone());
    for x in 0..2 {
        let joint = m.interventional_dist(&assign(&[("X", x)])).unwrap();
        for y in 0..2 {
            assert_eq!(effect_at(&pair, x, y), joint.probability(&assign(&[("Y", y)])));
        }
    }
    let e = direct();
    assert_eq!(check_formula(&e, &pair, &xy()).unwrap(), TrialOutcome::Exact);
}

#[test]
fn recalibration_is_exact_where_it_applies_only() {
    let q = xy();
    let a = examples::diagram("fig1a").unwrap();
    let c = examples::diagram("fig1c").unwrap();
    assert!(verify_transport_formula(&recalibration(), &a, &q, 100, 0).unwrap().all_exact());
    let wrong = verify_transport_formula(&recalibration(), &c, &q, 20, 0).unwrap();
    assert!(wrong.first_mismatch.is_some());
    assert!(verify_transport_formula(&weighted_recalibration(), &c, &q, 20, 0).unwrap().all_exact());
}

#[test]
fn hand_built_pairs_agree_on_all_data() {
    for (m1, m2) in [sbow_models().unwrap(), sp_models().unwrap(), sb_models().unwrap()] {
        assert!(agree_on_p_pstar_i(&m1, &m2, None).unwrap());
        assert!(agree_on_p_pstar_i(&m1, &m1, None).unwrap());
    }
}

#[test]
fn hand_built_pairs_disagree_at_x1_y1() {
    let (m1, m2) = sp_models().unwrap();
    assert_eq!((effect_at(&m1, 1, 1), effect_at(&m2, 1, 1)), (ratio(1, 2), ratio(1, 1)));
    let (m1, m2) = sb_models().unwrap();
    assert_eq!((effect_at(&m1, 1, 1), effect_at(&m2, 1, 1)), (ratio(1, 1), ratio(1, 2)));
}

#[test]
fn truth_table_has_eight_rows_matching_the_equations() {
    let t = theorem1_truth_table();
    assert_eq!(t.len(), 8);
    for r in &t {
        assert_eq!(r.y1, r.x ^ r.u ^ r.s);
        assert_eq!(r.y2, r.s | (r.x ^ r.u));
    }
}

#[test]
fn hedge_counterexamples_certify_for_every_bundled_failure() {
    for name in ["sbow", "fig3b", "fig4", "sp", "sb"] {
        let d = examples::diagram(name).unwrap();
        let h = transport(&xy(), &d).unwrap().hedge().cloned().expect(name);
        for positive in [false, true] {
            let (m1, m2) = build_counterexample(&h, &d, positive).unwrap();
            let c = certify_counterexample(&m1, &m2, &xy()).unwrap();
            assert!(c.is_valid(), "{name} positive={positive}: {c:?}");
        }
    }
}

#[test]
fn s_bow_hedge_counterexample_values() {
    let d = examples::diagram("sbow").unwrap();
    let h = transport(&xy(), &d).unwrap().hedge().cloned().unwrap();
    let (m1, m2) = build_counterexample(&h, &d, false).unwrap();
    // the first model keeps Y = X ⊕ U in the target, the second drops
    // every input from X and leaves Y constant
    assert_eq!(effect_at(&m1, 1, 1), ratio(1, 2));
    assert_eq!(effect_at(&m2, 1, 1), ratio(0, 1));
}

#[test]
fn positivity_patch_makes_observations_positive() {
    let d = examples::diagram("sp").unwrap();
    let h = transport(&xy(), &d).unwrap().hedge().cloned().unwrap();
    let (m1, _) = build_counterexample(&h, &d, true).unwrap();
    let j = m1.target().joint_dist().unwrap();
    assert!(!j.probability(&assign(&[("Y", 0)])).is_zero());
}

#[test]
fn invalid_hedges_are_rejected() {
    let d = examples::diagram("sbow").unwrap();
    let mut h = transport(&xy(), &d).unwrap().hedge().cloned().unwrap();
    h.f_prime = h.f.clone();
    assert!(build_counterexample(&h, &d, false).is_err());
}

#[test]
fn enumeration_cap_rejects_huge_models() {
    let names: Vec<String> = (0..25).map(|i| format!("V{i}")).collect();
    let text = format!("nodes {}\n", names.join(" "));
    let d = SelectionDiagram::parse(&text).unwrap();
    let p = random_scm_pair(&d, 0, 3);
    let too_big = p.and_then(|p| p.source().joint_dist());
    assert!(matches!(too_big, Err(transport_core::error::OracleError::TooLarge { .. })), "{too_big:?}");
}
