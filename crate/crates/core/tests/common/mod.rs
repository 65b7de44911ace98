//! Randomized structural checks shared by the property and acceptance suites.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use transport_core::components::c_components;
use transport_core::formula::{evaluate, simplify};
use transport_core::oracle::{assignments, random_diagram, random_scm_pair, DiagramShape, Joint};
use transport_core::separation::{d_separated, selection_separated};
use transport_core::{Expr, NodeSet, Population, SelectionDiagram, Term};

pub fn diagram_from_seed(seed: u64) -> SelectionDiagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_diagram(&mut rng, &DiagramShape::default())
}

pub fn check_partition(d: &SelectionDiagram) -> Result<(), String> {
    let blocks = c_components(d);
    let mut union = NodeSet::new();
    let mut total = 0;
    for b in &blocks {
        if b.is_empty() {
            return Err("empty block".into());
        }
        total += b.len();
        union.extend(b.iter().cloned());
    }
    if total != union.len() {
        return Err("blocks overlap".into());
    }
    if &union != d.observables() {
        return Err("blocks do not cover the observables".into());
    }
    let block_of = |v: &str| blocks.iter().position(|b| b.contains(v));
    for (a, b) in d.bidirected_edges() {
        if block_of(a) != block_of(b) {
            return Err(format!("bidirected edge {a}<->{b} crosses blocks"));
        }
    }
    for b in &blocks {
        let sub = d.induced_subgraph(b).map_err(|e| e.to_string())?;
        if c_components(&sub).len() != 1 {
            return Err(format!("block {b:?} is not bidirected-connected"));
        }
    }
    let leasts: Vec<&String> = blocks.iter().map(|b| b.iter().next().unwrap()).collect();
    if leasts.windows(2).any(|w| w[0] >= w[1]) {
        return Err("blocks are not ordered by least member".into());
    }
    Ok(())
}

pub fn check_round_trip(d: &SelectionDiagram) -> Result<(), String> {
    let text = d.render();
    let back = SelectionDiagram::parse(&text).map_err(|e| e.to_string())?;
    if &back != d {
        return Err(format!("parse(render(d)) differs from d:\n{text}"));
    }
    if back.render() != text {
        return Err("render is not stable".into());
    }
    Ok(())
}

pub fn check_graph_operations(d: &SelectionDiagram, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let a = random_subset(rng, d.observables(), 0, 2);
    let b = random_subset(rng, d.observables(), 0, 2);
    let once = d.mutilate(&a, &b).map_err(|e| e.to_string())?;
    let twice = once.mutilate(&a, &b).map_err(|e| e.to_string())?;
    if once != twice {
        return Err("mutilation is not idempotent".into());
    }
    if !once.is_edge_subgraph_of(d) {
        return Err("mutilation added edges".into());
    }
    let anc = d.ancestors(&a).map_err(|e| e.to_string())?;
    if !a.is_subset(&anc) {
        return Err("ancestors do not contain the seed set".into());
    }
    for v in &anc {
        if !d.parents(v).is_subset(&anc) {
            return Err(format!("ancestors not closed under parents at {v}"));
        }
    }
    let order = d.topological_order();
    let pos: BTreeMap<&String, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
    if d.directed_edges().iter().any(|(x, y)| pos[x] >= pos[y]) {
        return Err("topological order violated".into());
    }
    Ok(())
}

pub fn random_subset(rng: &mut ChaCha8Rng, pool: &NodeSet, min: usize, max: usize) -> NodeSet {
    let mut v: Vec<&String> = pool.iter().collect();
    v.shuffle(rng);
    let n = rng.gen_range(min.min(v.len())..=max.min(v.len()));
    v.into_iter().take(n).cloned().collect()
}

fn random_term(rng: &mut ChaCha8Rng, d: &SelectionDiagram) -> Term {
    let mut pool: Vec<String> = d.observables().iter().cloned().collect();
    pool.shuffle(rng);
    let outcome: NodeSet = pool.drain(..1 + rng.gen_range(0..pool.len().min(2))).collect();
    let k = rng.gen_range(0..=pool.len().min(2));
    let given: NodeSet = pool.drain(..k).collect();
    if rng.gen_bool(0.5) {
        Term::target(outcome, given).unwrap()
    } else {
        let k = rng.gen_range(0..=pool.len().min(1));
        let do_set: NodeSet = pool.drain(..k).collect();
        Term::source(outcome, do_set, given).unwrap()
    }
}

/// Random expression tree over the diagram's variables with deliberately
/// redundant structure: nested products, vacuous sums and quotients with
/// shared factors.
pub fn random_expr(rng: &mut ChaCha8Rng, d: &SelectionDiagram, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return Expr::Term(random_term(rng, d));
    }
    match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(2..=3);
            Expr::Product((0..n).map(|_| random_expr(rng, d, depth - 1)).collect())
        }
        1 => Expr::Sum {
            over: random_subset(rng, d.observables(), 1, 2),
            body: Box::new(random_expr(rng, d, depth - 1)),
        },
        _ => {
            let shared = random_expr(rng, d, depth - 1);
            let num = Expr::Product(vec![shared.clone(), random_expr(rng, d, depth - 1)]);
            let den = if rng.gen_bool(0.5) {
                Expr::Product(vec![random_expr(rng, d, depth - 1), shared])
            } else {
                shared
            };
            Expr::quotient(num, den)
        }
    }
}

/// `simplify` and alpha renaming leave the value of a random expression
/// unchanged under every assignment of its free variables.
pub fn check_simplify(d: &SelectionDiagram, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_expr(&mut rng, d, 3);
    let s = simplify(&e);
    let r = e.alpha_renamed();
    let pair = random_scm_pair(d, seed, 2).map_err(|e| e.to_string())?;
    let free: Vec<String> = e.free_variables().into_iter().collect();
    for a in assignments(&free, pair.source().cardinalities()) {
        let want = evaluate(&e, &pair, &a).map_err(|x| format!("{e}: {x}"))?;
        for (label, other) in [("simplify", &s), ("alpha", &r)] {
            let got = evaluate(other, &pair, &a).map_err(|x| format!("{other}: {x}"))?;
            if got != want {
                return Err(format!("{label} changed {e} into {other}: {want} vs {got} at {a:?}"));
            }
        }
    }
    Ok(())
}

fn independent(j: &Joint, a: &NodeSet, b: &NodeSet, c: &NodeSet, cards: &BTreeMap<String, usize>) -> bool {
    let vars: Vec<String> = a.iter().chain(b).chain(c).cloned().collect();
    assignments(&vars, cards).into_iter().all(|full| {
        let pick = |s: &[&NodeSet]| -> BTreeMap<String, usize> {
            full.iter()
                .filter(|(k, _)| s.iter().any(|set| set.contains(*k)))
                .map(|(k, v)| (k.clone(), *v))
                .collect()
        };
        j.probability(&full) * j.probability(&pick(&[c]))
            == j.probability(&pick(&[a, c])) * j.probability(&pick(&[b, c]))
    })
}

/// d-separation claims hold exactly in random models inducing `d`, both
/// between observables and between the selection bloc and observables.
/// Returns how many separation claims were checked.
pub fn check_dsep(d: &SelectionDiagram, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = random_scm_pair(d, seed, 2).map_err(|e| e.to_string())?;
    let cards = pair.source().cardinalities().clone();
    let joint = pair.distribution(Population::Source, &BTreeMap::new()).map_err(|e| e.to_string())?;
    let target = pair.distribution(Population::Target, &BTreeMap::new()).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for _ in 0..8 {
        let a = random_subset(&mut rng, d.observables(), 1, 2);
        let rest: NodeSet = d.observables().difference(&a).cloned().collect();
        if rest.is_empty() {
            continue;
        }
        let b = random_subset(&mut rng, &rest, 1, 2);
        let rest: NodeSet = rest.difference(&b).cloned().collect();
        let c = random_subset(&mut rng, &rest, 0, 2);
        let sep = d_separated(d, &a, &b, &c).map_err(|e| e.to_string())?;
        if sep != d_separated(d, &b, &a, &c).map_err(|e| e.to_string())? {
            return Err(format!("d-separation not symmetric for {a:?} {b:?} | {c:?}"));
        }
        if sep {
            checked += 1;
            if !independent(&joint, &a, &b, &c, &cards) {
                return Err(format!("{a:?} and {b:?} separated by {c:?} but dependent"));
            }
        }
        if selection_separated(d, &b, &c).map_err(|e| e.to_string())? {
            checked += 1;
            let vars: Vec<String> = b.iter().chain(&c).cloned().collect();
            let cvars: Vec<String> = c.iter().cloned().collect();
            for full in assignments(&vars, &cards) {
                let cond: BTreeMap<String, usize> =
                    full.iter().filter(|(k, _)| c.contains(*k)).map(|(k, v)| (k.clone(), *v)).collect();
                let lhs = joint.probability(&full) * target.probability(&cond);
                let rhs = target.probability(&full) * joint.probability(&cond);
                if lhs != rhs {
                    return Err(format!("S separated from {b:?} by {cvars:?} but P and P* differ"));
                }
            }
        }
    }
    Ok(checked)
}

pub fn target_term(outcome: &[&str], given: &[&str]) -> Expr {
    let set = |s: &[&str]| s.iter().map(|v| v.to_string()).collect();
    Expr::Term(Term::target(set(outcome), set(given)).unwrap())
}

pub fn source_term(outcome: &[&str], do_set: &[&str], given: &[&str]) -> Expr {
    let set = |s: &[&str]| s.iter().map(|v| v.to_string()).collect();
    Expr::Term(Term::source(set(outcome), set(do_set), set(given)).unwrap())
}

pub fn sum(over: &[&str], factors: Vec<Expr>) -> Expr {
    Expr::Sum {
        over: over.iter().map(|v| v.to_string()).collect(),
        body: Box::new(Expr::product(factors).unwrap()),
    }
}

/// Σ_z P(y|do(x),z) P*(z)
pub fn recalibration() -> Expr {
    sum(&["Z"], vec![source_term(&["Y"], &["X"], &["Z"]), target_term(&["Z"], &[])])
}

/// P(y|do(x))
pub fn direct() -> Expr {
    source_term(&["Y"], &["X"], &[])
}

/// Σ_z P(y|do(x),z) P*(z|x)
pub fn weighted_recalibration() -> Expr {
    sum(&["Z"], vec![source_term(&["Y"], &["X"], &["Z"]), target_term(&["Z"], &["X"])])
}

/// Σ_{z,w} P(z|do(x)) P*(w|x,z) Σ_v P*(v|w) P*(y|v), the composition that
/// ignores the confounding of V and Y.
pub fn unconfounded_composition() -> Expr {
    sum(
        &["Z", "W"],
        vec![
            source_term(&["Z"], &["X"], &[]),
            target_term(&["W"], &["X", "Z"]),
            sum(&["V"], vec![target_term(&["V"], &["W"]), target_term(&["Y"], &["V"])]),
        ],
    )
}
