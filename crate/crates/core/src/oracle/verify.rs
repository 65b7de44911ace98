//! Ground truth and certification of formulas and model pairs.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagram::{Query, SelectionDiagram};
use crate::error::{FormulaError, OracleError};
use crate::formula::{evaluate_many, Expr, Population};
use crate::oracle::random::{assignments, random_scm_pair};
use crate::oracle::scm::ScmPair;

/// A distribution over the outcomes for each treatment assignment, keyed by
/// the joint assignment of treatments and outcomes.
pub type Effect = BTreeMap<BTreeMap<String, usize>, BigRational>;

/// `P*(y | do(x))` for every value of `x` and `y`, read from the target model.
pub fn ground_truth_effect(pair: &ScmPair, q: &Query) -> Result<Effect, OracleError> {
    let cards = pair.target().cardinalities();
    for v in q.x().iter().chain(q.y()) {
        if !cards.contains_key(v) {
            return Err(OracleError::Malformed(format!("unknown node `{v}`")));
        }
    }
    let xs: Vec<String> = q.x().iter().cloned().collect();
    let ys: Vec<String> = q.y().iter().cloned().collect();
    let mut out = Effect::new();
    for xa in assignments(&xs, cards) {
        let joint = pair.distribution(Population::Target, &xa)?;
        for ya in assignments(&ys, cards) {
            let p = joint.probability(&ya);
            let mut key = xa.clone();
            key.extend(ya);
            out.insert(key, p);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub trial: usize,
    pub seed: u64,
    pub assignment: BTreeMap<String, usize>,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub exact: usize,
    /// Trials where the formula hit a zero-probability conditioning event.
    pub undefined: usize,
    pub first_mismatch: Option<Mismatch>,
    pub first_undefined: Option<String>,
}

impl VerifyReport {
    pub fn all_exact(&self) -> bool {
        self.exact == self.trials
    }

    pub fn summary(&self) -> String {
        let mut s = format!("verified {}/{} exact", self.exact, self.trials);
        if self.undefined > 0 {
            s.push_str(&format!(", {} undefined", self.undefined));
        }
        s
    }
}

/// Outcome of checking one formula against one pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrialOutcome {
    Exact,
    Undefined(String),
    Mismatch {
        assignment: BTreeMap<String, usize>,
        expected: BigRational,
        got: BigRational,
    },
}

/// Compares `e` with the ground truth on every assignment of `q.x ∪ q.y`.
pub fn check_formula(e: &Expr, pair: &ScmPair, q: &Query) -> Result<TrialOutcome, OracleError> {
    let truth = ground_truth_effect(pair, q)?;
    let keys: Vec<BTreeMap<String, usize>> = truth.keys().cloned().collect();
    match evaluate_many(e, pair, &keys) {
        Ok(values) => {
            for (key, got) in keys.into_iter().zip(values) {
                let expected = truth[&key].clone();
                if got != expected {
                    return Ok(TrialOutcome::Mismatch {
                        assignment: key,
                        expected,
                        got,
                    });
                }
            }
            Ok(TrialOutcome::Exact)
        }
        Err(FormulaError::UndefinedConditional { term }) => Ok(TrialOutcome::Undefined(term)),
        Err(FormulaError::Oracle(o)) => Err(o),
        Err(other) => Err(OracleError::Malformed(other.to_string())),
    }
}

/// Seed of the `i`-th trial derived from a base seed.
pub fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.next_u64()).collect()
}

/// Checks `e` against `trials` random model pairs inducing `d`.
pub fn verify_transport_formula(
    e: &Expr,
    d: &SelectionDiagram,
    q: &Query,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport, OracleError> {
    verify_with_cardinality(e, d, q, trials, seed, 2)
}

/// As [`verify_transport_formula`] with node and latent cardinalities drawn
/// up to `max_card`.
pub fn verify_with_cardinality(
    e: &Expr,
    d: &SelectionDiagram,
    q: &Query,
    trials: usize,
    seed: u64,
    max_card: usize,
) -> Result<VerifyReport, OracleError> {
    let mut report = VerifyReport {
        trials,
        ..VerifyReport::default()
    };
    for (trial, s) in trial_seeds(seed, trials).into_iter().enumerate() {
        let pair = random_scm_pair(d, s, max_card)?;
        match check_formula(e, &pair, q)? {
            TrialOutcome::Exact => report.exact += 1,
            TrialOutcome::Undefined(term) => {
                report.undefined += 1;
                report.first_undefined.get_or_insert(term);
            }
            TrialOutcome::Mismatch {
                assignment,
                expected,
                got,
            } => {
                report.first_mismatch.get_or_insert(Mismatch {
                    trial,
                    seed: s,
                    assignment,
                    expected: expected.to_string(),
                    got: got.to_string(),
                });
            }
        }
    }
    Ok(report)
}

/// Every subset of `vars` with at most `max` elements.
fn subsets(vars: &[String], max: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << vars.len()) {
        if mask.count_ones() as usize <= max {
            out.push(
                vars.iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, v)| v.clone())
                    .collect(),
            );
        }
    }
    out
}

/// True when two model pairs agree exactly on the source observational
/// distribution, the target observational distribution, and every source
/// interventional distribution with at most `max_do_size` intervened nodes
/// (all subsets when `None`).
pub fn agree_on_p_pstar_i(m1: &ScmPair, m2: &ScmPair, max_do_size: Option<usize>) -> Result<bool, OracleError> {
    let cards = m1.source().cardinalities();
    if cards != m2.source().cardinalities() {
        return Ok(false);
    }
    let none = BTreeMap::new();
    if m1.distribution(Population::Target, &none)? != m2.distribution(Population::Target, &none)? {
        return Ok(false);
    }
    let vars: Vec<String> = cards.keys().cloned().collect();
    for w in subsets(&vars, max_do_size.unwrap_or(vars.len())) {
        for a in assignments(&w, cards) {
            if m1.distribution(Population::Source, &a)? != m2.distribution(Population::Source, &a)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// First treatment/outcome assignment where the two pairs' target effects
/// differ, with both values.
pub fn effect_disagreement(
    m1: &ScmPair,
    m2: &ScmPair,
    q: &Query,
) -> Result<Option<(BTreeMap<String, usize>, BigRational, BigRational)>, OracleError> {
    let e1 = ground_truth_effect(m1, q)?;
    let e2 = ground_truth_effect(m2, q)?;
    Ok(e1
        .into_iter()
        .find(|(k, v)| e2.get(k) != Some(v))
        .map(|(k, v)| {
            let w = e2[&k].clone();
            (k, v, w)
        }))
}
