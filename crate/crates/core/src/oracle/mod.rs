//! Exact discrete structural causal models used to certify answers.

mod counterexample;
mod models;
mod random;
mod scm;
mod verify;

pub use counterexample::{build_counterexample, certify_counterexample, Certificate};
pub use models::{sb_models, sbow_models, sp_models, theorem1_truth_table, TruthRow};
pub use random::{assignments, random_diagram, random_query, random_scm_pair, DiagramShape};
pub use scm::{DiscreteScm, Inputs, Joint, Latent, Mechanism, ScmPair, ENUMERATION_CAP};
pub use verify::{
    agree_on_p_pstar_i, check_formula, effect_disagreement, ground_truth_effect, trial_seeds,
    verify_transport_formula, verify_with_cardinality, Effect, Mismatch, TrialOutcome, VerifyReport,
};
