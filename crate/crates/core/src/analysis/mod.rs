//! Consensus bound, Monte Carlo estimation, and the property-check report.

mod bound;
mod estimate;
mod lemmas;

pub use bound::{
    consensus_lower_bound, example_triangular_bound, example_uniform_bound, BoundReport, ExpectedDisagreement,
};
pub use estimate::{
    audit_absorption, estimate_consensus, replicate_rng, replicate_seed, run_replicates, wilson_interval,
    AbsorptionAudit, Estimate, EstimateReport, RunRecord, Z_95, Z_99,
};
pub use lemmas::{
    absorption_checks, geometry_checks, lemma_check_report, long_scenario, trace_scenario, LemmaCheckConfig,
    LemmaReport, PropertyRecord, Scenario, CONSERVATION_SLACK, LONG_RUN_EVENTS, MONOTONE_SLACK, TRIANGLE_SLACK,
};
