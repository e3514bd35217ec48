//! Reproducible Monte Carlo campaigns over every verification check.
//!
//! A campaign is a pure function of its [`ExperimentConfig`]: path `i` is
//! driven by the noise keyed on `(master_seed, i)`, and results are
//! aggregated in path order, so two runs of the same config produce the
//! same report apart from the timing fields.

mod campaign;
mod config;
mod report;

pub use campaign::run_campaign;
pub use config::{
    CheckId, ContinuityConfig, ExcursionConfig, ExperimentConfig, GridConfig, LadderConfig,
    SeedConfig, SpecConfig, Tolerances, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV,
};
pub use report::{CheckOutcome, CheckRecord, Environment, VerificationReport};
