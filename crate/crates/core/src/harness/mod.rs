//! Experiment orchestration: seeded trials, node-count sweeps, threshold
//! selection, rate accounting and CSV output.

mod campaign;
mod checks;
mod config;
pub mod output;
mod rates;
mod trial;

pub use campaign::{pilot_thresholds, sweep_k, CampaignReport, KAggregate, ThresholdPlan, TrialSummary};
pub use checks::{aliasing_selftest, oracle_agreement, support_of, AliasingSummary, OracleSummary};
pub use config::{ExperimentConfig, LambdaSpec, MeasurementMode, NoiseSpec, OperatingRule, SpectrumSpec};
pub use rates::{rate_table, RateTable};
pub use trial::{run_trial, run_trial_seeded, TrialRecord};
