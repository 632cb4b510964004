//! Scenario files, user-placement sampling, the experiment families and
//! CSV output.

mod config;
mod experiments;
mod sampling;
mod table;

pub use config::{
    CandidateConfig, ChannelModelConfig, DemandConfig, EnvironmentConfig, ExperimentSettings, ScenarioConfig,
    TruncatedNormal, UserConfig, DEFAULT_REPS,
};
pub use experiments::{placement_users, run_command, run_experiment, Command, Condition, ExperimentName, ExperimentOutput};
pub use sampling::{min_fidelities, rep_rng, sample_truncated, sample_user_layout, sample_user_layout_with, users_for_rep};
pub use table::{emit_csv, read_csv, GroupSummary, ResultRow, ResultTable, HEADER, SCHEMA_LINE};
