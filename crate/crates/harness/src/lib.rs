//! Command-line tooling around the PDDL toolchain and the synthesis
//! pipeline: strict configuration, corpus loading, suite runs and metrics.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod metrics;
pub mod suite;

pub use config::{load_config, parse_config, BackendConfig, BackendKind, Config, ConfigError, PlannerConfig};
pub use corpus::{load_corpus, load_task, CorpusError, Loaded, TaskRecord};
pub use metrics::{
    canonical_goal, canonical_init, evaluate_plan_case, plan_accuracy, problem_correct, rate, PlanAccuracy, PlanCase,
    PlanCaseOutcome,
};
pub use suite::{load_report, run_suite, run_task, Aggregate, Pipeline, RunReport, SuiteError, TaskOutcome};
