//! Test-time scaling for PDDL synthesis: best-of-N sampling ranked by
//! log-likelihood, then per-candidate refinement chains that alternate an
//! optimizer (critique) call with an update (rewrite) call.
//!
//! ```no_run
//! use llm_backend::MockBackend;
//! use pddl_synth::{synthesize, SynthesisConfig, SynthesisTask};
//!
//! let backend = MockBackend::constant("### Domain:\n(define (domain d) (:predicates (p)))");
//! let task = SynthesisTask::nl2domain("A domain with one proposition p.");
//! let run = synthesize(&task, &SynthesisConfig::default(), &backend)?;
//! assert!(run.passed());
//! # Ok::<(), pddl_synth::SynthError>(())
//! ```

pub mod bon;
pub mod check;
pub mod ivml;
pub mod pipeline;
pub mod prompts;
pub mod split;
pub mod task;

pub use bon::{bon_run, bon_sample, derive_seed, BonRun, Candidate, SampleRecord};
pub use check::{check_artifact, normalized_score, score_candidate, Check, CheckSummary};
pub use ivml::{ivml_step, run_chain, run_ivml, select_final, ChainTrace, EpochRecord, Feedback, IvmlRun, SolutionState};
pub use pipeline::{
    final_file_name, synthesize, write_artifacts, ChainSummary, RunSummary, Selection, SynthesisRun, Timings,
};
pub use prompts::{build_cot_prompt, build_opt_prompt, build_update_prompt, fill};
pub use split::split_cot_output;
pub use task::{SynthError, SynthesisConfig, SynthesisTask, TaskKind};
