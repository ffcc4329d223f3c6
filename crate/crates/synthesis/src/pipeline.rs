//! The full pipeline and its on-disk audit trail.
//!
//! ```text
//! <out>/candidates/NN.txt            raw generation of sample NN
//! <out>/candidates/NN.score          its score, or "fallback"
//! <out>/chains/K/epoch_T.*.txt       feedback, thought and PDDL per epoch
//! <out>/final.domain.pddl            (final.problem.pddl for NL2Problem)
//! <out>/run.json                     config echo, timings, selection trace
//! ```

use std::fs;
use std::path::Path;
use std::time::Instant;

use llm_backend::Backend;
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::bon::{bon_run, BonRun, SampleRecord};
use crate::check::CheckSummary;
use crate::ivml::{run_ivml, IvmlRun, SolutionState};
use crate::task::{SynthError, SynthesisConfig, SynthesisTask, TaskKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisRun {
    pub task: SynthesisTask,
    pub config: SynthesisConfig,
    pub bon: BonRun,
    pub ivml: IvmlRun,
    pub timings: Timings,
}

impl SynthesisRun {
    pub fn final_state(&self) -> &SolutionState {
        &self.ivml.final_state
    }

    pub fn passed(&self) -> bool {
        self.ivml.final_state.passed()
    }

    /// File name of the final artifact inside the run directory.
    pub fn final_file_name(&self) -> &'static str {
        final_file_name(self.task.kind)
    }

    pub fn summary(&self, backend_id: &str) -> RunSummary {
        let chains = self
            .ivml
            .chains
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                Ok(t) => ChainSummary {
                    chain: i,
                    origin_index: t.initial.origin_index,
                    initial_errors: t.initial.error_count(),
                    epoch_errors: t.epochs.iter().map(|e| e.errors).collect(),
                    stalled_epochs: t.epochs.iter().filter(|e| e.stalled).map(|e| e.epoch).collect(),
                    best_iteration: Some(t.best.iteration),
                    best_errors: Some(t.best.error_count()),
                    best_passed: Some(t.best.passed()),
                    early_stopped: t.early_stopped,
                    error: None,
                },
                Err(e) => ChainSummary {
                    chain: i,
                    origin_index: self.bon.candidates[i].index,
                    initial_errors: self.bon.candidates[i].check.error_count(),
                    epoch_errors: Vec::new(),
                    stalled_epochs: Vec::new(),
                    best_iteration: None,
                    best_errors: None,
                    best_passed: None,
                    early_stopped: false,
                    error: Some(e.clone()),
                },
            })
            .collect();
        let f = &self.ivml.final_state;
        RunSummary {
            task: self.task.kind,
            backend: backend_id.to_string(),
            config: self.config.clone(),
            timings: self.timings,
            samples: self.bon.samples.clone(),
            chains,
            selection: Selection {
                chain: self.ivml.chosen,
                origin_index: f.origin_index,
                origin_score: f.origin_score,
                iteration: f.iteration,
                rule: "passed, then fewer errors, then higher origin score, then lower origin index".into(),
            },
            final_check: f.check.summary(&f.domain_text, &self.task),
            final_file: self.final_file_name().to_string(),
        }
    }
}

pub fn final_file_name(kind: TaskKind) -> &'static str {
    if kind.produces_problem() {
        "final.problem.pddl"
    } else {
        "final.domain.pddl"
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub bon_seconds: f64,
    pub ivml_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub chain: usize,
    pub origin_index: usize,
    pub initial_errors: usize,
    pub epoch_errors: Vec<usize>,
    pub stalled_epochs: Vec<usize>,
    pub best_iteration: Option<usize>,
    pub best_errors: Option<usize>,
    pub best_passed: Option<bool>,
    pub early_stopped: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub chain: usize,
    pub origin_index: usize,
    pub origin_score: Option<f64>,
    pub iteration: usize,
    pub rule: String,
}

/// The contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub task: TaskKind,
    pub backend: String,
    pub config: SynthesisConfig,
    pub timings: Timings,
    pub samples: Vec<SampleRecord>,
    pub chains: Vec<ChainSummary>,
    pub selection: Selection,
    pub final_check: CheckSummary,
    pub final_file: String,
}

/// Best-of-N followed by `config.epochs` refinement epochs per candidate.
pub fn synthesize(task: &SynthesisTask, config: &SynthesisConfig, backend: &dyn Backend) -> Result<SynthesisRun, SynthError> {
    let start = Instant::now();
    let bon = bon_run(task, config, backend)?;
    let bon_seconds = start.elapsed().as_secs_f64();
    let ivml_start = Instant::now();
    let ivml = run_ivml(task, &bon.candidates, config, backend)?;
    let timings = Timings {
        bon_seconds,
        ivml_seconds: ivml_start.elapsed().as_secs_f64(),
        total_seconds: start.elapsed().as_secs_f64(),
    };
    info!(
        kind = %task.kind,
        passed = ivml.final_state.passed(),
        seconds = timings.total_seconds,
        "synthesis finished"
    );
    Ok(SynthesisRun {
        task: task.clone(),
        config: config.clone(),
        bon,
        ivml,
        timings,
    })
}

/// Writes the audit trail described in the module docs into `dir`.
pub fn write_artifacts(run: &SynthesisRun, backend_id: &str, dir: &Path) -> Result<(), SynthError> {
    let candidates = dir.join("candidates");
    fs::create_dir_all(&candidates)?;
    for s in &run.bon.samples {
        let text = match (&s.raw_text, &s.dropped) {
            (Some(t), _) => t.clone(),
            (None, Some(reason)) => format!("; generation failed: {reason}\n"),
            (None, None) => String::new(),
        };
        fs::write(candidates.join(format!("{:02}.txt", s.index)), text)?;
        let score = s.score.map_or_else(|| "fallback".to_string(), |v| format!("{v}"));
        fs::write(candidates.join(format!("{:02}.score", s.index)), format!("{score}\n"))?;
    }
    for (k, chain) in run.ivml.chains.iter().enumerate() {
        let cdir = dir.join("chains").join(k.to_string());
        fs::create_dir_all(&cdir)?;
        match chain {
            Ok(t) => {
                fs::write(cdir.join("epoch_0.thought.txt"), &t.initial.thought)?;
                fs::write(cdir.join("epoch_0.domain.txt"), &t.initial.domain_text)?;
                for e in &t.epochs {
                    fs::write(cdir.join(format!("epoch_{}.feedback.txt", e.epoch)), &e.feedback)?;
                    fs::write(cdir.join(format!("epoch_{}.thought.txt", e.epoch)), &e.thought)?;
                    fs::write(cdir.join(format!("epoch_{}.domain.txt", e.epoch)), &e.domain_text)?;
                }
            }
            Err(e) => fs::write(cdir.join("error.txt"), e)?,
        }
    }
    let f = run.final_state();
    fs::write(dir.join(run.final_file_name()), &f.domain_text)?;
    let json = serde_json::to_string_pretty(&run.summary(backend_id)).expect("run summary serializes");
    fs::write(dir.join("run.json"), json + "\n")?;
    Ok(())
}
