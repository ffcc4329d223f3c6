//! Running a synthesis pipeline over a corpus and scoring the results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use llm_backend::{Backend, Metered, Usage};
use pddl_core::parse_problem;
use pddl_synth::{synthesize, write_artifacts, Check, SynthesisConfig, SynthesisRun, TaskKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{info, warn};

use crate::config::{Config, PlannerConfig};
use crate::corpus::{load_corpus, CorpusError, TaskRecord};
use crate::metrics::{evaluate_plan_case, problem_correct, rate, PlanCase, PlanCaseOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pipeline {
    #[serde(rename = "bon")]
    Bon,
    #[serde(rename = "bon+ivml")]
    BonIvml,
}

impl std::str::FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bon" => Ok(Pipeline::Bon),
            "bon+ivml" => Ok(Pipeline::BonIvml),
            other => Err(format!("unknown pipeline `{other}` (expected bon or bon+ivml)")),
        }
    }
}

impl std::fmt::Display for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pipeline::Bon => "bon",
            Pipeline::BonIvml => "bon+ivml",
        })
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report {path}: {message}")]
    Report { path: PathBuf, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl SuiteError {
    pub fn code(&self) -> &'static str {
        match self {
            SuiteError::Corpus(e) => e.code(),
            SuiteError::Io { .. } => "IO_ERROR",
            SuiteError::Report { .. } => "REPORT_ERROR",
            SuiteError::Pool(_) => "POOL_ERROR",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SuiteError + '_ {
    move |source| SuiteError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub id: String,
    pub kind: TaskKind,
    /// Synthesis error code and message when no artifact was produced.
    pub error: Option<String>,
    /// The final artifact passes the validator without errors.
    pub passed: bool,
    pub errors: usize,
    pub warnings: usize,
    /// Diagnostic codes of the final artifact with their counts.
    pub diagnostics: BTreeMap<String, usize>,
    pub problem_correct: Option<bool>,
    pub plan: Option<PlanCaseOutcome>,
    pub usage: Usage,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub tasks: usize,
    pub passed: usize,
    pub val_pass_rate: Option<f64>,
    pub problem_tasks: usize,
    pub problem_correct_rate: Option<f64>,
    pub plan_tasks: usize,
    pub plan_exact_match_rate: Option<f64>,
    pub plan_valid_rate: Option<f64>,
    pub usage: Usage,
}

impl Aggregate {
    /// Folds per-task outcomes into rates; the same function serves
    /// `bench` and `report`.
    pub fn from_outcomes(tasks: &[TaskOutcome]) -> Aggregate {
        let passed = tasks.iter().filter(|t| t.passed).count();
        let problem: Vec<bool> = tasks.iter().filter_map(|t| t.problem_correct).collect();
        let plans: Vec<&PlanCaseOutcome> = tasks.iter().filter_map(|t| t.plan.as_ref()).collect();
        let usage = tasks.iter().fold(Usage::default(), |mut acc, t| {
            acc.requests += t.usage.requests;
            acc.failures += t.usage.failures;
            acc.samples += t.usage.samples;
            acc.tokens += t.usage.tokens;
            acc
        });
        Aggregate {
            tasks: tasks.len(),
            passed,
            val_pass_rate: rate(passed, tasks.len()),
            problem_tasks: problem.len(),
            problem_correct_rate: rate(problem.iter().filter(|&&b| b).count(), problem.len()),
            plan_tasks: plans.len(),
            plan_exact_match_rate: rate(plans.iter().filter(|p| p.exact).count(), plans.len()),
            plan_valid_rate: rate(plans.iter().filter(|p| p.valid).count(), plans.len()),
            usage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub created_at: String,
    pub pipeline: Pipeline,
    pub backend: String,
    pub synthesis: SynthesisConfig,
    pub planner: PlannerConfig,
    pub tasks: Vec<TaskOutcome>,
    pub aggregate: Aggregate,
}

impl RunReport {
    /// The report with wall-clock fields (creation time, durations) zeroed.
    pub fn without_clock(&self) -> RunReport {
        let mut r = self.clone();
        r.created_at = String::new();
        for t in &mut r.tasks {
            t.seconds = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pipeline {}  backend {}  created {}", self.pipeline, self.backend, self.created_at);
        let _ = writeln!(
            out,
            "{:<24} {:<12} {:<5} {:>6} {:>8} {:>11} {:>8} {:>8}",
            "task", "kind", "pass", "errors", "problem", "plan", "requests", "seconds"
        );
        for t in &self.tasks {
            let problem = t.problem_correct.map_or("-", |b| if b { "yes" } else { "no" });
            let plan = t.plan.as_ref().map_or("-".to_string(), |p| {
                format!("{}/{}", if p.exact { "exact" } else { "-" }, if p.valid { "valid" } else { "-" })
            });
            let _ = writeln!(
                out,
                "{:<24} {:<12} {:<5} {:>6} {:>8} {:>11} {:>8} {:>8.2}",
                t.id,
                t.kind.as_str(),
                if t.passed { "yes" } else { "no" },
                t.errors,
                problem,
                plan,
                t.usage.requests,
                t.seconds
            );
        }
        let a = &self.aggregate;
        let pct = |r: Option<f64>| r.map_or("n/a".to_string(), |v| format!("{v:.1}%"));
        let _ = writeln!(out, "val_pass_rate         {} ({}/{})", pct(a.val_pass_rate), a.passed, a.tasks);
        let _ = writeln!(out, "problem_correct_rate  {} (over {})", pct(a.problem_correct_rate), a.problem_tasks);
        let _ = writeln!(out, "plan_exact_match_rate {} (over {})", pct(a.plan_exact_match_rate), a.plan_tasks);
        let _ = writeln!(out, "plan_valid_rate       {} (over {})", pct(a.plan_valid_rate), a.plan_tasks);
        let _ = writeln!(
            out,
            "requests {}  failures {}  samples {}  tokens {}",
            a.usage.requests, a.usage.failures, a.usage.samples, a.usage.tokens
        );
        out
    }
}

fn diagnostic_counts(check: &Check) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    if check.parse_error.is_some() {
        *out.entry("PARSE_ERROR".to_string()).or_default() += 1;
    }
    let all = check.report.diagnostics.iter().chain(check.input_report.iter().flat_map(|r| &r.diagnostics));
    for d in all {
        *out.entry(d.code.as_str().to_string()).or_default() += 1;
    }
    out
}

/// Synthesizes one task and scores the final artifact.
pub fn run_task(
    record: &TaskRecord,
    config: &Config,
    pipeline: Pipeline,
    backend: &dyn Backend,
    artifacts: Option<&Path>,
) -> TaskOutcome {
    let start = Instant::now();
    let metered = Metered::new(backend);
    let mut synth = config.synthesis.clone();
    if pipeline == Pipeline::Bon {
        synth.epochs = 0;
    }
    let task = record.synthesis_task();
    let mut outcome = TaskOutcome {
        id: record.id.clone(),
        kind: record.kind,
        error: None,
        passed: false,
        errors: 0,
        warnings: 0,
        diagnostics: BTreeMap::new(),
        problem_correct: None,
        plan: None,
        usage: Usage::default(),
        seconds: 0.0,
    };
    let run: Option<SynthesisRun> = match synthesize(&task, &synth, &metered) {
        Ok(run) => Some(run),
        Err(e) => {
            warn!(task = %record.id, "synthesis failed: {e}");
            outcome.error = Some(format!("{}: {e}", e.code()));
            None
        }
    };
    if let Some(run) = &run {
        let f = run.final_state();
        outcome.passed = f.passed();
        outcome.errors = f.error_count();
        outcome.warnings = f.check.warning_count();
        outcome.diagnostics = diagnostic_counts(&f.check);
        if let Some(dir) = artifacts {
            if let Err(e) = write_artifacts(run, &backend.id(), dir) {
                warn!(task = %record.id, "writing artifacts failed: {e}");
            }
        }
    }
    let artifact = run.as_ref().map(|r| r.final_state().domain_text.as_str());

    if record.kind == TaskKind::Nl2Problem {
        if let Some(reference) = &record.reference_problem {
            let reference = parse_problem(&reference.text).expect("checked at load");
            outcome.problem_correct = Some(
                artifact
                    .and_then(|a| parse_problem(a).ok())
                    .is_some_and(|g| problem_correct(&g, &reference, config.strict_init)),
            );
        }
    } else if let (Some(problem), Some(plan)) = (&record.reference_problem, &record.reference_plan) {
        let case = PlanCase {
            id: record.id.clone(),
            generated_domain: artifact.unwrap_or("").to_string(),
            reference_domain: record.reference_domain.as_ref().map(|d| d.text.clone()),
            reference_problem: problem.text.clone(),
            reference_plan: plan.text.clone(),
        };
        outcome.plan = Some(evaluate_plan_case(&case, &config.planner));
    }
    outcome.usage = metered.usage();
    outcome.seconds = start.elapsed().as_secs_f64();
    info!(task = %record.id, passed = outcome.passed, "task finished");
    outcome
}

/// Runs `pipeline` over every task of the corpus, writing per-task
/// artifacts, `report.json` and `report.txt` into a fresh
/// `run-<timestamp>` directory under `out_dir`.
pub fn run_suite(
    corpus: &Path,
    config: &Config,
    pipeline: Pipeline,
    backend: &dyn Backend,
    out_dir: &Path,
) -> Result<(RunReport, PathBuf), SuiteError> {
    let records = load_corpus(corpus)?;
    let now = chrono::Utc::now();
    let run_dir = fresh_dir(out_dir, &format!("run-{}", now.format("%Y%m%dT%H%M%SZ")))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| SuiteError::Pool(e.to_string()))?;
    let tasks: Vec<TaskOutcome> = pool.install(|| {
        records
            .par_iter()
            .map(|r| {
                let dir = run_dir.join("tasks").join(&r.id);
                run_task(r, config, pipeline, backend, Some(&dir))
            })
            .collect()
    });
    let report = RunReport {
        created_at: now.to_rfc3339(),
        pipeline,
        backend: backend.id(),
        synthesis: config.synthesis.clone(),
        planner: config.planner.clone(),
        aggregate: Aggregate::from_outcomes(&tasks),
        tasks,
    };
    fs::write(run_dir.join("report.json"), report.to_json()).map_err(io_err(&run_dir))?;
    fs::write(run_dir.join("report.txt"), report.to_text()).map_err(io_err(&run_dir))?;
    Ok((report, run_dir))
}

fn fresh_dir(parent: &Path, name: &str) -> Result<PathBuf, SuiteError> {
    fs::create_dir_all(parent).map_err(io_err(parent))?;
    for i in 0.. {
        let candidate = if i == 0 {
            parent.join(name)
        } else {
            parent.join(format!("{name}-{i}"))
        };
        match fs::create_dir(&candidate) {
            Ok(()) => return Ok(candidate),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(source) => return Err(SuiteError::Io { path: candidate, source }),
        }
    }
    unreachable!()
}

/// Re-reads `report.json` from a run directory and recomputes the
/// aggregate from its per-task outcomes.
pub fn load_report(run_dir: &Path) -> Result<(RunReport, Aggregate), SuiteError> {
    let path = run_dir.join("report.json");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let report: RunReport = serde_json::from_str(&text).map_err(|e| SuiteError::Report {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let recomputed = Aggregate::from_outcomes(&report.tasks);
    Ok((report, recomputed))
}
