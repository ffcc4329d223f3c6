//! The `pddl` command line.
//!
//! Exit status: 0 on success, 1 when the task itself fails (invalid input,
//! no plan, synthesis that does not validate), 2 on usage, configuration
//! or I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use llm_backend::{Backend, CachedBackend, HttpBackend, HttpConfig, Metered, MockBackend, MockScript, Usage};
use pddl_core::{check_domain, check_problem, parse_document, parse_domain, parse_problem, render_domain, render_problem, Document};
use pddl_planner::{ground, parse_plan, render_plan, search, validate_plan, Algorithm, Heuristic, SearchOutcome};
use pddl_synth::{synthesize, write_artifacts, SynthesisTask, TaskKind};
use serde::Serialize;

use crate::config::{load_config, BackendKind, Config};
use crate::suite::{load_report, run_suite, Pipeline};

#[derive(Debug, Parser)]
#[command(name = "pddl", version, about = "PDDL parsing, validation, planning and synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a domain or problem and print it in canonical form.
    Parse { file: PathBuf },
    /// Check a domain, and optionally a problem against it.
    Validate { domain: PathBuf, problem: Option<PathBuf> },
    /// Ground a task and list its actions.
    Ground {
        domain: PathBuf,
        problem: PathBuf,
        /// Print grounding statistics only.
        #[arg(long)]
        stats: bool,
    },
    /// Search for a plan.
    Plan {
        domain: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check a plan against a domain and problem.
    ValidatePlan { domain: PathBuf, problem: PathBuf, plan: PathBuf },
    /// Synthesize a domain or problem with best-of-N sampling and refinement.
    Synthesize {
        /// nl2domain, prob2domain or nl2problem.
        #[arg(long)]
        task: TaskKind,
        /// Task input: a description, or a problem for prob2domain.
        #[arg(long)]
        input: PathBuf,
        /// The domain a synthesized problem must fit (nl2problem).
        #[arg(long)]
        domain: Option<PathBuf>,
        #[command(flatten)]
        synth: SynthArgs,
        /// Directory for candidates, chains, the final artifact and report.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run a pipeline over a task corpus.
    Bench {
        /// Directory of task directories, each with a task.json.
        #[arg(long)]
        corpus: PathBuf,
        /// `bon` or `bon+ivml`.
        #[arg(long, default_value = "bon+ivml")]
        pipeline: Pipeline,
        #[command(flatten)]
        synth: SynthArgs,
        /// Tasks run in parallel.
        #[arg(long)]
        workers: Option<usize>,
        /// A fresh run-<timestamp> directory is created inside.
        #[arg(long, default_value = "runs")]
        out_dir: PathBuf,
    },
    /// Recompute and print the metrics of a finished run.
    Report {
        /// A run directory written by `bench`.
        #[arg(long)]
        run_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, default_value = "gbfs")]
    alg: Algorithm,
    #[arg(long, default_value = "hadd")]
    heur: Heuristic,
    #[arg(long)]
    max_seconds: Option<f64>,
    #[arg(long)]
    max_expansions: Option<u64>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Samples drawn per task.
    #[arg(long)]
    n: Option<usize>,
    /// Candidates kept for refinement.
    #[arg(long)]
    k: Option<usize>,
    /// Refinement epochs per chain.
    #[arg(long)]
    epochs: Option<usize>,
    /// Sampling and refinement temperature.
    #[arg(long)]
    temp: Option<f64>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// `http` or `mock`.
    #[arg(long)]
    backend: Option<BackendKind>,
    /// Mock script (JSON) for `--backend mock`.
    #[arg(long)]
    mock_script: Option<PathBuf>,
    /// Endpoint root, e.g. http://localhost:8000.
    #[arg(long)]
    base_url: Option<String>,
    /// Model name sent to the endpoint.
    #[arg(long)]
    model: Option<String>,
    /// Reuse responses cached in this directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

/// A failure with its exit status.
struct Fail(i32, String);

type Outcome = Result<i32, Fail>;

fn usage(msg: impl std::fmt::Display) -> Fail {
    Fail(2, msg.to_string())
}

fn task_failure(msg: impl std::fmt::Display) -> Fail {
    Fail(1, msg.to_string())
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Runs the command line `args` (program name first) and returns the exit
/// status; normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{e}");
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "{msg}");
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Parse { file } => cmd_parse(&file, out),
        Command::Validate { domain, problem } => cmd_validate(&domain, problem.as_deref(), out),
        Command::Ground { domain, problem, stats } => cmd_ground(&domain, &problem, stats, out),
        Command::Plan { domain, problem, search } => cmd_plan(&domain, &problem, &search, out),
        Command::ValidatePlan { domain, problem, plan } => cmd_validate_plan(&domain, &problem, &plan, out),
        Command::Synthesize {
            task,
            input,
            domain,
            synth,
            out_dir,
        } => cmd_synthesize(task, &input, domain.as_deref(), &synth, &out_dir, out),
        Command::Bench {
            corpus,
            pipeline,
            synth,
            workers,
            out_dir,
        } => cmd_bench(&corpus, pipeline, &synth, workers, &out_dir, out),
        Command::Report { run_dir } => cmd_report(&run_dir, out),
    }
}

fn emit(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), Fail> {
    write!(out, "{text}").map_err(|e| usage(format!("write failed: {e}")))
}

fn cmd_parse(file: &Path, out: &mut dyn Write) -> Outcome {
    let text = read(file)?;
    match parse_document(&text) {
        Ok(Document::Domain(d)) => emit(out, render_domain(&d))?,
        Ok(Document::Problem(p)) => emit(out, render_problem(&p))?,
        Err(e) => return Err(task_failure(format!("{}: {}", file.display(), e.render(&text)))),
    }
    Ok(0)
}

fn load_domain(path: &Path) -> Result<(String, pddl_core::Domain), Fail> {
    let text = read(path)?;
    let d = parse_domain(&text).map_err(|e| task_failure(format!("{}: {}", path.display(), e.render(&text))))?;
    Ok((text, d))
}

fn load_problem(path: &Path) -> Result<(String, pddl_core::Problem), Fail> {
    let text = read(path)?;
    let p = parse_problem(&text).map_err(|e| task_failure(format!("{}: {}", path.display(), e.render(&text))))?;
    Ok((text, p))
}

fn cmd_validate(domain: &Path, problem: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let (dtext, d) = load_domain(domain)?;
    let report = check_domain(&d);
    emit(out, report.to_text(&dtext))?;
    emit(out, format!("{}: {}\n", domain.display(), report.summary()))?;
    let mut passed = report.passed();
    if let Some(problem) = problem {
        let (ptext, p) = load_problem(problem)?;
        let report = check_problem(&p, &d);
        emit(out, report.to_text(&ptext))?;
        emit(out, format!("{}: {}\n", problem.display(), report.summary()))?;
        passed &= report.passed();
    }
    Ok(if passed { 0 } else { 1 })
}

fn cmd_ground(domain: &Path, problem: &Path, stats_only: bool, out: &mut dyn Write) -> Outcome {
    let (_, d) = load_domain(domain)?;
    let (_, p) = load_problem(problem)?;
    let task = ground(&d, &p).map_err(task_failure)?;
    if !stats_only {
        for a in &task.actions {
            emit(out, format!("{}\n", a.label()))?;
        }
    }
    let s = &task.stats;
    emit(
        out,
        format!(
            "objects {}\nstatic predicates {}\ninstantiated {}\npruned {}\nactions {}\natoms {}\n",
            s.objects,
            if s.static_predicates.is_empty() { "-".to_string() } else { s.static_predicates.join(" ") },
            s.instantiated,
            s.pruned,
            s.actions,
            s.atoms
        ),
    )?;
    Ok(0)
}

fn cmd_plan(domain: &Path, problem: &Path, args: &SearchArgs, out: &mut dyn Write) -> Outcome {
    let (_, d) = load_domain(domain)?;
    let (_, p) = load_problem(problem)?;
    let task = ground(&d, &p).map_err(task_failure)?;
    let limits = pddl_planner::Limits {
        max_expansions: args.max_expansions,
        max_seconds: args.max_seconds,
    };
    let result = search(&task, args.alg, args.heur, limits);
    let s = result.stats;
    let stats = format!(
        "; {} {}: {} expansions, {} generated, {:.3} s",
        args.alg, args.heur, s.expansions, s.generated, s.seconds
    );
    match result.outcome {
        SearchOutcome::Plan(plan) => {
            emit(out, render_plan(&plan, !task.has_metric))?;
            emit(out, format!("{stats}\n"))?;
            Ok(0)
        }
        SearchOutcome::NoPlan => Err(task_failure(format!("NoPlan\n{stats}"))),
        SearchOutcome::LimitHit => Err(task_failure(format!("LimitHit\n{stats}"))),
    }
}

fn cmd_validate_plan(domain: &Path, problem: &Path, plan: &Path, out: &mut dyn Write) -> Outcome {
    let (_, d) = load_domain(domain)?;
    let (_, p) = load_problem(problem)?;
    let text = read(plan)?;
    let file = parse_plan(&text)
        .map_err(|e| task_failure(format!("{}: line {}: {}", plan.display(), e.line, e.message)))?;
    let verdict = validate_plan(&d, &p, &file.steps);
    emit(out, format!("{verdict}\n"))?;
    Ok(if verdict.is_valid() { 0 } else { 1 })
}

fn resolve_config(args: &SynthArgs) -> Result<Config, Fail> {
    let mut c = match &args.config {
        Some(path) => load_config(path).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => Config::default(),
    };
    let s = &mut c.synthesis;
    s.n = args.n.unwrap_or(s.n);
    s.k = args.k.unwrap_or(s.k);
    s.epochs = args.epochs.unwrap_or(s.epochs);
    if let Some(t) = args.temp {
        s.temperature = t;
        s.ivml_temperature = t;
    }
    s.seed = args.seed.unwrap_or(s.seed);
    s.validate().map_err(usage)?;
    let b = &mut c.backend;
    b.kind = args.backend.unwrap_or(b.kind);
    if args.mock_script.is_some() {
        b.mock_script = args.mock_script.clone();
    }
    if args.base_url.is_some() {
        b.base_url = args.base_url.clone();
    }
    if args.model.is_some() {
        b.model = args.model.clone();
    }
    if args.cache_dir.is_some() {
        c.cache_dir = args.cache_dir.clone();
    }
    Ok(c)
}

/// Builds the configured backend, behind the response cache when one is set.
pub fn build_backend(config: &Config) -> Result<Box<dyn Backend>, String> {
    let b = &config.backend;
    let inner: Box<dyn Backend> = match b.kind {
        BackendKind::Mock => {
            let path = b.mock_script.as_ref().ok_or("the mock backend needs a mock script (--mock-script)")?;
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let script = MockScript::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            Box::new(MockBackend::new(script).map_err(|e| e.to_string())?)
        }
        BackendKind::Http => {
            let base = b.base_url.as_deref().ok_or("the http backend needs backend.base_url (--base-url)")?;
            let model = b.model.as_deref().ok_or("the http backend needs backend.model (--model)")?;
            let mut cfg = HttpConfig::new(base, model).with_api_key_from_env();
            cfg.max_inflight = b.max_inflight.max(1);
            cfg.timeout = Duration::from_secs_f64(b.timeout_seconds.max(1.0));
            Box::new(HttpBackend::new(cfg).map_err(|e| e.to_string())?)
        }
    };
    match &config.cache_dir {
        Some(dir) => Ok(Box::new(CachedBackend::new(inner, dir).map_err(|e| e.to_string())?)),
        None => Ok(inner),
    }
}

/// `report.json` of a single `synthesize` run.
#[derive(Debug, Serialize)]
struct SynthesizeReport<'a> {
    task: TaskKind,
    backend: String,
    passed: bool,
    errors: usize,
    warnings: usize,
    final_file: &'a str,
    usage: Usage,
    seconds: f64,
}

fn cmd_synthesize(
    kind: TaskKind,
    input: &Path,
    domain: Option<&Path>,
    args: &SynthArgs,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Outcome {
    let config = resolve_config(args)?;
    let mut task = SynthesisTask::new(kind, read(input)?);
    if let Some(d) = domain {
        task = task.with_domain(read(d)?);
    }
    task.validate().map_err(usage)?;
    let backend = Metered::new(build_backend(&config).map_err(usage)?);
    let start = Instant::now();
    let result = synthesize(&task, &config.synthesis, &backend);
    fs::create_dir_all(out_dir).map_err(|e| usage(format!("{}: {e}", out_dir.display())))?;
    let run = match result {
        Ok(run) => run,
        Err(e) => {
            let usage_json = serde_json::to_string_pretty(&backend.usage()).expect("usage serializes");
            let _ = fs::write(out_dir.join("usage.json"), usage_json + "\n");
            return Err(task_failure(format!("{}: {e}", e.code())));
        }
    };
    let id = backend.id();
    write_artifacts(&run, &id, out_dir).map_err(|e| usage(format!("{}: {e}", out_dir.display())))?;
    let f = run.final_state();
    let report = SynthesizeReport {
        task: kind,
        backend: id,
        passed: f.passed(),
        errors: f.error_count(),
        warnings: f.check.warning_count(),
        final_file: run.final_file_name(),
        usage: backend.usage(),
        seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(out_dir.join("report.json"), json + "\n").map_err(|e| usage(format!("{}: {e}", out_dir.display())))?;
    emit(
        out,
        format!(
            "{}: {} ({} requests)\nwrote {}\n",
            report.final_file,
            format_args!("{} errors, {} warnings", report.errors, report.warnings),
            report.usage.requests,
            out_dir.join(report.final_file).display()
        ),
    )?;
    Ok(if report.passed { 0 } else { 1 })
}

fn cmd_bench(
    corpus: &Path,
    pipeline: Pipeline,
    args: &SynthArgs,
    workers: Option<usize>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Outcome {
    let mut config = resolve_config(args)?;
    if let Some(w) = workers {
        config.workers = w.max(1);
    }
    let backend = build_backend(&config).map_err(usage)?;
    let (report, run_dir) = run_suite(corpus, &config, pipeline, &backend, out_dir).map_err(usage)?;
    emit(out, report.to_text())?;
    emit(out, format!("run directory {}\n", run_dir.display()))?;
    Ok(0)
}

fn cmd_report(run_dir: &Path, out: &mut dyn Write) -> Outcome {
    let (report, recomputed) = load_report(run_dir).map_err(usage)?;
    emit(out, report.to_text())?;
    if recomputed != report.aggregate {
        return Err(task_failure("stored aggregate differs from the per-task outcomes"));
    }
    Ok(0)
}
