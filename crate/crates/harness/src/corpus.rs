//! Task corpora on disk.
//!
//! ```text
//! corpus/<task-id>/task.json
//! corpus/<task-id>/input.txt | input.pddl
//! corpus/<task-id>/domain.pddl             (nl2problem: the domain to target)
//! corpus/<task-id>/reference.domain.pddl   (optional)
//! corpus/<task-id>/reference.problem.pddl  (optional)
//! corpus/<task-id>/reference.plan          (optional)
//! ```
//!
//! `task.json` names the kind and may override any of the file names:
//! `{"kind": "nl2domain", "input": "input.txt", "reference_plan": "gold.plan"}`.

use std::fs;
use std::path::{Path, PathBuf};

use pddl_core::{parse_domain, parse_problem};
use pddl_planner::parse_plan;
use pddl_synth::{SynthesisTask, TaskKind};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CORPUS_EMPTY: no task directories under {0}")]
    Empty(PathBuf),
    #[error("task `{id}`: {message}")]
    InvalidTask { id: String, message: String },
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::Io { .. } => "IO_ERROR",
            CorpusError::Empty(_) => "CORPUS_EMPTY",
            CorpusError::InvalidTask { .. } => "INVALID_TASK",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    kind: TaskKind,
    input: Option<String>,
    domain: Option<String>,
    reference_domain: Option<String>,
    reference_problem: Option<String>,
    reference_plan: Option<String>,
    #[serde(default)]
    #[allow(dead_code)]
    note: Option<String>,
}

/// A file path together with its contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loaded {
    pub path: PathBuf,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskRecord {
    pub id: String,
    pub kind: TaskKind,
    pub input: Loaded,
    /// Target domain for NL2Problem tasks.
    pub domain: Option<Loaded>,
    pub reference_domain: Option<Loaded>,
    pub reference_problem: Option<Loaded>,
    pub reference_plan: Option<Loaded>,
}

impl TaskRecord {
    pub fn synthesis_task(&self) -> SynthesisTask {
        let mut t = SynthesisTask::new(self.kind, self.input.text.clone());
        t.domain_text = self.domain.as_ref().map(|d| d.text.clone());
        t
    }
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads every task directory under `root`, sorted by id. Referenced files
/// must exist and parse.
pub fn load_corpus(root: &Path) -> Result<Vec<TaskRecord>, CorpusError> {
    let entries = fs::read_dir(root).map_err(|source| CorpusError::Io {
        path: root.to_path_buf(),
        source,
    })?;
    let mut dirs = Vec::new();
    for e in entries {
        let e = e.map_err(|source| CorpusError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        if e.path().join("task.json").is_file() {
            dirs.push(e.path());
        }
    }
    dirs.sort();
    if dirs.is_empty() {
        return Err(CorpusError::Empty(root.to_path_buf()));
    }
    dirs.iter().map(|d| load_task(d)).collect()
}

pub fn load_task(dir: &Path) -> Result<TaskRecord, CorpusError> {
    let id = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let invalid = |message: String| CorpusError::InvalidTask { id: id.clone(), message };
    let file: TaskFile =
        serde_json::from_str(&read(&dir.join("task.json"))?).map_err(|e| invalid(format!("task.json: {e}")))?;

    let named = |name: &Option<String>, default: &str, required: bool| -> Result<Option<Loaded>, CorpusError> {
        let path = dir.join(name.as_deref().unwrap_or(default));
        if name.is_none() && !required && !path.exists() {
            return Ok(None);
        }
        Ok(Some(Loaded {
            text: read(&path)?,
            path,
        }))
    };
    let input_name = match &file.input {
        Some(n) => n.clone(),
        None => default_input(dir).ok_or_else(|| invalid("no input.* file".into()))?,
    };
    let input = named(&Some(input_name), "", true)?.expect("required");
    let domain = named(&file.domain, "domain.pddl", file.kind == TaskKind::Nl2Problem)?;
    let reference_domain = named(&file.reference_domain, "reference.domain.pddl", false)?;
    let reference_problem = named(&file.reference_problem, "reference.problem.pddl", false)?;
    let reference_plan = named(&file.reference_plan, "reference.plan", false)?;

    if let Some(d) = reference_domain.as_ref().or(domain.as_ref()) {
        parse_domain(&d.text).map_err(|e| invalid(format!("{}: {}", d.path.display(), e.render(&d.text))))?;
    }
    if let Some(p) = &reference_problem {
        parse_problem(&p.text).map_err(|e| invalid(format!("{}: {}", p.path.display(), e.render(&p.text))))?;
    }
    if let Some(p) = &reference_plan {
        parse_plan(&p.text).map_err(|e| invalid(format!("{}: line {}: {}", p.path.display(), e.line, e.message)))?;
        if reference_problem.is_none() {
            return Err(invalid("a reference plan needs a reference problem".into()));
        }
    }
    let record = TaskRecord {
        id: id.clone(),
        kind: file.kind,
        input,
        domain,
        reference_domain,
        reference_problem,
        reference_plan,
    };
    record.synthesis_task().validate().map_err(|e| invalid(e.to_string()))?;
    Ok(record)
}

fn default_input(dir: &Path) -> Option<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("input."))
        .collect();
    names.sort();
    names.into_iter().next()
}
