use std::fmt;

use llm_backend::LlmError;
use pddl_core::parse_problem;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    /// Natural-language description to domain.
    #[serde(rename = "nl2domain")]
    Nl2Domain,
    /// PDDL problem to the domain it instantiates.
    #[serde(rename = "prob2domain")]
    Prob2Domain,
    /// Natural-language description (plus domain) to problem.
    #[serde(rename = "nl2problem")]
    Nl2Problem,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Nl2Domain => "nl2domain",
            TaskKind::Prob2Domain => "prob2domain",
            TaskKind::Nl2Problem => "nl2problem",
        }
    }

    /// Whether the synthesized artifact is a problem rather than a domain.
    pub fn produces_problem(self) -> bool {
        self == TaskKind::Nl2Problem
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nl2domain" => Ok(TaskKind::Nl2Domain),
            "prob2domain" => Ok(TaskKind::Prob2Domain),
            "nl2problem" => Ok(TaskKind::Nl2Problem),
            other => Err(format!("unknown task kind `{other}` (expected nl2domain, prob2domain or nl2problem)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisTask {
    pub kind: TaskKind,
    /// The task input: a description, or problem text for Prob2Domain.
    pub g_text: String,
    /// The domain a synthesized problem must fit (NL2Problem only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_text: Option<String>,
}

impl SynthesisTask {
    pub fn new(kind: TaskKind, g_text: impl Into<String>) -> Self {
        SynthesisTask {
            kind,
            g_text: g_text.into(),
            domain_text: None,
        }
    }

    pub fn nl2domain(g_text: impl Into<String>) -> Self {
        Self::new(TaskKind::Nl2Domain, g_text)
    }

    pub fn with_domain(mut self, domain_text: impl Into<String>) -> Self {
        self.domain_text = Some(domain_text.into());
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.g_text.trim().is_empty() {
            return Err(SynthError::InvalidTask("task text is empty".into()));
        }
        match self.kind {
            TaskKind::Prob2Domain => {
                parse_problem(&self.g_text)
                    .map_err(|e| SynthError::InvalidTask(format!("input problem: {}", e.render(&self.g_text))))?;
            }
            TaskKind::Nl2Problem => {
                let d = self.domain_text.as_deref().unwrap_or("");
                pddl_core::parse_domain(d)
                    .map_err(|e| SynthError::InvalidTask(format!("NL2Problem needs a valid domain: {}", e.render(d))))?;
            }
            TaskKind::Nl2Domain => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Samples drawn by best-of-N.
    pub n: usize,
    /// Candidates retained, one refinement chain each.
    pub k: usize,
    /// Refinement epochs per chain.
    pub epochs: usize,
    /// Sampling temperature for best-of-N.
    pub temperature: f64,
    /// Temperature for the feedback and update calls.
    pub ivml_temperature: f64,
    /// Stop a chain once its artifact validates.
    pub early_stop_on_pass: bool,
    pub max_tokens: u32,
    pub seed: u64,
    /// Divide the summed log-likelihood by the token count.
    pub length_normalize: bool,
    /// Run samples and chains on the rayon pool.
    pub parallel: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            n: 8,
            k: 1,
            epochs: 5,
            temperature: 0.7,
            ivml_temperature: 0.7,
            early_stop_on_pass: true,
            max_tokens: 4096,
            seed: 0,
            length_normalize: false,
            parallel: true,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let err = |m: String| Err(SynthError::InvalidConfig(m));
        if self.n == 0 || self.k == 0 || self.k > self.n {
            return err(format!("need 1 <= k <= n, got n = {}, k = {}", self.n, self.k));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return err(format!("temperature must be positive, got {}", self.temperature));
        }
        if !(self.ivml_temperature > 0.0 && self.ivml_temperature.is_finite()) {
            return err(format!("ivml temperature must be positive, got {}", self.ivml_temperature));
        }
        if self.max_tokens == 0 {
            return err("max_tokens must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("NO_DOMAIN_FOUND: no PDDL block in the model output")]
    NoDomainFound,
    #[error("all {samples} samples were unparseable")]
    AllCandidatesUnparseable { samples: usize },
    #[error("backend: {0}")]
    Backend(#[from] LlmError),
    #[error("every refinement chain failed; first error: {0}")]
    AllChainsFailed(String),
    #[error("no candidates to refine")]
    NoCandidates,
    #[error("artifact i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl SynthError {
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::InvalidConfig(_) => "INVALID_CONFIG",
            SynthError::InvalidTask(_) => "INVALID_TASK",
            SynthError::NoDomainFound => "NO_DOMAIN_FOUND",
            SynthError::AllCandidatesUnparseable { .. } => "ALL_CANDIDATES_UNPARSEABLE",
            SynthError::Backend(_) => "BACKEND_ERROR",
            SynthError::AllChainsFailed(_) => "ALL_CHAINS_FAILED",
            SynthError::NoCandidates => "NO_CANDIDATES",
            SynthError::Io(_) => "IO_ERROR",
        }
    }
}
