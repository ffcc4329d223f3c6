//! Strict JSON run configuration.
//!
//! Every key is optional and unknown keys are rejected. Relative paths are
//! resolved against the directory holding the config file.
//!
//! ```json
//! {
//!   "backend":  { "kind": "http", "base_url": "http://localhost:8000/v1", "model": "m",
//!                 "max_inflight": 8, "timeout_seconds": 120, "mock_script": "mock.json" },
//!   "sampling": { "n": 8, "k": 1, "temperature": 0.7, "max_tokens": 4096, "seed": 0 },
//!   "ivml":     { "epochs": 5, "early_stop": true, "temperature": 0.7 },
//!   "planner":  { "algorithm": "gbfs", "heuristic": "hadd", "max_seconds": 60, "max_expansions": null },
//!   "cache":    { "dir": ".llm-cache" },
//!   "suite":    { "workers": 4, "strict_init": false }
//! }
//! ```

use std::path::{Path, PathBuf};

use pddl_planner::{Algorithm, Heuristic, Limits};
use pddl_synth::SynthesisConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("UNKNOWN_KEY: `{0}`")]
    UnknownKey(String),
    #[error("TYPE_ERROR: `{key}` must be {expected}")]
    TypeError { key: String, expected: &'static str },
    #[error("INVALID_VALUE: {0}")]
    Invalid(String),
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Io { .. } => "IO_ERROR",
            ConfigError::Json(_) => "JSON_ERROR",
            ConfigError::UnknownKey(_) => "UNKNOWN_KEY",
            ConfigError::TypeError { .. } => "TYPE_ERROR",
            ConfigError::Invalid(_) => "INVALID_VALUE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Mock,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "http" => Ok(BackendKind::Http),
            "mock" => Ok(BackendKind::Mock),
            other => Err(format!("unknown backend `{other}` (expected http or mock)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub max_inflight: usize,
    pub timeout_seconds: f64,
    pub mock_script: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub algorithm: String,
    pub heuristic: String,
    pub max_seconds: Option<f64>,
    pub max_expansions: Option<u64>,
}

impl PlannerConfig {
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm.parse().expect("checked at load")
    }

    pub fn heuristic(&self) -> Heuristic {
        self.heuristic.parse().expect("checked at load")
    }

    pub fn limits(&self) -> Limits {
        Limits {
            max_expansions: self.max_expansions,
            max_seconds: self.max_seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub backend: BackendConfig,
    pub synthesis: SynthesisConfig,
    pub planner: PlannerConfig,
    pub cache_dir: Option<PathBuf>,
    pub workers: usize,
    pub strict_init: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            backend: BackendConfig {
                kind: BackendKind::Mock,
                base_url: None,
                model: None,
                max_inflight: 8,
                timeout_seconds: 120.0,
                mock_script: None,
            },
            synthesis: SynthesisConfig::default(),
            planner: PlannerConfig {
                algorithm: "gbfs".into(),
                heuristic: "hadd".into(),
                max_seconds: Some(60.0),
                max_expansions: None,
            },
            cache_dir: None,
            workers: 4,
            strict_init: false,
        }
    }
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

/// Parses config JSON; relative paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<Config, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    let mut c = Config::default();
    let top = object(&root, "", &["backend", "sampling", "ivml", "planner", "cache", "suite"])?;
    let path = |s: String| -> PathBuf {
        let p = PathBuf::from(s);
        if p.is_relative() {
            base.join(p)
        } else {
            p
        }
    };

    if let Some(v) = top.get("backend") {
        let o = object(v, "backend", &["kind", "base_url", "model", "max_inflight", "timeout_seconds", "mock_script"])?;
        if let Some(s) = string(o, "backend", "kind")? {
            c.backend.kind = s.parse().map_err(ConfigError::Invalid)?;
        }
        c.backend.base_url = string(o, "backend", "base_url")?.or(c.backend.base_url);
        c.backend.model = string(o, "backend", "model")?.or(c.backend.model);
        if let Some(n) = uint(o, "backend", "max_inflight")? {
            c.backend.max_inflight = n as usize;
        }
        if let Some(x) = number(o, "backend", "timeout_seconds")? {
            c.backend.timeout_seconds = x;
        }
        c.backend.mock_script = string(o, "backend", "mock_script")?.map(path);
    }
    if let Some(v) = top.get("sampling") {
        let o = object(v, "sampling", &["n", "k", "temperature", "max_tokens", "seed", "length_normalize", "parallel"])?;
        let s = &mut c.synthesis;
        if let Some(n) = uint(o, "sampling", "n")? {
            s.n = n as usize;
        }
        if let Some(k) = uint(o, "sampling", "k")? {
            s.k = k as usize;
        }
        if let Some(t) = number(o, "sampling", "temperature")? {
            s.temperature = t;
        }
        if let Some(m) = uint(o, "sampling", "max_tokens")? {
            s.max_tokens = u32::try_from(m).map_err(|_| type_error("sampling", "max_tokens", "a 32-bit integer"))?;
        }
        if let Some(seed) = uint(o, "sampling", "seed")? {
            s.seed = seed;
        }
        if let Some(b) = boolean(o, "sampling", "length_normalize")? {
            s.length_normalize = b;
        }
        if let Some(b) = boolean(o, "sampling", "parallel")? {
            s.parallel = b;
        }
    }
    if let Some(v) = top.get("ivml") {
        let o = object(v, "ivml", &["epochs", "early_stop", "temperature"])?;
        if let Some(e) = uint(o, "ivml", "epochs")? {
            c.synthesis.epochs = e as usize;
        }
        if let Some(b) = boolean(o, "ivml", "early_stop")? {
            c.synthesis.early_stop_on_pass = b;
        }
        if let Some(t) = number(o, "ivml", "temperature")? {
            c.synthesis.ivml_temperature = t;
        }
    }
    if let Some(v) = top.get("planner") {
        let o = object(v, "planner", &["algorithm", "heuristic", "max_seconds", "max_expansions"])?;
        if let Some(a) = string(o, "planner", "algorithm")? {
            a.parse::<Algorithm>().map_err(ConfigError::Invalid)?;
            c.planner.algorithm = a;
        }
        if let Some(h) = string(o, "planner", "heuristic")? {
            h.parse::<Heuristic>().map_err(ConfigError::Invalid)?;
            c.planner.heuristic = h;
        }
        if o.contains_key("max_seconds") {
            c.planner.max_seconds = number(o, "planner", "max_seconds")?;
        }
        if o.contains_key("max_expansions") {
            c.planner.max_expansions = uint(o, "planner", "max_expansions")?;
        }
    }
    if let Some(v) = top.get("cache") {
        let o = object(v, "cache", &["dir"])?;
        c.cache_dir = string(o, "cache", "dir")?.map(path);
    }
    if let Some(v) = top.get("suite") {
        let o = object(v, "suite", &["workers", "strict_init"])?;
        if let Some(w) = uint(o, "suite", "workers")? {
            c.workers = (w as usize).max(1);
        }
        if let Some(b) = boolean(o, "suite", "strict_init")? {
            c.strict_init = b;
        }
    }
    c.synthesis
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(c)
}

fn key(section: &str, name: &str) -> String {
    if section.is_empty() {
        name.to_string()
    } else {
        format!("{section}.{name}")
    }
}

fn type_error(section: &str, name: &str, expected: &'static str) -> ConfigError {
    ConfigError::TypeError {
        key: key(section, name),
        expected,
    }
}

fn object<'a>(v: &'a Value, section: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>, ConfigError> {
    let o = v.as_object().ok_or_else(|| ConfigError::TypeError {
        key: if section.is_empty() { "<root>".into() } else { section.to_string() },
        expected: "an object",
    })?;
    if let Some(unknown) = o.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey(key(section, unknown)));
    }
    Ok(o)
}

/// `Ok(None)` when the key is absent or null.
fn field<'a>(o: &'a Map<String, Value>, name: &str) -> Option<&'a Value> {
    o.get(name).filter(|v| !v.is_null())
}

fn string(o: &Map<String, Value>, section: &str, name: &str) -> Result<Option<String>, ConfigError> {
    field(o, name)
        .map(|v| v.as_str().map(str::to_string).ok_or_else(|| type_error(section, name, "a string")))
        .transpose()
}

fn uint(o: &Map<String, Value>, section: &str, name: &str) -> Result<Option<u64>, ConfigError> {
    field(o, name)
        .map(|v| v.as_u64().ok_or_else(|| type_error(section, name, "a non-negative integer")))
        .transpose()
}

fn number(o: &Map<String, Value>, section: &str, name: &str) -> Result<Option<f64>, ConfigError> {
    field(o, name)
        .map(|v| v.as_f64().ok_or_else(|| type_error(section, name, "a number")))
        .transpose()
}

fn boolean(o: &Map<String, Value>, section: &str, name: &str) -> Result<Option<bool>, ConfigError> {
    field(o, name)
        .map(|v| v.as_bool().ok_or_else(|| type_error(section, name, "a boolean")))
        .transpose()
}
