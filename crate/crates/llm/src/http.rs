//! Blocking client for OpenAI-compatible `/v1/chat/completions` endpoints.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;
use tracing::{debug, warn};

use crate::types::{Backend, GenerationRequest, GenerationResult, LlmError, TokenLogprob};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "LLM_API_KEY";

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub max_inflight: usize,
    pub max_attempts: u32,
    /// First retry delay; doubled on every further attempt.
    pub backoff: Duration,
}

impl HttpConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        HttpConfig {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model: model.into(),
            api_key: None,
            timeout: Duration::from_secs(120),
            max_inflight: 8,
            max_attempts: 5,
            backoff: Duration::from_millis(500),
        }
    }

    /// Reads the API key from [`API_KEY_ENV`] when set.
    pub fn with_api_key_from_env(mut self) -> Self {
        self.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        self
    }
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct InFlight {
    active: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().expect("in-flight lock");
        while *active >= self.limit {
            active = self.freed.wait(active).expect("in-flight lock");
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().expect("in-flight lock") -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
    #[serde(default)]
    logprobs: Option<ChoiceLogprobs>,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct ChoiceLogprobs {
    #[serde(default)]
    content: Option<Vec<LogprobEntry>>,
}

#[derive(Deserialize)]
struct LogprobEntry {
    token: String,
    logprob: f64,
}

pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    inflight: InFlight,
    http_calls: AtomicU64,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, LlmError> {
        if config.max_inflight == 0 || config.max_attempts == 0 {
            return Err(LlmError::Config("max_inflight and max_attempts must be at least 1".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(HttpBackend {
            inflight: InFlight {
                active: Mutex::new(0),
                freed: Condvar::new(),
                limit: config.max_inflight,
            },
            config,
            client,
            http_calls: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    /// HTTP requests sent so far, retries included.
    pub fn http_calls(&self) -> u64 {
        self.http_calls.load(Ordering::Relaxed)
    }

    fn endpoint(&self) -> String {
        format!("{}/v1/chat/completions", self.config.base_url)
    }

    fn post(&self, body: &serde_json::Value) -> Result<String, LlmError> {
        let mut last = LlmError::Transport {
            attempts: 0,
            message: "no attempt made".into(),
        };
        for attempt in 0..self.config.max_attempts {
            if attempt > 0 {
                let delay = self.config.backoff.saturating_mul(1 << (attempt - 1).min(16));
                debug!(attempt, ?delay, "retrying chat completion");
                thread::sleep(delay);
            }
            let _permit = self.inflight.acquire();
            self.http_calls.fetch_add(1, Ordering::Relaxed);
            let mut builder = self.client.post(self.endpoint()).json(body);
            if let Some(key) = &self.config.api_key {
                builder = builder.bearer_auth(key);
            }
            match builder.send() {
                Err(e) => {
                    warn!(error = %e, attempt, "chat completion transport error");
                    last = LlmError::Transport {
                        attempts: attempt + 1,
                        message: e.to_string(),
                    };
                }
                Ok(resp) => {
                    let status = resp.status();
                    let text = resp.text().map_err(|e| LlmError::Transport {
                        attempts: attempt + 1,
                        message: e.to_string(),
                    });
                    match text {
                        Ok(text) if status.is_success() => return Ok(text),
                        Ok(text) => {
                            let err = LlmError::Endpoint {
                                status: status.as_u16(),
                                body: text,
                            };
                            if status.as_u16() != 429 && !status.is_server_error() {
                                return Err(err);
                            }
                            warn!(status = status.as_u16(), attempt, "chat completion retryable status");
                            last = err;
                        }
                        Err(e) => last = e,
                    }
                }
            }
        }
        Err(last)
    }

    fn decode(text: &str) -> Result<Vec<GenerationResult>, LlmError> {
        let resp: ChatResponse = serde_json::from_str(text).map_err(|e| LlmError::Decode(e.to_string()))?;
        let mut results = Vec::with_capacity(resp.choices.len());
        for choice in resp.choices {
            let text = choice.message.content.unwrap_or_default();
            let entries = choice.logprobs.and_then(|l| l.content).unwrap_or_default();
            let mut tokens: Vec<TokenLogprob> = entries
                .into_iter()
                .map(|e| TokenLogprob {
                    token: e.token,
                    // Endpoints occasionally report tiny positive values.
                    logprob: e.logprob.min(0.0),
                })
                .collect();
            if tokens.iter().any(|t| !t.logprob.is_finite()) {
                warn!("dropping non-finite logprobs");
                tokens.clear();
            }
            if tokens.is_empty() {
                debug!("endpoint returned no logprobs");
            }
            results.push(GenerationResult {
                text,
                tokens,
                finish_reason: choice.finish_reason,
            });
        }
        Ok(results)
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> String {
        format!("http:{}#{}", self.config.base_url, self.config.model)
    }

    /// Endpoints that ignore `n` are asked again until `req.n` results exist.
    fn generate(&self, req: &GenerationRequest) -> Result<Vec<GenerationResult>, LlmError> {
        req.validate()?;
        let mut results = Vec::with_capacity(req.n as usize);
        for _round in 0..req.n {
            let missing = req.n as usize - results.len();
            if missing == 0 {
                break;
            }
            let mut body = json!({
                "model": self.config.model,
                "messages": req.messages,
                "temperature": req.temperature,
                "n": missing,
                "max_tokens": req.max_tokens,
                "logprobs": true,
            });
            if let Some(seed) = req.seed {
                body["seed"] = json!(seed.wrapping_add(results.len() as u64));
            }
            let got = Self::decode(&self.post(&body)?)?;
            if got.is_empty() {
                return Err(LlmError::Decode("response has no choices".into()));
            }
            results.extend(got.into_iter().take(missing));
        }
        if results.len() < req.n as usize {
            return Err(LlmError::Decode(format!("expected {} choices, got {}", req.n, results.len())));
        }
        Ok(results)
    }
}
