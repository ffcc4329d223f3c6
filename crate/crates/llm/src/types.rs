use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    /// Number of samples to draw for the same prompt.
    pub n: u32,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GenerationRequest {
    pub fn new(messages: Vec<ChatMessage>, temperature: f64) -> Self {
        GenerationRequest {
            messages,
            temperature,
            n: 1,
            max_tokens: 4096,
            seed: None,
        }
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    /// The content of the last user message, or "" when there is none.
    pub fn last_user_message(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map_or("", |m| m.content.as_str())
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(LlmError::InvalidRequest(format!("temperature {} must be >= 0", self.temperature)));
        }
        if self.n == 0 {
            return Err(LlmError::InvalidRequest("n must be at least 1".into()));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::InvalidRequest("max_tokens must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprob {
    pub token: String,
    /// Natural log of the token's probability; finite and <= 0.
    pub logprob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub text: String,
    /// Empty when the endpoint did not return log-probabilities.
    pub tokens: Vec<TokenLogprob>,
    pub finish_reason: Option<String>,
}

impl GenerationResult {
    pub fn has_logprobs(&self) -> bool {
        !self.tokens.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    /// Retryable failures (connection, timeout, 429/5xx) that persisted
    /// through every attempt.
    #[error("transport error after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint returned {status}: {body}")]
    Endpoint { status: u16, body: String },
    #[error("malformed endpoint response: {0}")]
    Decode(String),
    #[error("temperature_distribution: {0}")]
    Domain(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl LlmError {
    pub fn code(&self) -> &'static str {
        match self {
            LlmError::InvalidRequest(_) => "INVALID_REQUEST",
            LlmError::Transport { .. } => "TRANSPORT_ERROR",
            LlmError::Endpoint { .. } => "ENDPOINT_ERROR",
            LlmError::Decode(_) => "DECODE_ERROR",
            LlmError::Domain(_) => "DOMAIN_ERROR",
            LlmError::Cache(_) => "CACHE_ERROR",
            LlmError::Config(_) => "CONFIG_ERROR",
        }
    }
}

/// A source of chat completions.
pub trait Backend: Send + Sync {
    /// Stable identity used to key cached responses.
    fn id(&self) -> String;

    /// Returns exactly `req.n` results.
    fn generate(&self, req: &GenerationRequest) -> Result<Vec<GenerationResult>, LlmError>;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn id(&self) -> String {
        (**self).id()
    }

    fn generate(&self, req: &GenerationRequest) -> Result<Vec<GenerationResult>, LlmError> {
        (**self).generate(req)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn generate(&self, req: &GenerationRequest) -> Result<Vec<GenerationResult>, LlmError> {
        (**self).generate(req)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn generate(&self, req: &GenerationRequest) -> Result<Vec<GenerationResult>, LlmError> {
        (**self).generate(req)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        })
    }
}
