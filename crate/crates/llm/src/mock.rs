//! A deterministic, scripted backend.
//!
//! Rules are tried in order against the last user message; the first whose
//! substrings all occur wins, otherwise the fallback answers. A rule either
//! hands out its responses in sequence (the last one repeats) or picks one
//! by request seed, which keeps parallel callers reproducible. Sampled
//! responses draw every token from the temperature-scaled softmax of
//! scripted logits.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::sampling::{sample_index, temperature_distribution, MIN_TEMPERATURE};
use crate::types::{Backend, GenerationRequest, GenerationResult, LlmError, TokenLogprob};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MockResponse {
    /// Fixed text, optionally carrying a total log-likelihood as one token.
    Text {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        logprob: Option<f64>,
    },
    /// One token per position, drawn from `alphabet` with `logits[pos]`.
    Sampled { alphabet: Vec<String>, logits: Vec<Vec<f64>> },
}

impl MockResponse {
    pub fn text(text: impl Into<String>) -> Self {
        MockResponse::Text {
            text: text.into(),
            logprob: None,
        }
    }

    pub fn scored(text: impl Into<String>, logprob: f64) -> Self {
        MockResponse::Text {
            text: text.into(),
            logprob: Some(logprob),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pick {
    /// The k-th matching sample gets response k; the last one repeats.
    #[default]
    Sequence,
    /// Sample i of a request with seed s gets response (s + i) mod len.
    Seed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    /// Substrings that must all occur in the last user message.
    #[serde(default)]
    pub contains: Vec<String>,
    #[serde(default)]
    pub pick: Pick,
    pub responses: Vec<MockResponse>,
}

impl MockRule {
    pub fn new<S: Into<String>>(contains: impl IntoIterator<Item = S>, responses: Vec<MockResponse>) -> Self {
        MockRule {
            contains: contains.into_iter().map(Into::into).collect(),
            pick: Pick::Sequence,
            responses,
        }
    }

    pub fn by_seed(mut self) -> Self {
        self.pick = Pick::Seed;
        self
    }

    fn matches(&self, message: &str) -> bool {
        self.contains.iter().all(|c| message.contains(c.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default)]
    pub rules: Vec<MockRule>,
    pub fallback: MockResponse,
}

impl MockScript {
    pub fn new(rules: Vec<MockRule>, fallback: MockResponse) -> Self {
        MockScript { rules, fallback }
    }

    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        let script: MockScript = serde_json::from_str(text).map_err(|e| LlmError::Config(format!("mock script: {e}")))?;
        script.check()?;
        Ok(script)
    }

    fn check(&self) -> Result<(), LlmError> {
        for (i, r) in self.rules.iter().enumerate() {
            if r.responses.is_empty() {
                return Err(LlmError::Config(format!("mock rule {i} has no responses")));
            }
        }
        let responses = self.rules.iter().flat_map(|r| &r.responses).chain([&self.fallback]);
        for r in responses {
            match r {
                MockResponse::Text { logprob: Some(lp), .. } if !(lp.is_finite() && *lp <= 0.0) => {
                    return Err(LlmError::Config(format!("scripted logprob {lp} must be finite and <= 0")));
                }
                MockResponse::Sampled { alphabet, logits }
                    if alphabet.is_empty() || logits.iter().any(|row| row.len() != alphabet.len()) =>
                {
                    return Err(LlmError::Config("every logit row must cover the alphabet".into()));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Draws one token per position of `logits` at temperature `tau` (clamped
/// to [`MIN_TEMPERATURE`]); each emitted logprob is the log of the drawn
/// token's probability.
pub fn mock_sample(alphabet: &[String], logits: &[Vec<f64>], tau: f64, seed: u64) -> Result<GenerationResult, LlmError> {
    let tau = tau.max(MIN_TEMPERATURE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tokens = Vec::with_capacity(logits.len());
    for row in logits {
        let probs = temperature_distribution(row, tau)?;
        let k = sample_index(&probs, &mut rng);
        tokens.push(TokenLogprob {
            token: alphabet[k].clone(),
            logprob: probs[k].ln(),
        });
    }
    Ok(GenerationResult {
        text: tokens.iter().map(|t| t.token.as_str()).collect(),
        tokens,
        finish_reason: Some("stop".into()),
    })
}

#[derive(Debug)]
pub struct MockBackend {
    script: MockScript,
    id: String,
    counters: Mutex<Vec<usize>>,
    requests: AtomicU64,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Result<Self, LlmError> {
        script.check()?;
        let json = serde_json::to_vec(&script).map_err(|e| LlmError::Config(e.to_string()))?;
        let digest = hex::encode(Sha256::digest(&json));
        Ok(MockBackend {
            id: format!("mock:{}", &digest[..16]),
            counters: Mutex::new(vec![0; script.rules.len()]),
            script,
            requests: AtomicU64::new(0),
        })
    }

    /// A backend that answers every request with `text`.
    pub fn constant(text: impl Into<String>) -> Self {
        MockBackend::new(MockScript::new(Vec::new(), MockResponse::text(text))).expect("valid script")
    }

    pub fn script(&self) -> &MockScript {
        &self.script
    }

    /// Requests served so far.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    fn render(response: &MockResponse, tau: f64, seed: u64) -> Result<GenerationResult, LlmError> {
        match response {
            MockResponse::Text { text, logprob } => Ok(GenerationResult {
                text: text.clone(),
                tokens: logprob
                    .map(|lp| {
                        vec![TokenLogprob {
                            token: text.clone(),
                            logprob: lp,
                        }]
                    })
                    .unwrap_or_default(),
                finish_reason: Some("stop".into()),
            }),
            MockResponse::Sampled { alphabet, logits } => mock_sample(alphabet, logits, tau, seed),
        }
    }
}

impl Backend for MockBackend {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn generate(&self, req: &GenerationRequest) -> Result<Vec<GenerationResult>, LlmError> {
        req.validate()?;
        self.requests.fetch_add(1, Ordering::Relaxed);
        let message = req.last_user_message();
        let base_seed = req.seed.unwrap_or(0);
        let rule = self.script.rules.iter().position(|r| r.matches(message));
        let picks: Vec<&MockResponse> = match rule {
            None => vec![&self.script.fallback; req.n as usize],
            Some(ri) => {
                let r = &self.script.rules[ri];
                let last = r.responses.len() - 1;
                match r.pick {
                    Pick::Sequence => {
                        let mut counters = self.counters.lock().expect("mock counter lock");
                        (0..req.n)
                            .map(|_| {
                                let k = counters[ri];
                                counters[ri] += 1;
                                &r.responses[k.min(last)]
                            })
                            .collect()
                    }
                    Pick::Seed => (0..req.n as u64)
                        .map(|i| &r.responses[(base_seed.wrapping_add(i) % r.responses.len() as u64) as usize])
                        .collect(),
                }
            }
        };
        picks
            .into_iter()
            .enumerate()
            .map(|(i, resp)| Self::render(resp, req.temperature, base_seed.wrapping_add(i as u64)))
            .collect()
    }
}
