use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::types::{Backend, GenerationRequest, GenerationResult, LlmError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub requests: u64,
    pub failures: u64,
    pub samples: u64,
    pub tokens: u64,
}

/// Counts the traffic passing through to the wrapped backend.
#[derive(Debug, Default)]
pub struct Metered<B> {
    inner: B,
    requests: AtomicU64,
    failures: AtomicU64,
    samples: AtomicU64,
    tokens: AtomicU64,
}

impl<B> Metered<B> {
    pub fn new(inner: B) -> Self {
        Metered {
            inner,
            requests: AtomicU64::new(0),
            failures: AtomicU64::new(0),
            samples: AtomicU64::new(0),
            tokens: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn usage(&self) -> Usage {
        Usage {
            requests: self.requests.load(Ordering::Relaxed),
            failures: self.failures.load(Ordering::Relaxed),
            samples: self.samples.load(Ordering::Relaxed),
            tokens: self.tokens.load(Ordering::Relaxed),
        }
    }
}

impl<B: Backend> Backend for Metered<B> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn generate(&self, req: &GenerationRequest) -> Result<Vec<GenerationResult>, LlmError> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        match self.inner.generate(req) {
            Ok(results) => {
                self.samples.fetch_add(results.len() as u64, Ordering::Relaxed);
                let tokens: usize = results.iter().map(|r| r.tokens.len()).sum();
                self.tokens.fetch_add(tokens as u64, Ordering::Relaxed);
                Ok(results)
            }
            Err(e) => {
                self.failures.fetch_add(1, Ordering::Relaxed);
                Err(e)
            }
        }
    }
}
