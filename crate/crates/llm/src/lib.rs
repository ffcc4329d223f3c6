//! Chat-completion backends behind one [`Backend`] trait: an
//! OpenAI-compatible HTTP client, a scripted mock whose sampler applies the
//! temperature-scaled softmax token by token, a disk cache and a usage meter.

pub mod cache;
pub mod http;
pub mod metered;
pub mod mock;
pub mod sampling;
pub mod types;

pub use cache::{cache_key, CachedBackend};
pub use http::{HttpBackend, HttpConfig, API_KEY_ENV};
pub use metered::{Metered, Usage};
pub use mock::{mock_sample, MockBackend, MockResponse, MockRule, MockScript, Pick};
pub use sampling::{sample_index, temperature_distribution, MIN_TEMPERATURE};
pub use types::{Backend, ChatMessage, GenerationRequest, GenerationResult, LlmError, Role, TokenLogprob};
