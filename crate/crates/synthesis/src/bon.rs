//! Best-of-N initialization: sample, split, score, keep the top K.

use llm_backend::{Backend, GenerationRequest, LlmError, TokenLogprob};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use crate::check::{check_artifact, normalized_score, rank_order, score_candidate, Check};
use crate::prompts::build_cot_prompt;
use crate::split::split_cot_output;
use crate::task::{SynthError, SynthesisConfig, SynthesisTask};

/// One parsed generation.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Sample index within the BoN batch.
    pub index: usize,
    pub raw_text: String,
    pub thought: String,
    /// The extracted PDDL (a problem for NL2Problem tasks).
    pub domain_text: String,
    pub tokens: Vec<TokenLogprob>,
    pub length: usize,
    /// Summed (or length-normalized) log-likelihood; `None` when the
    /// backend returned no logprobs and fallback ranking applied.
    pub score: Option<f64>,
    pub check: Check,
}

/// What became of each of the N samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
    pub score: Option<f64>,
    /// Why the sample did not become a candidate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropped: Option<String>,
    pub retained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BonRun {
    pub samples: Vec<SampleRecord>,
    /// Retained candidates, best first.
    pub candidates: Vec<Candidate>,
}

/// Mixes a base seed with a path of indices (splitmix64 finalizer per step).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(base, |acc, &x| {
        let mut z = acc ^ x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    })
}

/// Sends one single-completion request and returns its only result.
pub(crate) fn generate_one(
    backend: &dyn Backend,
    messages: Vec<llm_backend::ChatMessage>,
    temperature: f64,
    max_tokens: u32,
    seed: u64,
) -> Result<llm_backend::GenerationResult, LlmError> {
    let req = GenerationRequest::new(messages, temperature)
        .with_seed(seed)
        .with_max_tokens(max_tokens);
    backend
        .generate(&req)?
        .into_iter()
        .next()
        .ok_or_else(|| LlmError::Decode("backend returned no completion".into()))
}

/// Top-K candidates, best first.
pub fn bon_sample(task: &SynthesisTask, config: &SynthesisConfig, backend: &dyn Backend) -> Result<Vec<Candidate>, SynthError> {
    bon_run(task, config, backend).map(|r| r.candidates)
}

/// Requests N completions (sample j carries seed `config.seed + j`), drops
/// those without a PDDL block, scores the rest and keeps the top K.
pub fn bon_run(task: &SynthesisTask, config: &SynthesisConfig, backend: &dyn Backend) -> Result<BonRun, SynthError> {
    config.validate()?;
    task.validate()?;
    let prompt = build_cot_prompt(task);
    let draw = |j: usize| {
        generate_one(
            backend,
            prompt.clone(),
            config.temperature,
            config.max_tokens,
            config.seed.wrapping_add(j as u64),
        )
    };
    let results: Vec<_> = if config.parallel {
        (0..config.n).into_par_iter().map(draw).collect()
    } else {
        (0..config.n).map(draw).collect()
    };

    let mut samples = Vec::with_capacity(config.n);
    let mut survivors = Vec::new();
    let mut first_error = None;
    for (index, result) in results.into_iter().enumerate() {
        let gen = match result {
            Ok(g) => g,
            Err(e) => {
                warn!(sample = index, error = %e, "generation failed");
                samples.push(SampleRecord {
                    index,
                    raw_text: None,
                    score: None,
                    dropped: Some(format!("{}: {e}", e.code())),
                    retained: false,
                });
                first_error.get_or_insert(e);
                continue;
            }
        };
        let score = if config.length_normalize {
            normalized_score(&gen.tokens)
        } else {
            score_candidate(&gen.tokens)
        };
        match split_cot_output(&gen.text) {
            Ok((thought, domain_text)) => {
                let check = check_artifact(task, &domain_text);
                samples.push(SampleRecord {
                    index,
                    raw_text: Some(gen.text.clone()),
                    score,
                    dropped: None,
                    retained: false,
                });
                survivors.push(Candidate {
                    index,
                    length: gen.tokens.len(),
                    raw_text: gen.text,
                    thought,
                    domain_text,
                    tokens: gen.tokens,
                    score,
                    check,
                });
            }
            Err(e) => {
                debug!(sample = index, "dropped: {e}");
                samples.push(SampleRecord {
                    index,
                    raw_text: Some(gen.text),
                    score,
                    dropped: Some(e.to_string()),
                    retained: false,
                });
            }
        }
    }
    if let Some(e) = first_error {
        if samples.iter().all(|s| s.raw_text.is_none()) {
            return Err(SynthError::Backend(e));
        }
    }
    if survivors.is_empty() {
        return Err(SynthError::AllCandidatesUnparseable { samples: config.n });
    }

    survivors.sort_by(|a, b| rank_order((a.score, a.check.badness(), a.index), (b.score, b.check.badness(), b.index)));
    survivors.truncate(config.k);
    for c in &survivors {
        samples[c.index].retained = true;
    }
    debug!(
        retained = ?survivors.iter().map(|c| (c.index, c.score)).collect::<Vec<_>>(),
        "best-of-n selection"
    );
    Ok(BonRun {
        samples,
        candidates: survivors,
    })
}
