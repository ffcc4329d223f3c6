//! Temperature-scaled softmax and seeded categorical sampling.

use rand::Rng;

use crate::types::LlmError;

/// Smallest temperature the sampler uses; lower values are clamped to it.
pub const MIN_TEMPERATURE: f64 = 1e-6;

/// `p_i = exp(l_i / τ) / Σ_j exp(l_j / τ)`.
///
/// The maximum logit is subtracted before exponentiating, so large logits or
/// small temperatures cannot overflow. Weights are summed smallest first,
/// which keeps the normalizer independent of logit order.
pub fn temperature_distribution(logits: &[f64], tau: f64) -> Result<Vec<f64>, LlmError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(LlmError::Domain(format!("temperature must be positive, got {tau}")));
    }
    if logits.is_empty() {
        return Err(LlmError::Domain("empty logit vector".into()));
    }
    if let Some(bad) = logits.iter().find(|l| !l.is_finite()) {
        return Err(LlmError::Domain(format!("non-finite logit {bad}")));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| ((l - max) / tau).exp()).collect();
    let mut sorted = weights.clone();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Draws an index from `probs` by inverse CDF.
pub fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave the cumulative sum just below 1.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
