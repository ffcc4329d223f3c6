//! Iterative refinement: an optimizer call critiques the current thought
//! and artifact, an update call rewrites both from that critique.
//!
//! Each retained candidate seeds its own chain. A chain keeps the best state
//! it has seen (passing first, then fewest errors), so a bad rewrite can be
//! explored but never returned.

use std::cmp::Ordering;

use llm_backend::Backend;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::{debug, info, warn};

use crate::bon::{derive_seed, generate_one, Candidate};
use crate::check::{check_artifact, Check};
use crate::prompts::{build_opt_prompt, build_update_prompt};
use crate::split::split_cot_output;
use crate::task::{SynthError, SynthesisConfig, SynthesisTask};

const ROLE_OPT: u64 = 0;
const ROLE_UPDATE: u64 = 1;
const ROLE_UPDATE_RETRY: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub text: String,
    pub produced_at_iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub iteration: usize,
    pub thought: String,
    /// The current PDDL (a problem for NL2Problem tasks).
    pub domain_text: String,
    pub feedback_history: Vec<Feedback>,
    pub check: Check,
    /// Sample index of the seeding candidate.
    pub origin_index: usize,
    pub origin_score: Option<f64>,
    /// The last update produced no PDDL; thought and artifact are unchanged.
    pub stalled: bool,
}

impl SolutionState {
    pub fn from_candidate(c: &Candidate) -> Self {
        SolutionState {
            iteration: 0,
            thought: c.thought.clone(),
            domain_text: c.domain_text.clone(),
            feedback_history: Vec::new(),
            check: c.check.clone(),
            origin_index: c.index,
            origin_score: c.score,
            stalled: false,
        }
    }

    pub fn passed(&self) -> bool {
        self.check.passed()
    }

    pub fn error_count(&self) -> usize {
        self.check.error_count()
    }
}

/// Within a chain: passing beats failing, then fewer errors.
fn quality(s: &SolutionState) -> (bool, usize) {
    (!s.passed(), s.error_count())
}

/// One optimizer call and one update call (retried once if it yields no
/// PDDL). A second empty update returns the prior artifact, flagged stalled.
pub fn ivml_step(
    task: &SynthesisTask,
    state: &SolutionState,
    config: &SynthesisConfig,
    backend: &dyn Backend,
) -> Result<SolutionState, SynthError> {
    let epoch = state.iteration as u64 + 1;
    let seed = |role| derive_seed(config.seed, &[state.origin_index as u64 + 1, epoch, role]);
    let temp = config.ivml_temperature;

    let opt = build_opt_prompt(task, &state.thought, &state.domain_text);
    let feedback = generate_one(backend, opt, temp, config.max_tokens, seed(ROLE_OPT))?.text;
    let feedback_text = feedback.trim();
    let mut next = state.clone();
    next.iteration += 1;
    next.stalled = false;
    next.feedback_history.push(Feedback {
        text: if feedback_text.is_empty() {
            "(no feedback)".to_string()
        } else {
            feedback_text.to_string()
        },
        produced_at_iteration: next.iteration,
    });
    if feedback_text.is_empty() {
        warn!(chain = state.origin_index, epoch, "optimizer returned no feedback; stalling");
        next.stalled = true;
        return Ok(next);
    }

    let update = build_update_prompt(task, &state.thought, &state.domain_text, feedback_text);
    for role in [ROLE_UPDATE, ROLE_UPDATE_RETRY] {
        let text = generate_one(backend, update.clone(), temp, config.max_tokens, seed(role))?.text;
        match split_cot_output(&text) {
            Ok((thought, domain_text)) => {
                next.check = check_artifact(task, &domain_text);
                next.thought = thought;
                next.domain_text = domain_text;
                return Ok(next);
            }
            Err(e) => debug!(chain = state.origin_index, epoch, retry = role == ROLE_UPDATE_RETRY, "update: {e}"),
        }
    }
    warn!(chain = state.origin_index, epoch, "update produced no PDDL twice; stalling");
    next.stalled = true;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub feedback: String,
    pub thought: String,
    pub domain_text: String,
    pub passed: bool,
    pub errors: usize,
    pub stalled: bool,
    /// Error count of the chain's best state after this epoch.
    pub best_errors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    /// Position of the seeding candidate in the BoN ranking.
    pub chain: usize,
    pub initial: SolutionState,
    pub epochs: Vec<EpochRecord>,
    pub best: SolutionState,
    pub early_stopped: bool,
}

pub fn run_chain(
    task: &SynthesisTask,
    chain: usize,
    candidate: &Candidate,
    config: &SynthesisConfig,
    backend: &dyn Backend,
) -> Result<ChainTrace, SynthError> {
    let initial = SolutionState::from_candidate(candidate);
    let mut trace = ChainTrace {
        chain,
        initial: initial.clone(),
        epochs: Vec::new(),
        best: initial.clone(),
        early_stopped: false,
    };
    let mut current = initial;
    for _ in 0..config.epochs {
        if config.early_stop_on_pass && current.passed() {
            trace.early_stopped = true;
            break;
        }
        current = ivml_step(task, &current, config, backend)?;
        if quality(&current) <= quality(&trace.best) {
            trace.best = current.clone();
        }
        trace.epochs.push(EpochRecord {
            epoch: current.iteration,
            feedback: current.feedback_history.last().map(|f| f.text.clone()).unwrap_or_default(),
            thought: current.thought.clone(),
            domain_text: current.domain_text.clone(),
            passed: current.passed(),
            errors: current.error_count(),
            stalled: current.stalled,
            best_errors: trace.best.error_count(),
        });
        debug!(chain, epoch = current.iteration, errors = current.error_count(), "ivml epoch");
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvmlRun {
    /// One entry per candidate, in candidate order; `Err` holds the
    /// failure message of a chain that hit a hard backend error.
    pub chains: Vec<Result<ChainTrace, String>>,
    /// Index into `chains` of the selected chain.
    pub chosen: usize,
    pub final_state: SolutionState,
}

/// Refines every candidate for up to `config.epochs` epochs and picks the
/// best chain result with [`select_final`]; with zero epochs this is a
/// selection over the candidates themselves.
pub fn run_ivml(
    task: &SynthesisTask,
    candidates: &[Candidate],
    config: &SynthesisConfig,
    backend: &dyn Backend,
) -> Result<IvmlRun, SynthError> {
    if candidates.is_empty() {
        return Err(SynthError::NoCandidates);
    }
    let run = |(chain, c): (usize, &Candidate)| run_chain(task, chain, c, config, backend).map_err(|e| e.to_string());
    let chains: Vec<Result<ChainTrace, String>> = if config.parallel {
        candidates.par_iter().enumerate().map(run).collect()
    } else {
        candidates.iter().enumerate().map(run).collect()
    };
    let completed: Vec<(usize, &SolutionState)> = chains
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.as_ref().ok().map(|t| (i, &t.best)))
        .collect();
    if completed.is_empty() {
        let first = chains.iter().find_map(|c| c.as_ref().err()).cloned().unwrap_or_default();
        return Err(SynthError::AllChainsFailed(first));
    }
    for (i, c) in chains.iter().enumerate() {
        if let Err(e) = c {
            warn!(chain = i, "chain failed: {e}");
        }
    }
    let states: Vec<SolutionState> = completed.iter().map(|(_, s)| (*s).clone()).collect();
    let pick = select_final(&states);
    let chosen = completed[pick].0;
    info!(chain = chosen, passed = states[pick].passed(), errors = states[pick].error_count(), "final selection");
    Ok(IvmlRun {
        chosen,
        final_state: states[pick].clone(),
        chains,
    })
}

/// Prefers a passing state, then fewer errors, then a higher origin score,
/// then a lower origin index. Returns the index of the winner.
///
/// # Panics
///
/// Panics when `states` is empty.
pub fn select_final(states: &[SolutionState]) -> usize {
    assert!(!states.is_empty(), "select_final needs at least one state");
    let cmp = |a: &SolutionState, b: &SolutionState| -> Ordering {
        quality(a)
            .cmp(&quality(b))
            .then_with(|| match (a.origin_score, b.origin_score) {
                (Some(x), Some(y)) => y.total_cmp(&x),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then(a.origin_index.cmp(&b.origin_index))
    };
    (0..states.len())
        .min_by(|&i, &j| cmp(&states[i], &states[j]).then(i.cmp(&j)))
        .expect("non-empty")
}
