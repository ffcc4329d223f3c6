//! Validating a synthesized artifact and ranking candidates.

use std::cmp::Ordering;

use llm_backend::TokenLogprob;
use pddl_core::{check_domain, check_problem, parse_domain, parse_problem, ValidationReport};
use serde::{Deserialize, Serialize};

use crate::task::{SynthesisTask, TaskKind};

/// The validator's verdict on one artifact.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Check {
    /// Rendered parse error; the reports are empty when set.
    pub parse_error: Option<String>,
    /// Diagnostics against the artifact text.
    pub report: ValidationReport,
    /// Prob2Domain only: the input problem checked against the artifact.
    pub input_report: Option<ValidationReport>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.parse_error.is_none() && self.report.passed() && self.input_report.as_ref().is_none_or(|r| r.passed())
    }

    /// Errors, counting a parse failure as one.
    pub fn error_count(&self) -> usize {
        usize::from(self.parse_error.is_some())
            + self.report.error_count()
            + self.input_report.as_ref().map_or(0, |r| r.error_count())
    }

    pub fn warning_count(&self) -> usize {
        self.report.warning_count() + self.input_report.as_ref().map_or(0, |r| r.warning_count())
    }

    /// Lower is better: unparseable artifacts rank below every parseable one.
    pub fn badness(&self) -> (bool, usize) {
        (self.parse_error.is_some(), self.error_count())
    }

    pub fn summary(&self, artifact: &str, task: &SynthesisTask) -> CheckSummary {
        let mut diagnostics: Vec<String> = self.parse_error.iter().cloned().collect();
        diagnostics.extend(self.report.to_text(artifact).lines().map(str::to_string));
        if let Some(r) = &self.input_report {
            diagnostics.extend(r.to_text(&task.g_text).lines().map(|l| format!("input problem: {l}")));
        }
        CheckSummary {
            passed: self.passed(),
            parsed: self.parse_error.is_none(),
            errors: self.error_count(),
            warnings: self.warning_count(),
            diagnostics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub passed: bool,
    pub parsed: bool,
    pub errors: usize,
    pub warnings: usize,
    pub diagnostics: Vec<String>,
}

/// Validates `artifact` as the output of `task`: a domain for NL2Domain and
/// Prob2Domain (which also requires the input problem to fit it), a problem
/// against the task's domain for NL2Problem.
pub fn check_artifact(task: &SynthesisTask, artifact: &str) -> Check {
    match task.kind {
        TaskKind::Nl2Domain | TaskKind::Prob2Domain => {
            let domain = match parse_domain(artifact) {
                Ok(d) => d,
                Err(e) => return parse_failure(e.render(artifact)),
            };
            let report = check_domain(&domain);
            let input_report = (task.kind == TaskKind::Prob2Domain).then(|| match parse_problem(&task.g_text) {
                Ok(p) => check_problem(&p, &domain),
                // Rejected by SynthesisTask::validate; keep the check total.
                Err(_) => ValidationReport::default(),
            });
            Check {
                parse_error: None,
                report,
                input_report,
            }
        }
        TaskKind::Nl2Problem => {
            let problem = match parse_problem(artifact) {
                Ok(p) => p,
                Err(e) => return parse_failure(e.render(artifact)),
            };
            let domain_text = task.domain_text.as_deref().unwrap_or("");
            let report = match parse_domain(domain_text) {
                Ok(d) => check_problem(&problem, &d),
                Err(e) => return parse_failure(format!("task domain: {}", e.render(domain_text))),
            };
            Check {
                parse_error: None,
                report,
                input_report: None,
            }
        }
    }
}

fn parse_failure(message: String) -> Check {
    Check {
        parse_error: Some(message),
        ..Check::default()
    }
}

/// Summed token log-likelihood, or `None` when the endpoint returned no
/// logprobs and the caller must fall back to validator-based ranking.
pub fn score_candidate(tokens: &[TokenLogprob]) -> Option<f64> {
    if tokens.is_empty() {
        return None;
    }
    Some(tokens.iter().map(|t| t.logprob).sum())
}

/// [`score_candidate`] divided by the token count.
pub fn normalized_score(tokens: &[TokenLogprob]) -> Option<f64> {
    score_candidate(tokens).map(|s| s / tokens.len() as f64)
}

/// Best first: scored candidates by descending score, then unscored ones by
/// validator badness; ties go to the lower sample index.
pub(crate) fn rank_order(
    a: (Option<f64>, (bool, usize), usize),
    b: (Option<f64>, (bool, usize), usize),
) -> Ordering {
    match (a.0, b.0) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(a.2.cmp(&b.2)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.1.cmp(&b.1).then(a.2.cmp(&b.2)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(lp: f64) -> TokenLogprob {
        TokenLogprob {
            token: "x".into(),
            logprob: lp,
        }
    }

    #[test]
    fn score_sums_logprobs() {
        assert_eq!(score_candidate(&[tok(-0.5), tok(-1.0), tok(-0.25)]), Some(-1.75));
        assert_eq!(score_candidate(&[]), None);
        assert_eq!(normalized_score(&[tok(-0.5), tok(-1.0)]), Some(-0.75));
    }

    #[test]
    fn ranking() {
        assert_eq!(rank_order((Some(-1.0), (true, 9), 5), (Some(-2.0), (false, 0), 0)), Ordering::Less);
        assert_eq!(rank_order((Some(-1.0), (false, 0), 5), (Some(-1.0), (false, 0), 2)), Ordering::Greater);
        assert_eq!(rank_order((None, (false, 0), 0), (Some(-99.0), (true, 9), 9)), Ordering::Greater);
        assert_eq!(rank_order((None, (false, 1), 0), (None, (true, 0), 1)), Ordering::Less);
        assert_eq!(rank_order((None, (false, 1), 3), (None, (false, 1), 1)), Ordering::Greater);
    }

    #[test]
    fn prob2domain_checks_the_input_problem() {
        let problem = "(define (problem p) (:domain d) (:objects a) (:init (p a)) (:goal (q a)))";
        let task = SynthesisTask::new(TaskKind::Prob2Domain, problem);
        let good = "(define (domain d) (:predicates (p ?x) (q ?x)))";
        let missing_q = "(define (domain d) (:predicates (p ?x)))";
        assert!(check_artifact(&task, good).passed());
        let c = check_artifact(&task, missing_q);
        assert!(c.report.passed());
        assert!(!c.passed());
        assert!(check_artifact(&task, "(define").parse_error.is_some());
        assert_eq!(check_artifact(&task, "(define").badness(), (true, 1));
    }
}
