//! Evaluation metrics: validator pass rate, goal equality and plan accuracy.

use std::collections::BTreeSet;

use pddl_core::{parse_domain, parse_problem, render_atom, render_formula, Formula, Problem};
use pddl_planner::{ground, parse_plan, plans_equal, search, validate_plan, SearchOutcome};
use serde::{Deserialize, Serialize};

use crate::config::PlannerConfig;

/// `100 * successes / attempted`, or `None` when nothing was attempted.
pub fn rate(successes: usize, attempted: usize) -> Option<f64> {
    (attempted > 0).then(|| 100.0 * successes as f64 / attempted as f64)
}

/// A ground literal: polarity and canonical atom text.
type Literal = (bool, String);

fn literals(f: &Formula, positive: bool, out: &mut BTreeSet<Literal>) {
    match f {
        Formula::And { children, .. } if positive => {
            for c in children {
                literals(c, true, out);
            }
        }
        Formula::Not { inner, .. } => literals(inner, !positive, out),
        Formula::Atom(a) => {
            out.insert((positive, render_atom(a).to_lowercase()));
        }
        // Equalities and negated conjunctions stay opaque.
        other => {
            out.insert((positive, render_formula(other).to_lowercase()));
        }
    }
}

/// The goal as a set of literals: conjunctions flattened, case folded,
/// duplicates removed.
pub fn canonical_goal(p: &Problem) -> BTreeSet<Literal> {
    let mut out = BTreeSet::new();
    literals(&p.goal, true, &mut out);
    out
}

pub fn canonical_init(p: &Problem) -> BTreeSet<String> {
    p.init.iter().map(|a| render_atom(a).to_lowercase()).collect()
}

/// Syntactic goal equality (and initial-state equality when `strict_init`).
pub fn problem_correct(generated: &Problem, reference: &Problem, strict_init: bool) -> bool {
    canonical_goal(generated) == canonical_goal(reference)
        && (!strict_init || canonical_init(generated) == canonical_init(reference))
}

/// One plan-accuracy case: a synthesized domain solved on a reference problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCase {
    pub id: String,
    pub generated_domain: String,
    /// Judge for validity; the generated domain is used when absent.
    pub reference_domain: Option<String>,
    pub reference_problem: String,
    pub reference_plan: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCaseOutcome {
    pub id: String,
    pub found: bool,
    pub exact: bool,
    pub valid: bool,
    pub plan_length: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanAccuracy {
    pub outcomes: Vec<PlanCaseOutcome>,
    pub exact_match_rate: Option<f64>,
    pub valid_rate: Option<f64>,
}

/// Grounds the generated domain on the reference problem, searches, then
/// compares the plan with the reference plan (exact) and checks it against
/// the reference domain (valid). Any failure counts as neither.
pub fn evaluate_plan_case(case: &PlanCase, planner: &PlannerConfig) -> PlanCaseOutcome {
    let miss = |detail: String| PlanCaseOutcome {
        id: case.id.clone(),
        found: false,
        exact: false,
        valid: false,
        plan_length: None,
        detail,
    };
    let domain = match parse_domain(&case.generated_domain) {
        Ok(d) => d,
        Err(e) => return miss(format!("generated domain: {}", e.render(&case.generated_domain))),
    };
    let problem = match parse_problem(&case.reference_problem) {
        Ok(p) => p,
        Err(e) => return miss(format!("reference problem: {}", e.render(&case.reference_problem))),
    };
    let reference_plan = match parse_plan(&case.reference_plan) {
        Ok(p) => p,
        Err(e) => return miss(format!("reference plan: line {}: {}", e.line, e.message)),
    };
    let task = match ground(&domain, &problem) {
        Ok(t) => t,
        Err(e) => return miss(format!("grounding: {e}")),
    };
    let result = search(&task, planner.algorithm(), planner.heuristic(), planner.limits());
    let plan = match result.outcome {
        SearchOutcome::Plan(p) => p,
        SearchOutcome::NoPlan => return miss("no plan".into()),
        SearchOutcome::LimitHit => return miss("search limit hit".into()),
    };
    let exact = plans_equal(&plan.steps, &reference_plan.steps);
    let verdict = match &case.reference_domain {
        Some(text) => match parse_domain(text) {
            Ok(judge) => validate_plan(&judge, &problem, &plan.steps),
            Err(e) => return miss(format!("reference domain: {}", e.render(text))),
        },
        None => validate_plan(&domain, &problem, &plan.steps),
    };
    PlanCaseOutcome {
        id: case.id.clone(),
        found: true,
        exact,
        valid: verdict.is_valid(),
        plan_length: Some(plan.steps.len()),
        detail: verdict.to_string(),
    }
}

pub fn plan_accuracy(cases: &[PlanCase], planner: &PlannerConfig) -> PlanAccuracy {
    let outcomes: Vec<PlanCaseOutcome> = cases.iter().map(|c| evaluate_plan_case(c, planner)).collect();
    let n = outcomes.len();
    PlanAccuracy {
        exact_match_rate: rate(outcomes.iter().filter(|o| o.exact).count(), n),
        valid_rate: rate(outcomes.iter().filter(|o| o.valid).count(), n),
        outcomes,
    }
}
