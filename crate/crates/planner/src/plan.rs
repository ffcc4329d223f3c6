//! Plans: the text format, comparison and validation by simulation.

use std::collections::HashMap;
use std::fmt;

use pddl_core::sexpr::{tokenize, TokenKind};
use pddl_core::{Domain, Problem};
use thiserror::Error;

use crate::ground::{bind_literal, compile_literals, AtomTable, BoundLiteral, GroundAtom, Universe};
use crate::state::{applicable, apply, GroundAction, State};

/// One plan step: an action name and its object arguments, lowercased.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanStep {
    pub name: String,
    pub args: Vec<String>,
}

impl PlanStep {
    pub fn new<S: AsRef<str>>(name: &str, args: &[S]) -> Self {
        PlanStep {
            name: name.to_lowercase(),
            args: args.iter().map(|a| a.as_ref().to_lowercase()).collect(),
        }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub total_cost: u64,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Same length and step-wise identical, ignoring case.
pub fn plans_equal(a: &[PlanStep], b: &[PlanStep]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.name.eq_ignore_ascii_case(&y.name)
                && x.args.len() == y.args.len()
                && x.args.iter().zip(&y.args).all(|(p, q)| p.eq_ignore_ascii_case(q))
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("plan line {line}: {message}")]
pub struct PlanParseError {
    pub line: usize,
    pub message: String,
}

/// A parsed plan file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanFile {
    pub steps: Vec<PlanStep>,
    /// From a `; cost = N ...` comment, when present.
    pub declared_cost: Option<u64>,
}

/// Reads `(action arg ...)` steps, one per line; `;` starts a comment.
pub fn parse_plan(text: &str) -> Result<PlanFile, PlanParseError> {
    let mut file = PlanFile::default();
    for (i, line) in text.lines().enumerate() {
        let (code, comment) = match line.find(';') {
            Some(pos) => (&line[..pos], Some(&line[pos + 1..])),
            None => (line, None),
        };
        if let Some(cost) = comment.and_then(declared_cost) {
            file.declared_cost = Some(cost);
        }
        let err = |message: &str| PlanParseError {
            line: i + 1,
            message: message.to_string(),
        };
        let tokens = tokenize(code);
        let mut rest = tokens.as_slice();
        while !rest.is_empty() {
            let [first, tail @ ..] = rest else { break };
            if first.kind != TokenKind::LParen {
                return Err(err("expected `(`"));
            }
            let close = tail
                .iter()
                .position(|t| t.kind == TokenKind::RParen)
                .ok_or_else(|| err("unclosed step"))?;
            let mut words = Vec::new();
            for t in &tail[..close] {
                match &t.kind {
                    TokenKind::Atom(a) => words.push(a.as_str()),
                    _ => return Err(err("nested lists are not allowed in a step")),
                }
            }
            let Some((name, args)) = words.split_first() else {
                return Err(err("empty step"));
            };
            file.steps.push(PlanStep::new(name, args));
            rest = &tail[close + 1..];
        }
    }
    Ok(file)
}

fn declared_cost(comment: &str) -> Option<u64> {
    let rest = comment.trim().strip_prefix("cost")?.trim_start().strip_prefix('=')?;
    rest.split_whitespace().next()?.parse().ok()
}

/// One step per line, then `; cost = N (unit cost)` or `(general cost)`.
pub fn render_plan(plan: &Plan, unit_cost: bool) -> String {
    let mut out = String::new();
    for s in &plan.steps {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    let kind = if unit_cost { "unit cost" } else { "general cost" };
    out.push_str(&format!("; cost = {} ({kind})\n", plan.total_cost));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvalidReason {
    /// No schema of that name, wrong arity, or arguments that are not
    /// objects of the parameter types.
    UnknownAction(String),
    /// The first precondition literal that does not hold.
    PreconditionFailed(String),
    /// Goal literals that do not hold after the last step.
    GoalUnsatisfied(Vec<String>),
}

impl InvalidReason {
    pub fn code(&self) -> &'static str {
        match self {
            InvalidReason::UnknownAction(_) => "UNKNOWN_ACTION",
            InvalidReason::PreconditionFailed(_) => "PRECONDITION_FAILED",
            InvalidReason::GoalUnsatisfied(_) => "GOAL_UNSATISFIED",
        }
    }
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::UnknownAction(s) | InvalidReason::PreconditionFailed(s) => {
                write!(f, "{} {s}", self.code())
            }
            InvalidReason::GoalUnsatisfied(atoms) => write!(f, "{} {}", self.code(), atoms.join(" ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanVerdict {
    Valid { total_cost: u64 },
    /// `step` is 0-based; a goal failure reports the plan length.
    Invalid { step: usize, reason: InvalidReason },
}

impl PlanVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, PlanVerdict::Valid { .. })
    }
}

impl fmt::Display for PlanVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanVerdict::Valid { total_cost } => write!(f, "Valid, cost = {total_cost}"),
            PlanVerdict::Invalid { step, reason } => write!(f, "Invalid at step {step}: {reason}"),
        }
    }
}

/// Simulates `steps` from the initial state of `p`.
///
/// Each step is instantiated on its own, so no full grounding is needed and
/// static predicates stay part of the state.
pub fn validate_plan(d: &Domain, p: &Problem, steps: &[PlanStep]) -> PlanVerdict {
    let universe = Universe::new(d, p);
    let mut atoms = AtomTable::default();
    let mut state = State::default();
    for a in &p.init {
        let args: Vec<&str> = a.args.iter().map(|t| t.name.as_str()).collect();
        state.insert(atoms.intern(GroundAtom {
            predicate: a.predicate.clone(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }));
    }

    let mut total_cost = 0;
    for (i, step) in steps.iter().enumerate() {
        let unknown = |msg: String| PlanVerdict::Invalid {
            step: i,
            reason: InvalidReason::UnknownAction(msg),
        };
        let Some(schema) = d.action(&step.name) else {
            return unknown(format!("{step}: no action named {}", step.name));
        };
        if schema.params.len() != step.args.len() {
            return unknown(format!("{step}: {} takes {} arguments", schema.name, schema.params.len()));
        }
        for (arg, param) in step.args.iter().zip(&schema.params) {
            match universe.type_of.get(arg.as_str()) {
                Some(ty) if universe.types.is_subtype(ty, &param.ty) => {}
                Some(ty) => return unknown(format!("{step}: {arg} is a {ty}, not a {}", param.ty)),
                None => return unknown(format!("{step}: unknown object {arg}")),
            }
        }

        let params: HashMap<&str, usize> =
            schema.params.iter().enumerate().map(|(j, p)| (p.name.as_str(), j)).collect();
        let binding: Vec<&str> = step.args.iter().map(String::as_str).collect();
        let compile = |f| compile_literals(f, &params, &universe);
        let (pre, eff) = match (compile(&schema.precondition), compile(&schema.effect)) {
            (Ok(pre), Ok(eff)) => (pre, eff),
            (Err(e), _) | (_, Err(e)) => return unknown(format!("{step}: {e}")),
        };

        let mut action = GroundAction {
            name: schema.name.clone(),
            args: step.args.clone(),
            pre_pos: Vec::new(),
            pre_neg: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
            cost: schema.cost.as_ref().map_or(1, |c| c.amount),
        };
        let mut failed = None;
        for lit in &pre {
            match bind_literal(lit, &binding) {
                BoundLiteral::Atom(atom, negated) => {
                    let text = atom.to_string();
                    let id = atoms.intern(atom);
                    let holds = state.contains(id) != negated;
                    if negated {
                        action.pre_neg.push(id);
                    } else {
                        action.pre_pos.push(id);
                    }
                    if !holds && failed.is_none() {
                        failed = Some(if negated { format!("(not {text})") } else { text });
                    }
                }
                BoundLiteral::Equal(holds, text) => {
                    if !holds && failed.is_none() {
                        failed = Some(text);
                    }
                }
            }
        }
        for lit in &eff {
            if let BoundLiteral::Atom(atom, negated) = bind_literal(lit, &binding) {
                let id = atoms.intern(atom);
                if negated {
                    action.del.push(id);
                } else {
                    action.add.push(id);
                }
            }
        }
        action.normalize();

        if let Some(literal) = failed {
            return PlanVerdict::Invalid {
                step: i,
                reason: InvalidReason::PreconditionFailed(literal),
            };
        }
        debug_assert!(applicable(&state, &action));
        state = apply(&state, &action);
        total_cost += action.cost;
    }

    let goal = match compile_literals(&p.goal, &HashMap::new(), &universe) {
        Ok(goal) => goal,
        Err(e) => {
            return PlanVerdict::Invalid {
                step: steps.len(),
                reason: InvalidReason::GoalUnsatisfied(vec![e.to_string()]),
            }
        }
    };
    let mut unsatisfied = Vec::new();
    for lit in &goal {
        match bind_literal(lit, &[]) {
            BoundLiteral::Atom(atom, negated) => {
                let holds = atoms.get(&atom).is_some_and(|id| state.contains(id)) != negated;
                if !holds {
                    unsatisfied.push(if negated { format!("(not {atom})") } else { atom.to_string() });
                }
            }
            BoundLiteral::Equal(holds, text) => {
                if !holds {
                    unsatisfied.push(text);
                }
            }
        }
    }
    if unsatisfied.is_empty() {
        PlanVerdict::Valid { total_cost }
    } else {
        PlanVerdict::Invalid {
            step: steps.len(),
            reason: InvalidReason::GoalUnsatisfied(unsatisfied),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pddl_core::{parse_domain, parse_problem};
    use pddl_fixtures as fx;

    #[test]
    fn plan_file_round_trip() {
        let file = parse_plan(fx::BW_RAND_12_PLAN).unwrap();
        assert_eq!(file.steps.len(), 24);
        assert_eq!(file.declared_cost, Some(24));
        assert_eq!(file.steps[0], PlanStep::new("unstack", &["b3", "b8"]));
        let plan = Plan {
            steps: file.steps.clone(),
            total_cost: 24,
        };
        assert_eq!(render_plan(&plan, true), fx::BW_RAND_12_PLAN);
        assert!(render_plan(&plan, false).ends_with("; cost = 24 (general cost)\n"));
    }

    #[test]
    fn plan_parse_errors() {
        assert_eq!(parse_plan("(a b").unwrap_err().line, 1);
        assert_eq!(parse_plan("\nfoo").unwrap_err().line, 2);
        assert!(parse_plan("()").is_err());
        assert_eq!(parse_plan("").unwrap(), PlanFile::default());
    }

    #[test]
    fn equality() {
        let a = parse_plan(fx::BW_RAND_12_PLAN).unwrap().steps;
        assert!(plans_equal(&a, &a));
        assert!(plans_equal(&[], &[]));
        let mut b = a.clone();
        b[5].args[0] = "b1".into();
        assert!(!plans_equal(&a, &b));
        let upper: Vec<_> = a
            .iter()
            .map(|s| PlanStep {
                name: s.name.to_uppercase(),
                args: s.args.iter().map(|x| x.to_uppercase()).collect(),
            })
            .collect();
        assert!(plans_equal(&a, &upper));
    }

    #[test]
    fn reference_plan_validates() {
        let d = parse_domain(fx::BLOCKSWORLD_DOMAIN).unwrap();
        let p = parse_problem(fx::BW_RAND_12_PROBLEM).unwrap();
        let steps = parse_plan(fx::BW_RAND_12_PLAN).unwrap().steps;
        let v = validate_plan(&d, &p, &steps);
        assert_eq!(v, PlanVerdict::Valid { total_cost: 24 });
        assert_eq!(v.to_string(), "Valid, cost = 24");
    }

    #[test]
    fn reference_plan_fails_on_printed_domain() {
        let d = parse_domain(fx::BLOCKSWORLD_AS_PRINTED_DOMAIN).unwrap();
        let p = parse_problem(fx::BW_RAND_12_PROBLEM).unwrap();
        let steps = parse_plan(fx::BW_RAND_12_PLAN).unwrap().steps;
        assert_eq!(
            validate_plan(&d, &p, &steps),
            PlanVerdict::Invalid {
                step: 2,
                reason: InvalidReason::PreconditionFailed("(clear b8)".into())
            }
        );
    }

    #[test]
    fn swapped_first_steps_fail_at_zero() {
        let d = parse_domain(fx::BLOCKSWORLD_DOMAIN).unwrap();
        let p = parse_problem(fx::BW_RAND_12_PROBLEM).unwrap();
        let mut steps = parse_plan(fx::BW_RAND_12_PLAN).unwrap().steps;
        steps.swap(0, 1);
        let v = validate_plan(&d, &p, &steps);
        assert_eq!(
            v,
            PlanVerdict::Invalid {
                step: 0,
                reason: InvalidReason::PreconditionFailed("(holding b3)".into())
            }
        );
    }

    #[test]
    fn empty_plan_and_goal_failures() {
        let d = parse_domain(fx::BLOCKSWORLD_DOMAIN).unwrap();
        let done = parse_problem(
            "(define (problem p) (:domain blocksworld) (:objects a) (:init (on-table a) (clear a) (arm-empty)) (:goal (clear a)))",
        )
        .unwrap();
        assert_eq!(validate_plan(&d, &done, &[]), PlanVerdict::Valid { total_cost: 0 });

        let p = parse_problem(fx::BW_RAND_12_PROBLEM).unwrap();
        let v = validate_plan(&d, &p, &[]);
        let PlanVerdict::Invalid { step: 0, reason: InvalidReason::GoalUnsatisfied(atoms) } = v else {
            panic!("{v:?}")
        };
        assert_eq!(atoms.len(), 8);
    }

    #[test]
    fn unknown_actions() {
        let d = parse_domain(fx::BLOCKSWORLD_DOMAIN).unwrap();
        let p = parse_problem(fx::BW_RAND_12_PROBLEM).unwrap();
        for step in [
            PlanStep::new("fly", &["b1"]),
            PlanStep::new("pickup", &["b1", "b2"]),
            PlanStep::new("pickup", &["b99"]),
        ] {
            let v = validate_plan(&d, &p, std::slice::from_ref(&step));
            assert!(
                matches!(v, PlanVerdict::Invalid { step: 0, reason: InvalidReason::UnknownAction(_) }),
                "{v:?}"
            );
        }
    }

    #[test]
    fn type_mismatch_is_unknown_action() {
        let d = parse_domain(fx::TERMES_DOMAIN).unwrap();
        let p = parse_problem(fx::TERMES_3X3_PROBLEM).unwrap();
        let v = validate_plan(&d, &p, &[PlanStep::new("create-block", &["n0"])]);
        assert_eq!(v.to_string().split(':').next(), Some("Invalid at step 0"));
        assert!(matches!(v, PlanVerdict::Invalid { reason: InvalidReason::UnknownAction(_), .. }));
    }
}
