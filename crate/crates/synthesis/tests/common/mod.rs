#![allow(dead_code)]

use llm_backend::{MockBackend, MockResponse, MockRule, MockScript};

/// Substring that only the optimizer prompt contains.
pub const OPT: &str = "generate critical feedback";
/// Substring that only the update prompt contains.
pub const UPDATE: &str = "generate a new PDDL";
/// Substring that only the chain-of-thought prompt contains.
pub const COT: &str = "### Thought:";

pub fn templated(thought: &str, pddl: &str) -> String {
    format!("### Thought:\n{thought}\n\n### Domain:\n```pddl\n{pddl}\n```\n")
}

pub const GOOD: &str = "(define (domain toy) (:requirements :strips)
  (:predicates (p) (q))
  (:action flip :parameters () :precondition (p) :effect (and (q) (not (p)))))";

/// One undeclared predicate.
pub const ONE_ERROR: &str = "(define (domain toy) (:requirements :strips)
  (:predicates (p) (q))
  (:action flip :parameters () :precondition (r) :effect (and (q) (not (p)))))";

/// Undeclared predicates and an unbound variable.
pub const THREE_ERRORS: &str = "(define (domain toy) (:requirements :strips)
  (:predicates (p) (q))
  (:action flip :parameters () :precondition (and (r) (s)) :effect (and (q ?x) (not (p)))))";

pub const UNPARSEABLE: &str = "(define (domain toy) (:predicates (p)";

pub fn mock(rules: Vec<MockRule>) -> MockBackend {
    MockBackend::new(MockScript::new(rules, MockResponse::text("I have nothing to add."))).unwrap()
}
