#![allow(dead_code)]

use pddl_core::DiagnosticCode::{self, *};

pub const BASE: &str = "(define (domain base)
  (:requirements :strips :typing :negative-preconditions :equality)
  (:types block place - object)
  (:constants table - place)
  (:predicates (on ?b - block ?p - place) (free ?p - place) (held ?b - block))
  (:action put
    :parameters (?b - block ?p - place)
    :precondition (and (held ?b) (free ?p) (not (= ?p table)))
    :effect (and (on ?b ?p) (not (free ?p)) (not (held ?b)))))";

/// Each code, with a one-edit variant of `BASE` that triggers exactly it.
pub fn triggering_fixtures() -> Vec<(DiagnosticCode, String)> {
    let edit = |from: &str, to: &str| {
        assert!(BASE.contains(from), "{from}");
        BASE.replacen(from, to, 1)
    };
    vec![
        (UndeclaredPredicate, edit("(held ?b) (free ?p)", "(held ?b) (empty ?p)")),
        (ArityMismatch, edit("(held ?b) (free ?p)", "(held ?b) (free ?p ?b)")),
        (TypeMismatch, edit("(held ?b) (free ?p)", "(held ?b) (free ?b)")),
        (DuplicatePredicate, edit("(held ?b - block))", "(held ?b - block) (free ?q - place))")),
        (UnboundVariable, edit("(held ?b) (free ?p)", "(held ?b) (free ?q)")),
        (UndeclaredType, edit("?b - block ?p - place)\n", "?b - brick ?p - place)\n")),
        (UndeclaredObject, edit("(not (= ?p table))", "(not (= ?p floor))")),
        (RequirementMissing, edit(" :equality", "")),
        (TypeCycle, edit("(:types block place - object)", "(:types block - place place - block)")),
        (MalformedEffect, edit("(not (held ?b))", "(= ?b ?b)")),
    ]
}
