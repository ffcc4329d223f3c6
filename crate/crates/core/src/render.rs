//! Canonical PDDL text.
//!
//! Output is lowercase, keeps AST order, writes every type annotation
//! explicitly (including `- object`) and omits empty sections, so that
//! `parse(render(x)) == x` for every parsed `x`.

use std::fmt::Write;

use crate::ast::*;

pub fn render_domain(d: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let flags: Vec<_> = d.requirements.iter().map(|r| r.keyword.as_str()).collect();
        let _ = writeln!(out, "  (:requirements {})", flags.join(" "));
    }
    if !d.types.is_empty() {
        let types: Vec<_> = d
            .types
            .iter()
            .map(|t| format!("{} - {}", t.name, t.parent))
            .collect();
        let _ = writeln!(out, "  (:types {})", types.join(" "));
    }
    if !d.constants.is_empty() {
        let _ = writeln!(out, "  (:constants {})", typed_names(&d.constants));
    }
    if !d.predicates.is_empty() {
        out.push_str("  (:predicates");
        for p in &d.predicates {
            let _ = write!(out, "\n    {}", signature(&p.name, &p.params));
        }
        out.push_str(")\n");
    }
    if !d.functions.is_empty() {
        let fs: Vec<_> = d.functions.iter().map(|f| signature(&f.name, &f.params)).collect();
        let _ = writeln!(out, "  (:functions {})", fs.join(" "));
    }
    for a in &d.actions {
        render_action(&mut out, a);
    }
    out.push_str(")\n");
    out
}

fn render_action(out: &mut String, a: &ActionSchema) {
    let _ = write!(out, "  (:action {}\n    :parameters ({})", a.name, typed_names(&a.params));
    if !is_empty_and(&a.precondition) {
        let _ = write!(out, "\n    :precondition {}", formula(&a.precondition));
    }
    match &a.cost {
        Some(cost) => {
            let mut parts: Vec<_> = a.effect.conjuncts().iter().map(formula).collect();
            parts.push(format!("(increase ({}) {})", cost.function, cost.amount));
            let _ = write!(out, "\n    :effect (and {})", parts.join(" "));
        }
        None if !is_empty_and(&a.effect) => {
            let _ = write!(out, "\n    :effect {}", formula(&a.effect));
        }
        None => {}
    }
    out.push_str(")\n");
}

pub fn render_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain_name);
    if !p.requirements.is_empty() {
        let flags: Vec<_> = p.requirements.iter().map(|r| r.keyword.as_str()).collect();
        let _ = writeln!(out, "  (:requirements {})", flags.join(" "));
    }
    if !p.objects.is_empty() {
        let _ = writeln!(out, "  (:objects {})", typed_names(&p.objects));
    }
    if !p.init.is_empty() || !p.numeric_init.is_empty() {
        out.push_str("  (:init");
        for a in &p.init {
            let _ = write!(out, "\n    {}", atom(a));
        }
        for n in &p.numeric_init {
            let _ = write!(out, "\n    (= ({}) {})", n.function, n.value);
        }
        out.push_str(")\n");
    }
    match &p.goal {
        Formula::And { children, .. } if !children.is_empty() => {
            out.push_str("  (:goal (and");
            for c in children {
                let _ = write!(out, "\n    {}", formula(c));
            }
            out.push_str("))\n");
        }
        goal => {
            let _ = writeln!(out, "  (:goal {})", formula(goal));
        }
    }
    if let Some(m) = &p.metric {
        let _ = writeln!(out, "  (:metric minimize ({}))", m.function);
    }
    out.push_str(")\n");
    out
}

pub fn render_formula(f: &Formula) -> String {
    formula(f)
}

pub fn render_atom(a: &Atom) -> String {
    atom(a)
}

fn is_empty_and(f: &Formula) -> bool {
    matches!(f, Formula::And { children, .. } if children.is_empty())
}

fn typed_names(names: &[TypedName]) -> String {
    names
        .iter()
        .map(|n| format!("{} - {}", n.name, n.ty))
        .collect::<Vec<_>>()
        .join(" ")
}

fn signature(name: &str, params: &[TypedName]) -> String {
    if params.is_empty() {
        format!("({name})")
    } else {
        format!("({name} {})", typed_names(params))
    }
}

fn atom(a: &Atom) -> String {
    let mut s = format!("({}", a.predicate);
    for t in &a.args {
        s.push(' ');
        s.push_str(&t.name);
    }
    s.push(')');
    s
}

fn formula(f: &Formula) -> String {
    match f {
        Formula::Atom(a) => atom(a),
        Formula::Not { inner, .. } => format!("(not {})", formula(inner)),
        Formula::And { children, .. } => {
            let mut s = String::from("(and");
            for c in children {
                s.push(' ');
                s.push_str(&formula(c));
            }
            s.push(')');
            s
        }
        Formula::Equality { left, right, .. } => format!("(= {} {})", left.name, right.name),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_domain, parse_problem};

    #[test]
    fn empty_domain_has_no_action_section() {
        let d = parse_domain("(define (domain d) (:predicates (p ?x)))").unwrap();
        let text = render_domain(&d);
        assert!(!text.contains("(:action"));
        assert!(text.contains("(p ?x - object)"));
    }

    #[test]
    fn cost_effect_is_rendered_inside_the_conjunction() {
        let text = "(define (domain d) (:requirements :action-costs) (:predicates (p)) (:functions (total-cost))
            (:action a :parameters () :effect (increase (total-cost) 4)))";
        let d = parse_domain(text).unwrap();
        let out = render_domain(&d);
        assert!(out.contains(":effect (and (increase (total-cost) 4))"), "{out}");
        assert_eq!(parse_domain(&out).unwrap(), d);
    }

    #[test]
    fn goal_is_one_conjunct_per_line() {
        let p = parse_problem("(define (problem p) (:domain d) (:objects a) (:goal (and (p a) (not (q a)))))").unwrap();
        let out = render_problem(&p);
        assert!(out.contains("(:goal (and\n    (p a)\n    (not (q a))))"), "{out}");
        assert_eq!(parse_problem(&out).unwrap(), p);
    }
}
