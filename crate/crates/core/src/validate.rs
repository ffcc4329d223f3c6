//! VAL-style static checks for domains and problems.
//!
//! Checks never fail: every finding becomes a [`Diagnostic`] in the returned
//! [`ValidationReport`]. A report passes when it holds no error-severity
//! diagnostics; warnings describe constructs that are still interpretable.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::ast::*;
use crate::span::{LineIndex, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    UndeclaredPredicate,
    ArityMismatch,
    TypeMismatch,
    DuplicatePredicate,
    UnboundVariable,
    UndeclaredType,
    UndeclaredObject,
    RequirementMissing,
    TypeCycle,
    MalformedEffect,
    /// The problem names a different domain than the one it is checked against.
    DomainMismatch,
}

impl DiagnosticCode {
    pub const ALL: [DiagnosticCode; 11] = [
        DiagnosticCode::UndeclaredPredicate,
        DiagnosticCode::ArityMismatch,
        DiagnosticCode::TypeMismatch,
        DiagnosticCode::DuplicatePredicate,
        DiagnosticCode::UnboundVariable,
        DiagnosticCode::UndeclaredType,
        DiagnosticCode::UndeclaredObject,
        DiagnosticCode::RequirementMissing,
        DiagnosticCode::TypeCycle,
        DiagnosticCode::MalformedEffect,
        DiagnosticCode::DomainMismatch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::UndeclaredPredicate => "UNDECLARED_PREDICATE",
            DiagnosticCode::ArityMismatch => "ARITY_MISMATCH",
            DiagnosticCode::TypeMismatch => "TYPE_MISMATCH",
            DiagnosticCode::DuplicatePredicate => "DUPLICATE_PREDICATE",
            DiagnosticCode::UnboundVariable => "UNBOUND_VARIABLE",
            DiagnosticCode::UndeclaredType => "UNDECLARED_TYPE",
            DiagnosticCode::UndeclaredObject => "UNDECLARED_OBJECT",
            DiagnosticCode::RequirementMissing => "REQUIREMENT_MISSING",
            DiagnosticCode::TypeCycle => "TYPE_CYCLE",
            DiagnosticCode::MalformedEffect => "MALFORMED_EFFECT",
            DiagnosticCode::DomainMismatch => "DOMAIN_MISMATCH",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            DiagnosticCode::RequirementMissing | DiagnosticCode::DomainMismatch => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: code.severity(),
            span,
            message: message.into(),
        }
    }
}

/// A diagnostic positioned against its source text, as serialized to JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosticRecord {
    pub code: DiagnosticCode,
    pub severity: Severity,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    fn from_unsorted(mut diagnostics: Vec<Diagnostic>) -> Self {
        diagnostics.sort_by(|a, b| {
            (a.span.start, a.span.end, a.code).cmp(&(b.span.start, b.span.end, b.code))
        });
        ValidationReport { diagnostics }
    }

    pub fn passed(&self) -> bool {
        self.error_count() == 0
    }

    pub fn error_count(&self) -> usize {
        self.count(Severity::Error)
    }

    pub fn warning_count(&self) -> usize {
        self.count(Severity::Warning)
    }

    fn count(&self, severity: Severity) -> usize {
        self.diagnostics.iter().filter(|d| d.severity == severity).count()
    }

    pub fn count_code(&self, code: DiagnosticCode) -> usize {
        self.diagnostics.iter().filter(|d| d.code == code).count()
    }

    pub fn has_code(&self, code: DiagnosticCode) -> bool {
        self.count_code(code) > 0
    }

    /// Appends `other`, keeping the combined list ordered. Both reports must
    /// refer to the same source text.
    pub fn merge(self, other: ValidationReport) -> ValidationReport {
        let mut all = self.diagnostics;
        all.extend(other.diagnostics);
        ValidationReport::from_unsorted(all)
    }

    pub fn records(&self, source: &str) -> Vec<DiagnosticRecord> {
        let index = LineIndex::new(source);
        self.diagnostics
            .iter()
            .map(|d| {
                let (line, col) = index.line_col(d.span.start);
                DiagnosticRecord {
                    code: d.code,
                    severity: d.severity,
                    line,
                    col,
                    message: d.message.clone(),
                }
            })
            .collect()
    }

    /// One `severity CODE line:col message` line per diagnostic.
    pub fn to_text(&self, source: &str) -> String {
        self.records(source)
            .iter()
            .map(|r| format!("{} {} {}:{} {}\n", r.severity, r.code, r.line, r.col, r.message))
            .collect()
    }

    pub fn to_json(&self, source: &str) -> String {
        serde_json::to_string_pretty(&self.records(source)).expect("diagnostics serialize")
    }

    /// `N errors, M warnings`.
    pub fn summary(&self) -> String {
        format!("{} errors, {} warnings", self.error_count(), self.warning_count())
    }
}

/// Child → parent map rooted at `object`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeHierarchy {
    parents: BTreeMap<String, String>,
}

impl TypeHierarchy {
    pub fn is_declared(&self, ty: &str) -> bool {
        ty == OBJECT || self.parents.contains_key(ty)
    }

    pub fn parent(&self, ty: &str) -> Option<&str> {
        self.parents.get(ty).map(String::as_str)
    }

    /// Declared types other than `object`, in name order.
    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.parents.keys().map(String::as_str)
    }

    /// Whether `ty` equals `ancestor` or descends from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ancestor == OBJECT {
            return true;
        }
        let mut cur = ty;
        // The hierarchy is acyclic after construction; the bound is a guard.
        for _ in 0..=self.parents.len() {
            if cur == ancestor {
                return true;
            }
            match self.parents.get(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        false
    }
}

/// Builds the hierarchy of `d`, reporting cycles and the typing requirement.
///
/// A type named only as a supertype is taken to be a direct child of
/// `object`. Each cycle is reported once and broken by reattaching the node
/// that closes it to `object`.
pub fn build_type_hierarchy(d: &Domain) -> (TypeHierarchy, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut parents: BTreeMap<String, String> = BTreeMap::new();
    let mut decl_span: HashMap<&str, Span> = HashMap::new();

    for t in &d.types {
        if t.name == OBJECT {
            continue;
        }
        decl_span.entry(&t.name).or_insert(t.span);
        parents.entry(t.name.clone()).or_insert_with(|| t.parent.clone());
    }
    for t in &d.types {
        if t.parent != OBJECT && !parents.contains_key(&t.parent) {
            parents.insert(t.parent.clone(), OBJECT.to_string());
        }
    }

    // Cycle detection: 0 = unvisited, 1 = on the current path, 2 = done.
    let names: Vec<String> = parents.keys().cloned().collect();
    let mut state: HashMap<String, u8> = HashMap::new();
    for start in names {
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            match state.get(&cur).copied().unwrap_or(0) {
                2 => break,
                1 => {
                    let span = decl_span.get(cur.as_str()).copied().unwrap_or_default();
                    let pos = path.iter().position(|p| *p == cur).unwrap_or(0);
                    let mut cycle: Vec<&str> = path[pos..].iter().map(String::as_str).collect();
                    cycle.push(&cur);
                    diags.push(Diagnostic::new(
                        DiagnosticCode::TypeCycle,
                        span,
                        format!("type cycle {}", cycle.join(" -> ")),
                    ));
                    let last = path.last().cloned().unwrap_or_else(|| cur.clone());
                    parents.insert(last, OBJECT.to_string());
                    break;
                }
                _ => {
                    state.insert(cur.clone(), 1);
                    path.push(cur.clone());
                    match parents.get(&cur) {
                        Some(p) if p != OBJECT => cur = p.clone(),
                        _ => break,
                    }
                }
            }
        }
        for p in path {
            state.insert(p, 2);
        }
    }

    if !d.has_requirement(Requirement::Typing) {
        if let Some(t) = d.types.first() {
            diags.push(Diagnostic::new(
                DiagnosticCode::RequirementMissing,
                t.span,
                "types are declared without :typing",
            ));
        }
    }

    (TypeHierarchy { parents }, diags)
}

/// Name → type for the objects visible in a scope.
type Scope<'a> = HashMap<&'a str, &'a str>;

struct Checker<'a> {
    domain: &'a Domain,
    types: TypeHierarchy,
    diags: Vec<Diagnostic>,
    negation_ok: bool,
    equality_ok: bool,
}

impl<'a> Checker<'a> {
    fn push(&mut self, code: DiagnosticCode, span: Span, message: String) {
        self.diags.push(Diagnostic::new(code, span, message));
    }

    fn check_type(&mut self, ty: &str, span: Span) {
        if !self.types.is_declared(ty) {
            self.push(DiagnosticCode::UndeclaredType, span, format!("type `{ty}` is not declared"));
        }
    }

    fn check_typed_names(&mut self, names: &[TypedName]) {
        for n in names {
            self.check_type(&n.ty, n.span);
        }
    }

    fn check_unknown_requirements(&mut self, flags: &[RequirementFlag]) {
        for r in flags.iter().filter(|r| r.known.is_none()) {
            self.push(
                DiagnosticCode::RequirementMissing,
                r.span,
                format!("requirement {} is not supported and is ignored", r.keyword),
            );
        }
    }

    fn check_atom(&mut self, atom: &Atom, vars: &Scope, objects: &Scope) {
        for t in &atom.args {
            self.term_type(t, vars, objects);
        }
        let Some(decl) = self.domain.predicate(&atom.predicate) else {
            self.push(
                DiagnosticCode::UndeclaredPredicate,
                atom.span,
                format!("predicate `{}` is not declared", atom.predicate),
            );
            return;
        };
        if decl.params.len() != atom.args.len() {
            self.push(
                DiagnosticCode::ArityMismatch,
                atom.span,
                format!(
                    "`{}` takes {} arguments, found {}",
                    atom.predicate,
                    decl.params.len(),
                    atom.args.len()
                ),
            );
            return;
        }
        for (t, p) in atom.args.iter().zip(&decl.params) {
            let Some(ty) = lookup(t, vars, objects) else { continue };
            if self.types.is_declared(ty)
                && self.types.is_declared(&p.ty)
                && !self.types.is_subtype(ty, &p.ty)
            {
                self.push(
                    DiagnosticCode::TypeMismatch,
                    t.span,
                    format!(
                        "`{}` has type `{ty}` but `{}` expects `{}` for {}",
                        t.name, atom.predicate, p.ty, p.name
                    ),
                );
            }
        }
    }

    /// Reports unbound variables and undeclared objects.
    fn term_type(&mut self, t: &Term, vars: &Scope, objects: &Scope) {
        if lookup(t, vars, objects).is_some() {
            return;
        }
        if t.is_variable() {
            self.push(
                DiagnosticCode::UnboundVariable,
                t.span,
                format!("variable `{}` is not bound by the parameters", t.name),
            );
        } else {
            self.push(
                DiagnosticCode::UndeclaredObject,
                t.span,
                format!("object `{}` is not declared", t.name),
            );
        }
    }

    fn check_condition(&mut self, f: &Formula, vars: &Scope, objects: &Scope) {
        match f {
            Formula::Atom(a) => self.check_atom(a, vars, objects),
            Formula::Not { inner, span } => {
                if !self.negation_ok && !matches!(**inner, Formula::Equality { .. }) {
                    self.push(
                        DiagnosticCode::RequirementMissing,
                        *span,
                        "negative condition without :negative-preconditions".to_string(),
                    );
                }
                self.check_condition(inner, vars, objects);
            }
            Formula::And { children, .. } => {
                for c in children {
                    self.check_condition(c, vars, objects);
                }
            }
            Formula::Equality { left, right, span } => {
                if !self.equality_ok {
                    self.push(
                        DiagnosticCode::RequirementMissing,
                        *span,
                        "equality without :equality".to_string(),
                    );
                }
                self.term_type(left, vars, objects);
                self.term_type(right, vars, objects);
            }
        }
    }

    fn check_effect(&mut self, f: &Formula, vars: &Scope, objects: &Scope) {
        match f {
            Formula::Atom(a) => self.check_atom(a, vars, objects),
            Formula::Not { inner, span } => match &**inner {
                Formula::Atom(a) => self.check_atom(a, vars, objects),
                _ => self.push(
                    DiagnosticCode::MalformedEffect,
                    *span,
                    "only atoms can be deleted by an effect".to_string(),
                ),
            },
            Formula::And { children, .. } => {
                for c in children {
                    self.check_effect(c, vars, objects);
                }
            }
            Formula::Equality { span, .. } => self.push(
                DiagnosticCode::MalformedEffect,
                *span,
                "effects cannot assert equality".to_string(),
            ),
        }
    }

    fn check_function_use(&mut self, name: &str, span: Span) {
        if self.domain.function(name).is_none() {
            self.push(
                DiagnosticCode::UndeclaredPredicate,
                span,
                format!("function `{name}` is not declared"),
            );
        }
    }
}

fn lookup<'s>(t: &Term, vars: &Scope<'s>, objects: &Scope<'s>) -> Option<&'s str> {
    if t.is_variable() {
        vars.get(t.name.as_str()).copied()
    } else {
        objects.get(t.name.as_str()).copied()
    }
}

fn scope(names: &[TypedName]) -> Scope<'_> {
    let mut s = Scope::new();
    for n in names {
        s.entry(n.name.as_str()).or_insert(n.ty.as_str());
    }
    s
}

fn checker<'a>(d: &'a Domain, extra_requirements: &[RequirementFlag]) -> Checker<'a> {
    let (types, diags) = build_type_hierarchy(d);
    let has = |r: Requirement| d.has_requirement(r) || extra_requirements.iter().any(|f| f.known == Some(r));
    Checker {
        domain: d,
        types,
        diags,
        negation_ok: has(Requirement::NegativePreconditions),
        equality_ok: has(Requirement::Equality),
    }
}

pub fn check_domain(d: &Domain) -> ValidationReport {
    let mut c = checker(d, &[]);
    c.check_unknown_requirements(&d.requirements);

    let constants = scope(&d.constants);
    c.check_typed_names(&d.constants);

    let mut seen = HashSet::new();
    for p in &d.predicates {
        if !seen.insert(p.name.as_str()) {
            c.push(
                DiagnosticCode::DuplicatePredicate,
                p.span,
                format!("predicate `{}` is declared more than once", p.name),
            );
        }
        c.check_typed_names(&p.params);
    }
    for f in &d.functions {
        c.check_typed_names(&f.params);
    }

    for a in &d.actions {
        c.check_typed_names(&a.params);
        let vars = scope(&a.params);
        c.check_condition(&a.precondition, &vars, &constants);
        c.check_effect(&a.effect, &vars, &constants);
        if let Some(cost) = &a.cost {
            c.check_function_use(&cost.function, cost.span);
            if !d.has_requirement(Requirement::ActionCosts) {
                c.push(
                    DiagnosticCode::RequirementMissing,
                    cost.span,
                    "cost effect without :action-costs".to_string(),
                );
            }
        }
    }

    ValidationReport::from_unsorted(c.diags)
}

/// Checks `p` against `d`. Diagnostics concern the problem text only; run
/// [`check_domain`] for the domain itself.
pub fn check_problem(p: &Problem, d: &Domain) -> ValidationReport {
    let mut c = checker(d, &p.requirements);
    // Hierarchy findings belong to the domain report.
    c.diags.clear();

    if p.domain_name != d.name {
        c.push(
            DiagnosticCode::DomainMismatch,
            p.domain_name_span,
            format!("problem is for domain `{}`, checked against `{}`", p.domain_name, d.name),
        );
    }
    c.check_unknown_requirements(&p.requirements);
    c.check_typed_names(&p.objects);

    let mut objects = scope(&d.constants);
    for o in &p.objects {
        objects.entry(o.name.as_str()).or_insert(o.ty.as_str());
    }
    let no_vars = Scope::new();

    for a in &p.init {
        c.check_atom(a, &no_vars, &objects);
    }
    for n in &p.numeric_init {
        c.check_function_use(&n.function, n.span);
    }
    c.check_condition(&p.goal, &no_vars, &objects);
    if let Some(m) = &p.metric {
        c.check_function_use(&m.function, m.span);
    }

    ValidationReport::from_unsorted(c.diags)
}
