//! Domain and problem syntax trees.
//!
//! Identifiers are stored lowercased. Every node keeps the byte span it was
//! parsed from; spans are ignored by `==` (see [`Span`]).

use crate::span::Span;

/// Implicit root of every type hierarchy and the type of untyped names.
pub const OBJECT: &str = "object";

/// A name with its declared type: a parameter, constant or object.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
    pub span: Span,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.into(),
            span: Span::default(),
        }
    }

    pub fn is_variable(&self) -> bool {
        self.name.starts_with('?')
    }
}

/// An argument position: `?var` or an object/constant name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub name: String,
    pub span: Span,
}

impl Term {
    pub fn new(name: impl Into<String>) -> Self {
        Term {
            name: name.into(),
            span: Span::default(),
        }
    }

    pub fn is_variable(&self) -> bool {
        self.name.starts_with('?')
    }
}

/// `(pred t1 ... tn)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
    pub span: Span,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args.iter().map(|a| Term::new(*a)).collect(),
            span: Span::default(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_variable())
    }
}

/// Preconditions, goals and effects.
///
/// In preconditions and goals `Not` wraps only an `Atom` or `Equality` and
/// `And` never directly contains another `And`. Effects are parsed with the
/// same shape rules except that a negated conjunction is kept as written so
/// the validator can report it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not { inner: Box<Formula>, span: Span },
    And { children: Vec<Formula>, span: Span },
    Equality { left: Term, right: Term, span: Span },
}

impl Formula {
    pub fn and(children: Vec<Formula>) -> Formula {
        Formula::And {
            children,
            span: Span::default(),
        }
    }

    pub fn negate(inner: Formula) -> Formula {
        Formula::Not {
            inner: Box::new(inner),
            span: Span::default(),
        }
    }

    pub fn empty() -> Formula {
        Formula::and(Vec::new())
    }

    pub fn span(&self) -> Span {
        match self {
            Formula::Atom(a) => a.span,
            Formula::Not { span, .. } | Formula::And { span, .. } | Formula::Equality { span, .. } => {
                *span
            }
        }
    }

    /// Top-level conjuncts: the children of an `And`, or the formula itself.
    pub fn conjuncts(&self) -> &[Formula] {
        match self {
            Formula::And { children, .. } => children,
            other => std::slice::from_ref(other),
        }
    }

    /// Visits every atom, with `true` for atoms under a negation.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom, bool)) {
        fn walk<'a>(formula: &'a Formula, negated: bool, f: &mut impl FnMut(&'a Atom, bool)) {
            match formula {
                Formula::Atom(a) => f(a, negated),
                Formula::Not { inner, .. } => walk(inner, !negated, f),
                Formula::And { children, .. } => {
                    for c in children {
                        walk(c, negated, f);
                    }
                }
                Formula::Equality { .. } => {}
            }
        }
        walk(self, false, f)
    }

    /// Visits every term, including equality operands.
    pub fn for_each_term<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match self {
            Formula::Atom(a) => a.args.iter().for_each(f),
            Formula::Not { inner, .. } => inner.for_each_term(f),
            Formula::And { children, .. } => {
                for c in children {
                    c.for_each_term(f);
                }
            }
            Formula::Equality { left, right, .. } => {
                f(left);
                f(right);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Requirement {
    Strips,
    Typing,
    NegativePreconditions,
    Equality,
    ActionCosts,
}

impl Requirement {
    pub const ALL: [Requirement; 5] = [
        Requirement::Strips,
        Requirement::Typing,
        Requirement::NegativePreconditions,
        Requirement::Equality,
        Requirement::ActionCosts,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::NegativePreconditions => ":negative-preconditions",
            Requirement::Equality => ":equality",
            Requirement::ActionCosts => ":action-costs",
        }
    }

    pub fn from_keyword(keyword: &str) -> Option<Requirement> {
        Requirement::ALL.into_iter().find(|r| r.keyword() == keyword)
    }
}

/// One `:requirements` entry. Flags outside the supported subset are kept
/// verbatim in `keyword` with `known == None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RequirementFlag {
    pub keyword: String,
    pub known: Option<Requirement>,
    pub span: Span,
}

impl RequirementFlag {
    pub fn new(keyword: &str) -> Self {
        RequirementFlag {
            keyword: keyword.to_string(),
            known: Requirement::from_keyword(keyword),
            span: Span::default(),
        }
    }
}

/// `child - parent` in `:types`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeDecl {
    pub name: String,
    pub parent: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<TypedName>,
    pub span: Span,
}

/// `(increase (total-cost) k)` inside an action effect.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CostEffect {
    pub function: String,
    pub amount: u64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Formula,
    pub effect: Formula,
    pub cost: Option<CostEffect>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<RequirementFlag>,
    pub types: Vec<TypeDecl>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub functions: Vec<FunctionDecl>,
    pub actions: Vec<ActionSchema>,
    pub span: Span,
}

impl Domain {
    pub fn has_requirement(&self, req: Requirement) -> bool {
        self.requirements.iter().any(|r| r.known == Some(req))
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<&TypedName> {
        self.constants.iter().find(|c| c.name == name)
    }
}

/// `(= (f) v)` in `:init`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericInit {
    pub function: String,
    pub value: f64,
    pub span: Span,
}

/// `(:metric minimize (f))`. Only minimization is supported.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Metric {
    pub function: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub domain_name: String,
    pub domain_name_span: Span,
    pub requirements: Vec<RequirementFlag>,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub numeric_init: Vec<NumericInit>,
    pub goal: Formula,
    pub metric: Option<Metric>,
    pub span: Span,
}

impl Problem {
    pub fn object(&self, name: &str) -> Option<&TypedName> {
        self.objects.iter().find(|o| o.name == name)
    }
}
