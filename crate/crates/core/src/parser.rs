//! PDDL domain and problem parsing.
//!
//! The accepted language is the STRIPS fragment with typing, negative
//! preconditions, equality and `total-cost` action costs. Constructs outside
//! it (quantifiers, conditional effects, disjunction, durative actions,
//! general numeric fluents) are rejected with `UNSUPPORTED_CONSTRUCT`.
//!
//! Parsing is deliberately lenient about semantics: sigil-less variables,
//! undeclared predicates or duplicate predicate names all parse, and are left
//! for the validator to report.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::ast::*;
use crate::sexpr::{self, SExpr, SExprError};
use crate::span::{LineIndex, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorCode {
    UnbalancedParens,
    UnexpectedEof,
    MalformedSection,
    UnsupportedConstruct,
    NotADomain,
    NotAProblem,
}

impl ParseErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorCode::UnbalancedParens => "UNBALANCED_PARENS",
            ParseErrorCode::UnexpectedEof => "UNEXPECTED_EOF",
            ParseErrorCode::MalformedSection => "MALFORMED_SECTION",
            ParseErrorCode::UnsupportedConstruct => "UNSUPPORTED_CONSTRUCT",
            ParseErrorCode::NotADomain => "NOT_A_DOMAIN",
            ParseErrorCode::NotAProblem => "NOT_A_PROBLEM",
        }
    }
}

impl fmt::Display for ParseErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{code}: {message}")]
pub struct ParseError {
    pub code: ParseErrorCode,
    pub span: Span,
    pub message: String,
}

impl ParseError {
    fn new(code: ParseErrorCode, span: Span, message: impl Into<String>) -> Self {
        ParseError {
            code,
            span,
            message: message.into(),
        }
    }

    fn malformed(span: Span, message: impl Into<String>) -> Self {
        Self::new(ParseErrorCode::MalformedSection, span, message)
    }

    fn unsupported(span: Span, message: impl Into<String>) -> Self {
        Self::new(ParseErrorCode::UnsupportedConstruct, span, message)
    }

    /// `CODE line:col message`, positioned against `source`.
    pub fn render(&self, source: &str) -> String {
        let (line, col) = LineIndex::new(source).line_col(self.span.start);
        format!("{} {}:{} {}", self.code, line, col, self.message)
    }
}

impl From<SExprError> for ParseError {
    fn from(e: SExprError) -> Self {
        match e {
            SExprError::UnbalancedParens(span) => {
                ParseError::new(ParseErrorCode::UnbalancedParens, span, e.to_string())
            }
            SExprError::UnexpectedEof(span) => {
                ParseError::new(ParseErrorCode::UnexpectedEof, span, e.to_string())
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, ParseError>;

/// Either kind of top-level PDDL file.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Domain(Domain),
    Problem(Problem),
}

const UNSUPPORTED_SECTIONS: &[&str] = &[
    ":durative-action",
    ":derived",
    ":process",
    ":event",
    ":constraints",
];

const UNSUPPORTED_CONNECTIVES: &[&str] = &[
    "or", "imply", "exists", "forall", "when", "preference", "over", ">", "<", ">=", "<=",
];

const NUMERIC_EFFECTS: &[&str] = &["increase", "decrease", "assign", "scale-up", "scale-down"];

pub fn parse_domain(text: &str) -> Result<Domain> {
    let root = read_root(text)?;
    let (kind, name, items) = define_header(&root, ParseErrorCode::NotADomain)?;
    if kind != "domain" {
        return Err(ParseError::new(
            ParseErrorCode::NotADomain,
            root.span(),
            format!("expected (define (domain ...)), found ({kind} ...)"),
        ));
    }

    let mut domain = Domain {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        functions: Vec::new(),
        actions: Vec::new(),
        span: root.span(),
    };
    let mut action_names = HashSet::new();

    for item in items {
        let (keyword, body) = section(item)?;
        match keyword.as_str() {
            ":requirements" => domain.requirements.extend(requirements(body)?),
            ":types" => {
                for t in typed_list(body, false)? {
                    domain.types.push(TypeDecl {
                        name: t.name,
                        parent: t.ty,
                        span: t.span,
                    });
                }
            }
            ":constants" => domain.constants.extend(typed_list(body, false)?),
            ":predicates" => {
                for p in body {
                    domain.predicates.push(predicate_decl(p)?);
                }
            }
            ":functions" => domain.functions.extend(function_decls(body)?),
            ":action" => {
                let action = action(item.span(), body)?;
                if !action_names.insert(action.name.clone()) {
                    return Err(ParseError::malformed(
                        action.span,
                        format!("duplicate action `{}`", action.name),
                    ));
                }
                domain.actions.push(action);
            }
            k if UNSUPPORTED_SECTIONS.contains(&k) => {
                return Err(ParseError::unsupported(
                    item.span(),
                    format!("{k} is outside the supported STRIPS subset"),
                ));
            }
            k => {
                return Err(ParseError::malformed(
                    item.span(),
                    format!("unknown domain section {k}"),
                ))
            }
        }
    }
    Ok(domain)
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let root = read_root(text)?;
    let (kind, name, items) = define_header(&root, ParseErrorCode::NotAProblem)?;
    if kind != "problem" {
        return Err(ParseError::new(
            ParseErrorCode::NotAProblem,
            root.span(),
            format!("expected (define (problem ...)), found ({kind} ...)"),
        ));
    }

    let mut domain_name = None;
    let mut requirements_ = Vec::new();
    let mut objects = Vec::new();
    let mut init = Vec::new();
    let mut numeric_init = Vec::new();
    let mut goal = None;
    let mut metric = None;

    for item in items {
        let (keyword, body) = section(item)?;
        match keyword.as_str() {
            ":domain" => match body {
                [SExpr::Atom { text, span }] => {
                    identifier(text, *span)?;
                    domain_name = Some((lower(text), *span));
                }
                _ => return Err(ParseError::malformed(item.span(), "expected (:domain name)")),
            },
            ":requirements" => requirements_.extend(requirements(body)?),
            ":objects" => objects.extend(typed_list(body, false)?),
            ":init" => {
                for fact in body {
                    init_fact(fact, &mut init, &mut numeric_init)?;
                }
            }
            ":goal" => match body {
                [g] => goal = Some(formula(g, Mode::Condition)?),
                _ => return Err(ParseError::malformed(item.span(), "expected (:goal formula)")),
            },
            ":metric" => metric = Some(metric_section(item.span(), body)?),
            ":constraints" => {
                return Err(ParseError::unsupported(
                    item.span(),
                    ":constraints is outside the supported STRIPS subset",
                ))
            }
            k => {
                return Err(ParseError::malformed(
                    item.span(),
                    format!("unknown problem section {k}"),
                ))
            }
        }
    }

    let (domain_name, domain_name_span) = domain_name
        .ok_or_else(|| ParseError::malformed(root.span(), "problem has no (:domain ...) section"))?;
    let goal =
        goal.ok_or_else(|| ParseError::malformed(root.span(), "problem has no (:goal ...) section"))?;

    Ok(Problem {
        name,
        domain_name,
        domain_name_span,
        requirements: requirements_,
        objects,
        init,
        numeric_init,
        goal,
        metric,
        span: root.span(),
    })
}

/// Parses a domain or a problem, deciding by the `define` header.
pub fn parse_document(text: &str) -> Result<Document> {
    let root = read_root(text)?;
    let (kind, _, _) = define_header(&root, ParseErrorCode::MalformedSection)?;
    match kind.as_str() {
        "domain" => parse_domain(text).map(Document::Domain),
        "problem" => parse_problem(text).map(Document::Problem),
        other => Err(ParseError::malformed(
            root.span(),
            format!("expected a domain or problem definition, found ({other} ...)"),
        )),
    }
}

fn read_root(text: &str) -> Result<SExpr> {
    let tokens = sexpr::tokenize(text);
    let read = sexpr::parse_sexpr(&tokens)?;
    if let Some(trailing) = read.trailing {
        let code = if text[trailing.start..].starts_with(')') {
            ParseErrorCode::UnbalancedParens
        } else {
            ParseErrorCode::MalformedSection
        };
        return Err(ParseError::new(
            code,
            trailing,
            "unexpected content after the top-level definition",
        ));
    }
    Ok(read.expr)
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

fn is_identifier(s: &str) -> bool {
    let body = s.strip_prefix('?').unwrap_or(s);
    let mut chars = body.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic())
        && chars.all(|c| c.is_alphanumeric() || c == '-' || c == '_')
}

fn identifier(text: &str, span: Span) -> Result<String> {
    if is_identifier(text) {
        Ok(lower(text))
    } else {
        Err(ParseError::malformed(span, format!("`{text}` is not a valid identifier")))
    }
}

fn atom_text(e: &SExpr, what: &str) -> Result<(String, Span)> {
    match e {
        SExpr::Atom { text, span } => Ok((lower(text), *span)),
        SExpr::List { span, .. } => {
            Err(ParseError::malformed(*span, format!("expected {what}, found a list")))
        }
    }
}

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list()
        .ok_or_else(|| ParseError::malformed(e.span(), format!("expected {what}, found an atom")))
}

/// Splits `(define (kind name) items...)`.
fn define_header(root: &SExpr, code: ParseErrorCode) -> Result<(String, String, &[SExpr])> {
    let not_define = || ParseError::new(code, root.span(), "expected (define (...) ...)");
    let children = root.as_list().ok_or_else(not_define)?;
    match children {
        [SExpr::Atom { text, .. }, header, rest @ ..] if text.eq_ignore_ascii_case("define") => {
            match header.as_list() {
                Some([SExpr::Atom { text: kind, .. }, SExpr::Atom { text: name, span }]) => {
                    Ok((lower(kind), identifier(name, *span)?, rest))
                }
                _ => Err(ParseError::new(code, header.span(), "expected (domain name) or (problem name)")),
            }
        }
        _ => Err(not_define()),
    }
}

/// Splits `(:keyword body...)`.
fn section(item: &SExpr) -> Result<(String, &[SExpr])> {
    match item.as_list() {
        Some([SExpr::Atom { text, .. }, body @ ..]) if text.starts_with(':') => Ok((lower(text), body)),
        _ => Err(ParseError::malformed(item.span(), "expected a (:section ...) form")),
    }
}

fn requirements(body: &[SExpr]) -> Result<Vec<RequirementFlag>> {
    body.iter()
        .map(|e| {
            let (text, span) = atom_text(e, "a requirement flag")?;
            if !text.starts_with(':') {
                return Err(ParseError::malformed(span, format!("`{text}` is not a requirement flag")));
            }
            Ok(RequirementFlag {
                known: Requirement::from_keyword(&text),
                keyword: text,
                span,
            })
        })
        .collect()
}

/// `a b - t c - u d` → a:t b:t c:u d:object. With `variables`, every name
/// must be a variable or a sigil-less identifier (accepted for diagnosis).
fn typed_list(items: &[SExpr], variables: bool) -> Result<Vec<TypedName>> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Span)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let (text, span) = atom_text(&items[i], "a name")?;
        if text == "-" {
            let Some(ty_expr) = items.get(i + 1) else {
                return Err(ParseError::malformed(span, "`-` must be followed by a type"));
            };
            if let SExpr::List { children, span } = ty_expr {
                if matches!(children.first().and_then(SExpr::as_atom), Some(a) if a.eq_ignore_ascii_case("either")) {
                    return Err(ParseError::unsupported(*span, "(either ...) types are not supported"));
                }
            }
            let (ty, ty_span) = atom_text(ty_expr, "a type name")?;
            let ty = identifier(&ty, ty_span)?;
            if pending.is_empty() {
                return Err(ParseError::malformed(span, "type annotation without names"));
            }
            for (name, span) in pending.drain(..) {
                out.push(TypedName {
                    name,
                    ty: ty.clone(),
                    span: span.join(ty_span),
                });
            }
            i += 2;
        } else {
            let name = identifier(&text, span)?;
            if !variables && name.starts_with('?') {
                return Err(ParseError::malformed(span, format!("`{name}` must not be a variable here")));
            }
            pending.push((name, span));
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|(name, span)| TypedName {
        name,
        ty: OBJECT.to_string(),
        span,
    }));
    Ok(out)
}

fn unique_params(params: &[TypedName]) -> Result<()> {
    let mut seen = HashSet::new();
    for p in params {
        if !seen.insert(p.name.as_str()) {
            return Err(ParseError::malformed(p.span, format!("parameter `{}` declared twice", p.name)));
        }
    }
    Ok(())
}

fn predicate_decl(e: &SExpr) -> Result<PredicateDecl> {
    let items = list(e, "a predicate declaration")?;
    let Some((head, rest)) = items.split_first() else {
        return Err(ParseError::malformed(e.span(), "empty predicate declaration"));
    };
    let (name, span) = atom_text(head, "a predicate name")?;
    let name = identifier(&name, span)?;
    let params = typed_list(rest, true)?;
    unique_params(&params)?;
    Ok(PredicateDecl {
        name,
        params,
        span: e.span(),
    })
}

fn function_decls(body: &[SExpr]) -> Result<Vec<FunctionDecl>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < body.len() {
        let e = &body[i];
        if e.as_atom() == Some("-") {
            // `- number` result type annotation applies to the preceding group.
            match body.get(i + 1).and_then(SExpr::as_atom) {
                Some(t) if t.eq_ignore_ascii_case("number") => {
                    i += 2;
                    continue;
                }
                _ => return Err(ParseError::unsupported(e.span(), "only numeric functions are supported")),
            }
        }
        let items = list(e, "a function declaration")?;
        let Some((head, rest)) = items.split_first() else {
            return Err(ParseError::malformed(e.span(), "empty function declaration"));
        };
        let (name, span) = atom_text(head, "a function name")?;
        out.push(FunctionDecl {
            name: identifier(&name, span)?,
            params: typed_list(rest, true)?,
            span: e.span(),
        });
        i += 1;
    }
    Ok(out)
}

fn action(span: Span, body: &[SExpr]) -> Result<ActionSchema> {
    let Some((head, mut rest)) = body.split_first() else {
        return Err(ParseError::malformed(span, "(:action) without a name"));
    };
    let (name, name_span) = atom_text(head, "an action name")?;
    let name = identifier(&name, name_span)?;

    let mut params = Vec::new();
    let mut precondition = None;
    let mut effect = None;
    while let Some((key, tail)) = rest.split_first() {
        let (key, key_span) = atom_text(key, "an action keyword")?;
        let Some((value, tail)) = tail.split_first() else {
            return Err(ParseError::malformed(key_span, format!("{key} has no value")));
        };
        match key.as_str() {
            ":parameters" => {
                params = typed_list(list(value, "a parameter list")?, true)?;
                unique_params(&params)?;
            }
            ":precondition" => precondition = Some(formula(value, Mode::Condition)?),
            ":effect" => effect = Some(effect_formula(value)?),
            other => {
                return Err(ParseError::malformed(
                    key_span,
                    format!("unknown action keyword {other}"),
                ))
            }
        }
        rest = tail;
    }
    let (effect, cost) = effect.unwrap_or((Formula::empty(), None));
    Ok(ActionSchema {
        name,
        params,
        precondition: precondition.unwrap_or_else(Formula::empty),
        effect,
        cost,
        span,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Condition,
    Effect,
}

fn term(e: &SExpr) -> Result<Term> {
    match e {
        SExpr::Atom { text, span } => Ok(Term {
            name: identifier(text, *span)?,
            span: *span,
        }),
        SExpr::List { span, .. } => Err(ParseError::unsupported(
            *span,
            "nested terms (function applications) are not supported",
        )),
    }
}

fn formula(e: &SExpr, mode: Mode) -> Result<Formula> {
    let span = e.span();
    let items = match e {
        SExpr::List { children, .. } => children,
        SExpr::Atom { text, .. } => {
            return Err(ParseError::malformed(span, format!("expected a formula, found `{text}`")))
        }
    };
    let Some((head, args)) = items.split_first() else {
        return Ok(Formula::And {
            children: Vec::new(),
            span,
        });
    };
    let (op, op_span) = atom_text(head, "a predicate or connective")?;
    match op.as_str() {
        "and" => {
            let mut children = Vec::with_capacity(args.len());
            for a in args {
                match formula(a, mode)? {
                    Formula::And { children: nested, .. } => children.extend(nested),
                    f => children.push(f),
                }
            }
            Ok(Formula::And { children, span })
        }
        "not" => {
            let [inner] = args else {
                return Err(ParseError::malformed(span, "(not ...) takes exactly one argument"));
            };
            match formula(inner, mode)? {
                f @ (Formula::Atom(_) | Formula::Equality { .. }) => Ok(Formula::Not {
                    inner: Box::new(f),
                    span,
                }),
                Formula::Not { inner, .. } if mode == Mode::Condition => Ok(*inner),
                f if mode == Mode::Effect => Ok(Formula::Not {
                    inner: Box::new(f),
                    span,
                }),
                _ => Err(ParseError::unsupported(
                    span,
                    "negated conjunctions are disjunctive and not supported",
                )),
            }
        }
        "=" => {
            let [l, r] = args else {
                return Err(ParseError::malformed(span, "(= ...) takes exactly two arguments"));
            };
            Ok(Formula::Equality {
                left: term(l)?,
                right: term(r)?,
                span,
            })
        }
        c if UNSUPPORTED_CONNECTIVES.contains(&c) => Err(ParseError::unsupported(
            span,
            format!("({c} ...) is outside the supported STRIPS subset"),
        )),
        c if NUMERIC_EFFECTS.contains(&c) => Err(ParseError::unsupported(
            span,
            format!("({c} ...) is only supported as (increase (total-cost) k) in effects"),
        )),
        _ => {
            let predicate = identifier(&op, op_span).or_else(|err| {
                // LLM output such as `(?h-down)` keeps a variable in predicate
                // position; let it through so the validator can name it.
                if op.starts_with('?') {
                    Ok(op.clone())
                } else {
                    Err(err)
                }
            })?;
            let args = args.iter().map(term).collect::<Result<_>>()?;
            Ok(Formula::Atom(Atom {
                predicate,
                args,
                span,
            }))
        }
    }
}

fn effect_formula(e: &SExpr) -> Result<(Formula, Option<CostEffect>)> {
    let mut cost = None;
    let mut take_cost = |item: &SExpr| -> Result<bool> {
        let Some([SExpr::Atom { text, .. }, rest @ ..]) = item.as_list() else {
            return Ok(false);
        };
        if !text.eq_ignore_ascii_case("increase") {
            return Ok(false);
        }
        let parsed = cost_effect(item.span(), rest)?;
        if cost.replace(parsed).is_some() {
            return Err(ParseError::unsupported(item.span(), "more than one cost effect"));
        }
        Ok(true)
    };

    match e.as_list() {
        Some([SExpr::Atom { text, .. }, items @ ..]) if text.eq_ignore_ascii_case("and") => {
            let mut children = Vec::new();
            for item in items {
                if take_cost(item)? {
                    continue;
                }
                match formula(item, Mode::Effect)? {
                    Formula::And { children: nested, .. } => children.extend(nested),
                    f => children.push(f),
                }
            }
            Ok((
                Formula::And {
                    children,
                    span: e.span(),
                },
                cost,
            ))
        }
        _ => {
            if take_cost(e)? {
                Ok((
                    Formula::And {
                        children: Vec::new(),
                        span: e.span(),
                    },
                    cost,
                ))
            } else {
                Ok((formula(e, Mode::Effect)?, None))
            }
        }
    }
}

fn cost_effect(span: Span, args: &[SExpr]) -> Result<CostEffect> {
    let [target, amount] = args else {
        return Err(ParseError::malformed(span, "(increase ...) takes exactly two arguments"));
    };
    let function = match target.as_list() {
        Some([SExpr::Atom { text, span }]) => identifier(text, *span)?,
        _ => {
            return Err(ParseError::unsupported(
                target.span(),
                "only nullary functions such as (total-cost) can be increased",
            ))
        }
    };
    let amount = match amount {
        SExpr::Atom { text, .. } => text.parse::<u64>().map_err(|_| {
            ParseError::unsupported(amount.span(), format!("cost `{text}` is not a nonnegative integer"))
        })?,
        SExpr::List { span, .. } => {
            return Err(ParseError::unsupported(*span, "computed costs are not supported"))
        }
    };
    Ok(CostEffect {
        function,
        amount,
        span,
    })
}

fn init_fact(e: &SExpr, init: &mut Vec<Atom>, numeric: &mut Vec<NumericInit>) -> Result<()> {
    let items = list(e, "an initial fact")?;
    match items {
        [SExpr::Atom { text, .. }, target, value] if text == "=" && target.as_list().is_some() => {
            let function = match target.as_list() {
                Some([SExpr::Atom { text, span }]) => identifier(text, *span)?,
                _ => {
                    return Err(ParseError::unsupported(
                        target.span(),
                        "only nullary numeric fluents can be initialised",
                    ))
                }
            };
            let (value_text, value_span) = atom_text(value, "a number")?;
            let value = value_text.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                ParseError::malformed(value_span, format!("`{value_text}` is not a number"))
            })?;
            numeric.push(NumericInit {
                function,
                value,
                span: e.span(),
            });
            Ok(())
        }
        _ => match formula(e, Mode::Condition)? {
            Formula::Atom(a) => {
                init.push(a);
                Ok(())
            }
            Formula::Not { span, .. } => Err(ParseError::unsupported(
                span,
                "negative initial facts are implicit under the closed-world assumption",
            )),
            other => Err(ParseError::malformed(
                other.span(),
                "initial facts must be atoms or (= (f) n)",
            )),
        },
    }
}

fn metric_section(span: Span, body: &[SExpr]) -> Result<Metric> {
    let [dir, expr] = body else {
        return Err(ParseError::malformed(span, "expected (:metric minimize (f))"));
    };
    let (dir, dir_span) = atom_text(dir, "minimize")?;
    if dir != "minimize" {
        return Err(ParseError::unsupported(dir_span, format!("metric direction `{dir}` is not supported")));
    }
    match expr.as_list() {
        Some([SExpr::Atom { text, span: fspan }]) => Ok(Metric {
            function: identifier(text, *fspan)?,
            span,
        }),
        _ => Err(ParseError::unsupported(
            expr.span(),
            "only (:metric minimize (f)) over a nullary function is supported",
        )),
    }
}
