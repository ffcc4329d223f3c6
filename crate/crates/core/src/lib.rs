//! PDDL syntax for a STRIPS subset: tokenizer, parser, canonical printer and
//! a VAL-style validator.
//!
//! Supported requirements are `:strips`, `:typing`, `:negative-preconditions`,
//! `:equality` and `:action-costs` (a single `total-cost` fluent).

pub mod ast;
pub mod parser;
pub mod render;
pub mod sexpr;
pub mod span;
pub mod validate;

pub use ast::*;
pub use parser::{parse_document, parse_domain, parse_problem, Document, ParseError, ParseErrorCode};
pub use render::{render_atom, render_domain, render_formula, render_problem};
pub use span::{LineIndex, Span};
pub use validate::{
    build_type_hierarchy, check_domain, check_problem, Diagnostic, DiagnosticCode, DiagnosticRecord, Severity,
    TypeHierarchy, ValidationReport,
};
