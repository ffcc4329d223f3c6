//! Tokenizer and s-expression reader.
//!
//! The tokenizer is total: any byte sequence becomes a stream of parens and
//! atoms. Structural problems surface only when the stream is read.

use std::fmt;

use thiserror::Error;

use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    Atom(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Splits `text` into parens and atoms. `;` starts a comment running to the
/// end of the line.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    span: Span::new(i, i + 1),
                });
            }
            ')' => {
                chars.next();
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    span: Span::new(i, i + 1),
                });
            }
            ';' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let start = i;
                let mut end = i;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    end = j + c.len_utf8();
                    chars.next();
                }
                tokens.push(Token {
                    kind: TokenKind::Atom(text[start..end].to_string()),
                    span: Span::new(start, end),
                });
            }
        }
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom { text: String, span: Span },
    List { children: Vec<SExpr>, span: Span },
}

impl SExpr {
    pub fn span(&self) -> Span {
        match self {
            SExpr::Atom { span, .. } | SExpr::List { span, .. } => *span,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { children, .. } => Some(children),
            SExpr::Atom { .. } => None,
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom { text, .. } => f.write_str(text),
            SExpr::List { children, .. } => {
                f.write_str("(")?;
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{child}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SExprError {
    /// A `)` with no matching `(`.
    #[error("unbalanced ')' at byte {}", .0.start)]
    UnbalancedParens(Span),
    /// Input ended inside an open list, or contained no expression at all.
    #[error("unexpected end of input")]
    UnexpectedEof(Span),
}

/// Result of reading one top-level expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadResult {
    pub expr: SExpr,
    /// Span covering any tokens left after the first complete expression.
    pub trailing: Option<Span>,
}

/// Reads the first complete expression from `tokens`.
pub fn parse_sexpr(tokens: &[Token]) -> Result<ReadResult, SExprError> {
    let mut pos = 0;
    let expr = read(tokens, &mut pos)?;
    let trailing = match (tokens.get(pos), tokens.last()) {
        (Some(first), Some(last)) => Some(first.span.join(last.span)),
        _ => None,
    };
    Ok(ReadResult { expr, trailing })
}

/// Tokenizes `text` and reads its first expression.
pub fn read_str(text: &str) -> Result<ReadResult, SExprError> {
    parse_sexpr(&tokenize(text))
}

fn eof_span(tokens: &[Token]) -> Span {
    tokens
        .last()
        .map(|t| Span::new(t.span.end, t.span.end))
        .unwrap_or_default()
}

fn read(tokens: &[Token], pos: &mut usize) -> Result<SExpr, SExprError> {
    let Some(tok) = tokens.get(*pos) else {
        return Err(SExprError::UnexpectedEof(eof_span(tokens)));
    };
    match &tok.kind {
        TokenKind::Atom(text) => {
            *pos += 1;
            Ok(SExpr::Atom {
                text: text.clone(),
                span: tok.span,
            })
        }
        TokenKind::RParen => Err(SExprError::UnbalancedParens(tok.span)),
        TokenKind::LParen => {
            // Iterative over siblings, recursive over depth.
            let open = tok.span;
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(SExprError::UnexpectedEof(eof_span(tokens))),
                    Some(Token {
                        kind: TokenKind::RParen,
                        span,
                    }) => {
                        *pos += 1;
                        return Ok(SExpr::List {
                            children,
                            span: open.join(*span),
                        });
                    }
                    Some(_) => children.push(read(tokens, pos)?),
                }
            }
        }
    }
}
