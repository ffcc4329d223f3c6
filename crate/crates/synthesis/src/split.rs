//! Splitting a model generation into its reasoning and its PDDL block.

use crate::task::SynthError;

const MARKERS: [&str; 2] = ["### Domain:", "### Problem:"];
const FENCE: &str = "```pddl";

/// Separates a chain-of-thought generation into `(thought, pddl)`.
///
/// After the section marker (or anywhere, when there is none) the first
/// ```` ```pddl ```` fence wins, then the first balanced `(define ...)`.
/// The thought is the text that remains once the marker and the extracted
/// block are cut out.
pub fn split_cot_output(text: &str) -> Result<(String, String), SynthError> {
    let marker = MARKERS
        .iter()
        .filter_map(|m| text.find(m).map(|at| (at, at + m.len())))
        .min();
    let regions: Vec<usize> = match marker {
        Some((_, after)) => vec![after, 0],
        None => vec![0],
    };
    for from in regions {
        let found = find_fence(text, from).or_else(|| find_define(text, from));
        if let Some((cut_start, cut_end, body)) = found {
            let mut thought = String::new();
            let mut keep = |s: &str| thought.push_str(s);
            match marker {
                Some((m_start, m_end)) if m_end <= cut_start => {
                    keep(&text[..m_start]);
                    keep(&text[m_end..cut_start]);
                }
                _ => keep(&text[..cut_start]),
            }
            keep(&text[cut_end..]);
            return Ok((thought.trim().to_string(), body.trim().to_string()));
        }
    }
    Err(SynthError::NoDomainFound)
}

/// `(cut_start, cut_end, body)` of the first pddl fence at or after `from`.
fn find_fence(text: &str, from: usize) -> Option<(usize, usize, &str)> {
    let lower = text[from..].to_ascii_lowercase();
    let start = from + lower.find(FENCE)?;
    let body_start = start + FENCE.len();
    let (body_end, cut_end) = match text[body_start..].find("```") {
        Some(rel) => (body_start + rel, body_start + rel + 3),
        None => (text.len(), text.len()),
    };
    let body = &text[body_start..body_end];
    body.contains('(').then_some((start, cut_end, body))
}

/// The first `(define` at or after `from` whose parentheses balance;
/// `;` comments are skipped.
fn find_define(text: &str, from: usize) -> Option<(usize, usize, &str)> {
    let mut search = from;
    while let Some(rel) = text[search..].find("(define") {
        let start = search + rel;
        if let Some(end) = balanced_end(text, start) {
            return Some((start, end, &text[start..end]));
        }
        search = start + 1;
    }
    None
}

fn balanced_end(text: &str, start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_comment = false;
    for (i, c) in text[start..].char_indices() {
        match c {
            '\n' => in_comment = false,
            _ if in_comment => {}
            ';' => in_comment = true,
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(start + i + 1);
                }
            }
            _ => {}
        }
    }
    None
}
