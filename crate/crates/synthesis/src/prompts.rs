//! Prompt templates for sampling, feedback and update calls.
//!
//! Placeholders are `{G}` (task input), `{T}` (thoughts), `{D}` (current
//! artifact), `{F}` (feedback) and `{DOMAIN}`; they are replaced in a single
//! pass, so substituted text is never rescanned.

use llm_backend::ChatMessage;

use crate::task::{SynthesisTask, TaskKind};

pub const COT_NL2DOMAIN: &str = include_str!("../prompts/cot_nl2domain.txt");
pub const COT_PROB2DOMAIN: &str = include_str!("../prompts/cot_prob2domain.txt");
pub const COT_NL2PROBLEM: &str = include_str!("../prompts/cot_nl2problem.txt");
pub const OPT_DOMAIN: &str = include_str!("../prompts/opt.txt");
pub const UPDATE_DOMAIN: &str = include_str!("../prompts/update.txt");
pub const OPT_PROBLEM: &str = include_str!("../prompts/opt_problem.txt");
pub const UPDATE_PROBLEM: &str = include_str!("../prompts/update_problem.txt");

/// Replaces every `{NAME}` whose name is in `values`; other braces are kept.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            values.iter().find(|(k, _)| *k == name).map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn cot_template(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Nl2Domain => COT_NL2DOMAIN,
        TaskKind::Prob2Domain => COT_PROB2DOMAIN,
        TaskKind::Nl2Problem => COT_NL2PROBLEM,
    }
}

pub fn build_cot_prompt(task: &SynthesisTask) -> Vec<ChatMessage> {
    let domain = task.domain_text.as_deref().unwrap_or("");
    vec![ChatMessage::user(fill(
        cot_template(task.kind),
        &[("G", &task.g_text), ("DOMAIN", domain)],
    ))]
}

pub fn build_opt_prompt(task: &SynthesisTask, thought: &str, artifact: &str) -> Vec<ChatMessage> {
    let template = if task.kind.produces_problem() { OPT_PROBLEM } else { OPT_DOMAIN };
    vec![ChatMessage::user(fill(
        template,
        &[("G", &task.g_text), ("T", thought), ("D", artifact)],
    ))]
}

pub fn build_update_prompt(task: &SynthesisTask, thought: &str, artifact: &str, feedback: &str) -> Vec<ChatMessage> {
    let template = if task.kind.produces_problem() { UPDATE_PROBLEM } else { UPDATE_DOMAIN };
    vec![ChatMessage::user(fill(
        template,
        &[("G", &task.g_text), ("T", thought), ("D", artifact), ("F", feedback)],
    ))]
}
