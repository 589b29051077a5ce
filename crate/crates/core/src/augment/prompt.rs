use std::collections::BTreeSet;

use serde::Serialize;

use super::{AugmentError, AugmentedSample};
use crate::program::{serialize_program, FunctionKind, Program};

/// Few-shot prompt asking a language model to phrase the question for a program.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromptBundle {
    pub header: String,
    /// (program JSON, question)
    pub examples: Vec<(String, String)>,
    pub target: String,
    /// No example shared the target's sketch or relations; the nearest
    /// sketches by length were used instead.
    pub fallback: bool,
}

impl PromptBundle {
    pub fn render(&self) -> String {
        let mut s = self.header.clone();
        for (p, q) in &self.examples {
            push_pair(&mut s, p, q);
        }
        push_pair(&mut s, &self.target, "");
        s
    }
}

fn push_pair(s: &mut String, program: &str, question: &str) {
    s.push_str("Program: ");
    s.push_str(program);
    s.push_str("\nQuestion: ");
    s.push_str(question);
    s.push('\n');
}

fn pair_len(program: &str, question: &str) -> usize {
    "Program: ".len() + program.chars().count() + "\nQuestion: ".len() + question.chars().count() + 1
}

/// Instruction text with the acronym dictionary rendered as `"KEY":"Expansion"` entries.
pub fn prompt_header(acronyms: &[(String, String)]) -> String {
    let dict: Vec<String> = acronyms.iter().map(|(k, v)| format!("\"{k}\":\"{v}\"")).collect();
    format!(
        "Each JSON program below queries a knowledge graph of space objects and is followed by the English question it answers.\n\
         Orbit acronyms stand for: [{}]\n",
        dict.join(", ")
    )
}

fn relations(p: &Program) -> BTreeSet<&str> {
    p.calls()
        .iter()
        .filter(|c| c.function == FunctionKind::Relate)
        .filter_map(|c| c.inputs.first().map(String::as_str))
        .collect()
}

/// Examples with the target's sketch, then examples sharing a relation, added
/// in dataset order while the rendered prompt stays within `limit` characters.
pub fn build_prompt(
    target: &AugmentedSample,
    manual: &[(String, Program)],
    limit: usize,
    acronyms: &[(String, String)],
) -> Result<PromptBundle, AugmentError> {
    if manual.is_empty() {
        return Err(AugmentError::EmptyManualSet);
    }
    let header = prompt_header(acronyms);
    let target_json = serialize_program(&target.program);
    let sketch = target.program.sketch();
    let rels = relations(&target.program);

    let same_sketch = manual.iter().filter(|(_, p)| p.sketch() == sketch);
    let same_rel = manual
        .iter()
        .filter(|(_, p)| p.sketch() != sketch && !rels.is_empty() && !relations(p).is_disjoint(&rels));
    let mut eligible: Vec<&(String, Program)> = same_sketch.chain(same_rel).collect();
    let fallback = eligible.is_empty();
    if fallback {
        let n = sketch.len();
        eligible = manual.iter().collect();
        eligible.sort_by_key(|(_, p)| p.len().abs_diff(n));
    }

    let mut used = header.chars().count() + pair_len(&target_json, "");
    let mut examples = Vec::new();
    for (q, p) in eligible {
        let json = serialize_program(p);
        let n = pair_len(&json, q);
        if used + n > limit {
            break;
        }
        used += n;
        examples.push((json, q.clone()));
    }
    if examples.is_empty() {
        return Err(AugmentError::PromptLimit { limit, needed: used });
    }
    Ok(PromptBundle {
        header,
        examples,
        target: target_json,
        fallback,
    })
}
