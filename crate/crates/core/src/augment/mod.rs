//! Training-data augmentation: argument substitution guided by the ontology,
//! few-shot prompts for question generation, and train/validation splitting.

mod mutate;
mod prompt;
mod split;

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use thiserror::Error;

use crate::kb::{EntityRef, KnowledgeBase};
use crate::program::{ArgKind, Program};

pub use mutate::{mutate_program, AugmentedSample, GenerationMeta, Mutation, Mutator, SkipReport, Substitution};
pub use prompt::{build_prompt, prompt_header, PromptBundle};
pub use split::{read_dataset, split_dataset, write_dataset, DatasetRecord, Origin, Split};

/// Sampling temperature recorded for generated questions.
pub const DEFAULT_TEMPERATURE: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error("the manual example set is empty")]
    EmptyManualSet,
    #[error("prompt limit {limit} is below the {needed} characters a single example needs")]
    PromptLimit { limit: usize, needed: usize },
    #[error("validation fraction must lie in [0, 1), got {0}")]
    Fraction(f64),
    #[error("dataset line {line}: {reason}")]
    Dataset { line: usize, reason: String },
    #[error("question generator failed: {0}")]
    Generator(String),
}

/// The orbit-class acronym dictionary shipped in `config/acronyms.json`.
pub fn default_acronyms() -> Vec<(String, String)> {
    serde_json::from_str(include_str!("../../config/acronyms.json")).expect("bundled acronym table parses")
}

/// Client that turns a prompt into question text, e.g. a hosted language model.
pub trait QuestionGenerator: Send + Sync {
    fn model(&self) -> &str;

    fn temperature(&self) -> f64 {
        DEFAULT_TEMPERATURE
    }

    fn generate(&self, prompt: &PromptBundle) -> Result<String, AugmentError>;
}

/// Replays canned answers keyed by target program JSON; unknown targets get
/// the fallback, or an error when there is none.
#[derive(Debug, Default)]
pub struct ReplayGenerator {
    answers: HashMap<String, String>,
    fallback: Option<String>,
    calls: Mutex<usize>,
}

impl ReplayGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_answer(mut self, program: &Program, question: &str) -> Self {
        self.answers.insert(program.canonical(), question.to_owned());
        self
    }

    pub fn with_fallback(mut self, question: &str) -> Self {
        self.fallback = Some(question.to_owned());
        self
    }

    pub fn calls(&self) -> usize {
        *self.calls.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl QuestionGenerator for ReplayGenerator {
    fn model(&self) -> &str {
        "replay"
    }

    fn generate(&self, prompt: &PromptBundle) -> Result<String, AugmentError> {
        *self.calls.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.answers
            .get(&prompt.target)
            .or(self.fallback.as_ref())
            .cloned()
            .ok_or_else(|| AugmentError::Generator(format!("no canned question for {}", prompt.target)))
    }
}

#[derive(Debug, Clone)]
pub struct AugmentConfig {
    pub count: usize,
    pub seed: u64,
    /// Never use entities mentioned by any manual program as replacements.
    pub exclude_manual_entities: bool,
    pub keep_empty: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            count: 10,
            seed: 0,
            exclude_manual_entities: true,
            keep_empty: true,
        }
    }
}

/// Mutates every distinct manual program. Sources are identified by the
/// index of their first occurrence in `manual`.
pub fn augment_programs(manual: &[Program], kb: &KnowledgeBase, cfg: &AugmentConfig) -> Mutation {
    let mut excluded: HashSet<EntityRef> = HashSet::new();
    if cfg.exclude_manual_entities {
        for p in manual {
            for c in p.calls() {
                for (slot, v) in c.function.slots().iter().zip(&c.inputs) {
                    if slot.kind == ArgKind::Entity {
                        excluded.extend(kb.lookup_by_name(v));
                    }
                }
            }
        }
    }
    let mutator = Mutator::new(kb).with_excluded(excluded).keep_empty(cfg.keep_empty);
    let mut seen = HashSet::new();
    let mut out = Mutation::default();
    for (i, p) in manual.iter().enumerate() {
        if !seen.insert(p.canonical()) {
            continue;
        }
        let seed = cfg.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let m = mutator.mutate(p, &i.to_string(), cfg.count, seed);
        out.samples.extend(m.samples);
        out.skipped.extend(m.skipped);
    }
    out
}

/// Fills `question` and `meta` of each sample through `generator`.
pub fn generate_questions(
    samples: &mut [AugmentedSample],
    manual: &[(String, Program)],
    generator: &dyn QuestionGenerator,
    limit: usize,
    acronyms: &[(String, String)],
) -> Result<Vec<PromptBundle>, AugmentError> {
    let mut prompts = Vec::with_capacity(samples.len());
    for s in samples.iter_mut() {
        let bundle = build_prompt(s, manual, limit, acronyms)?;
        let q = generator.generate(&bundle)?;
        s.question = Some(q.trim().to_owned());
        s.meta = Some(GenerationMeta {
            model: generator.model().to_owned(),
            temperature: generator.temperature(),
        });
        prompts.push(bundle);
    }
    Ok(prompts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::program_from_value;

    #[test]
    fn acronym_table_has_fourteen_entries() {
        let a = default_acronyms();
        assert_eq!(a.len(), 14);
        assert_eq!(a[7], ("LEO".to_owned(), "Low Earth Orbit".to_owned()));
        let keys: Vec<&str> = a.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(
            keys,
            ["GEO", "IGO", "EGO", "NSO", "GTO", "MEO", "GHO", "LEO", "HAO", "MGO", "HEO", "LMO", "UFO", "ESO"]
        );
    }

    #[test]
    fn questions_are_generated_with_meta() {
        let kb = KnowledgeBase::from_json(include_str!("../../fixtures/mini_discos.json")).unwrap();
        let manual: Vec<(String, Program)> = include_str!("../../fixtures/gold.jsonl")
            .lines()
            .map(|l| {
                let v: serde_json::Value = serde_json::from_str(l).unwrap();
                (v["question"].as_str().unwrap().to_owned(), program_from_value(v["program"].clone()).unwrap())
            })
            .collect();
        let progs: Vec<Program> = manual.iter().map(|(_, p)| p.clone()).collect();
        let cfg = AugmentConfig {
            count: 2,
            ..Default::default()
        };
        let mut m = augment_programs(&progs[..3], &kb, &cfg);
        assert!(!m.samples.is_empty());
        let g = ReplayGenerator::new().with_fallback("  Generated?  ");
        let prompts = generate_questions(&mut m.samples, &manual, &g, 8000, &default_acronyms()).unwrap();
        assert_eq!(prompts.len(), m.samples.len());
        assert_eq!(g.calls(), m.samples.len());
        for s in &m.samples {
            assert_eq!(s.question.as_deref(), Some("Generated?"));
            assert_eq!(s.meta.as_ref().unwrap().temperature, 0.75);
        }
        let err = generate_questions(&mut m.samples, &manual, &ReplayGenerator::new(), 8000, &[]).unwrap_err();
        assert!(matches!(err, AugmentError::Generator(_)));
    }
}
