use std::path::Path;

use serde::{Deserialize, Serialize};

use super::text::Profile;
use super::LinkError;
use crate::program::{program_from_value, Program, Sketch};

#[derive(Debug, Clone)]
pub struct Template {
    pub question: String,
    pub program: Program,
    pub sketch: Sketch,
    profile: Profile,
}

/// Question/program pairs used for nearest-neighbour sketch retrieval.
#[derive(Debug, Clone, Default)]
pub struct TemplateStore {
    templates: Vec<Template>,
}

#[derive(Deserialize)]
struct TemplateLine {
    question: Option<String>,
    program: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SketchPrediction {
    pub sketch: Sketch,
    pub template: usize,
    pub similarity: f64,
}

impl TemplateStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, question: &str, program: Program) {
        self.templates.push(Template {
            question: question.to_owned(),
            sketch: program.sketch(),
            program,
            profile: Profile::of(question),
        });
    }

    /// Reads JSONL records with `question` and `program` fields. Records
    /// without a question are skipped.
    pub fn from_jsonl(text: &str) -> Result<Self, LinkError> {
        let mut store = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: TemplateLine = serde_json::from_str(line).map_err(|e| LinkError::Template {
                line: i + 1,
                reason: e.to_string(),
            })?;
            let program = program_from_value(rec.program).map_err(|e| LinkError::Template {
                line: i + 1,
                reason: e.to_string(),
            })?;
            if let Some(q) = rec.question {
                store.push(&q, program);
            }
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LinkError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| LinkError::Template {
            line: 0,
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::from_jsonl(&text)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Template> {
        self.templates.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Template> {
        self.templates.iter()
    }
}

/// Sketch of the most similar template question; ties go to the lowest index.
pub fn predict_sketch(question: &str, store: &TemplateStore) -> Result<SketchPrediction, LinkError> {
    let q = Profile::of(question);
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in store.templates.iter().enumerate() {
        let s = q.cosine(&t.profile);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    let (template, similarity) = best.ok_or(LinkError::EmptyTemplates)?;
    Ok(SketchPrediction {
        sketch: store.templates[template].sketch.clone(),
        template,
        similarity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::FunctionKind::*;

    fn store() -> TemplateStore {
        TemplateStore::from_jsonl(include_str!("../../fixtures/gold.jsonl")).unwrap()
    }

    #[test]
    fn identity_and_nearest() {
        let s = store();
        let t0 = s.get(0).unwrap().question.clone();
        let p = predict_sketch(&t0, &s).unwrap();
        assert_eq!(p.template, 0);
        assert!((p.similarity - 1.0).abs() < 1e-12);
        assert_eq!(p.sketch.functions(), [Find, Relate, QueryAttr]);

        let p = predict_sketch("How many rocket debris objects re-entered before 2015?", &s).unwrap();
        assert_eq!(p.sketch.functions(), [FindAll, FilterYear, FilterConcept, Count]);
    }

    #[test]
    fn empty_store() {
        assert!(matches!(predict_sketch("x", &TemplateStore::new()), Err(LinkError::EmptyTemplates)));
    }

    #[test]
    fn ties_pick_the_first_template() {
        let mut s = TemplateStore::new();
        let p1 = crate::program::parse_program(r#"[{"function":"FindAll","inputs":[],"dependencies":[]}]"#).unwrap();
        let p2 = crate::program::parse_program(r#"[{"function":"FindAll","inputs":[],"dependencies":[]},{"function":"Count","inputs":[],"dependencies":[0]}]"#).unwrap();
        s.push("same words", p1);
        s.push("same words", p2);
        assert_eq!(predict_sketch("same words", &s).unwrap().template, 0);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = TemplateStore::from_jsonl("\n{\"question\":\"q\",\"program\":[]}\n").unwrap_err();
        assert!(matches!(err, LinkError::Template { line: 2, .. }));
    }
}
