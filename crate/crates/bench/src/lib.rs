//! Shared setup for the benchmarks.

use std::sync::Arc;

use kopl_core::kb::synthetic::{concept_name, entity_name, synthetic_kb};
use kopl_core::linker::{LexicalScorer, Linker, Pipeline, TemplateStore};
use kopl_core::program::parse_program;
use kopl_core::{KnowledgeBase, Program};

/// FindAll -> FilterConcept(root concept) -> Count.
pub fn count_program() -> Program {
    parse_program(&format!(
        r#"[{{"function":"FindAll","inputs":[],"dependencies":[]}},
            {{"function":"FilterConcept","inputs":["{}"],"dependencies":[0]}},
            {{"function":"Count","inputs":[],"dependencies":[1]}}]"#,
        concept_name(0)
    ))
    .expect("valid program")
}

/// Pipeline over a synthetic KB with one attribute-query template.
pub fn synthetic_pipeline(entities: usize) -> (Arc<KnowledgeBase>, Pipeline) {
    let kb = Arc::new(synthetic_kb(entities, 1));
    let template = parse_program(&format!(
        r#"[{{"function":"Find","inputs":["{}"],"dependencies":[]}},
            {{"function":"QueryAttr","inputs":["mass"],"dependencies":[0]}}]"#,
        entity_name(1)
    ))
    .expect("valid program");
    let mut store = TemplateStore::new();
    store.push(&format!("What is the mass of {}?", entity_name(1)), template);
    let linker = Linker::new(&kb);
    let p = Pipeline::new(kb.clone(), store, linker, Arc::new(LexicalScorer::default()));
    (kb, p)
}
