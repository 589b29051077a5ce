use std::collections::HashSet;

use kopl_core::augment::{
    augment_programs, mutate_program, split_dataset, AugmentConfig, DatasetRecord, Origin,
};
use kopl_core::program::{program_from_value, validate_slots};
use kopl_core::{execute_program, KnowledgeBase, Program};

fn kb() -> KnowledgeBase {
    KnowledgeBase::from_json(include_str!("../fixtures/mini_discos.json")).unwrap()
}

fn gold() -> Vec<(String, Program)> {
    include_str!("../fixtures/gold.jsonl")
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (v["question"].as_str().unwrap().to_owned(), program_from_value(v["program"].clone()).unwrap())
        })
        .collect()
}

fn check_run(exclude: bool) -> usize {
    let kb = kb();
    let g = gold();
    let programs: Vec<Program> = g.iter().map(|(_, p)| p.clone()).collect();
    let cfg = AugmentConfig {
        count: 10,
        seed: 42,
        exclude_manual_entities: exclude,
        keep_empty: true,
    };
    let m = augment_programs(&programs, &kb, &cfg);
    for s in &m.samples {
        let src: usize = s.source.parse().unwrap();
        assert_eq!(s.program.sketch(), programs[src].sketch(), "{}", s.program);
        assert!(validate_slots(&s.program, &kb).iter().all(|d| d.is_resolved()), "{}", s.program);
        assert!(execute_program(&kb, &s.program).is_ok(), "{}", s.program);
        assert!(!s.substitutions.is_empty());
        for sub in &s.substitutions {
            assert_eq!(s.program.calls()[sub.call].inputs[sub.slot], sub.new);
            assert_eq!(programs[src].calls()[sub.call].inputs[sub.slot], sub.old);
        }
    }
    m.samples.len()
}

#[test]
fn full_gold_run_is_valid() {
    let n = check_run(false);
    assert!(n >= 100, "{n} samples");
    check_run(true);
}

#[test]
fn manual_entities_are_never_replacements() {
    let kb = kb();
    let programs: Vec<Program> = gold().into_iter().map(|(_, p)| p).collect();
    let m = augment_programs(&programs, &kb, &AugmentConfig::default());
    let manual: HashSet<&str> = programs
        .iter()
        .flat_map(|p| p.calls())
        .filter(|c| matches!(c.function, kopl_core::FunctionKind::Find))
        .map(|c| c.inputs[0].as_str())
        .collect();
    assert!(!m.samples.is_empty());
    for s in &m.samples {
        for sub in &s.substitutions {
            if s.program.calls()[sub.call].function == kopl_core::FunctionKind::Find {
                assert!(!manual.contains(sub.new.as_str()), "{}", sub.new);
            }
        }
    }
}

#[test]
fn seeds_change_values_not_slots() {
    let kb = kb();
    let g = gold();
    let p = &g[5].1; // Find(Saturn V) -> QueryAttr(mass)
    let a = mutate_program(p, &kb, 3, 1);
    let b = mutate_program(p, &kb, 3, 2);
    let slots = |m: &kopl_core::augment::Mutation| -> Vec<Vec<(usize, usize)>> {
        m.samples.iter().map(|s| s.substitutions.iter().map(|x| (x.call, x.slot)).collect()).collect()
    };
    assert_eq!(slots(&a), slots(&b));
    assert_ne!(a.samples, b.samples);
    assert_eq!(a.samples, mutate_program(p, &kb, 3, 1).samples);
}

#[test]
fn split_of_augmented_gold_is_disjoint() {
    let kb = kb();
    let g = gold();
    let programs: Vec<Program> = g.iter().map(|(_, p)| p.clone()).collect();
    let m = augment_programs(&programs, &kb, &AugmentConfig { exclude_manual_entities: false, ..Default::default() });
    let manual: Vec<DatasetRecord> = g
        .iter()
        .map(|(q, p)| DatasetRecord { question: Some(q.clone()), program: p.clone(), source: Origin::Manual, meta: serde_json::Value::Null })
        .collect();
    let aug: Vec<DatasetRecord> = m
        .samples
        .iter()
        .map(|s| DatasetRecord { question: s.question.clone(), program: s.program.clone(), source: Origin::Augmented, meta: serde_json::Value::Null })
        .collect();
    for seed in 0..10 {
        let s = split_dataset(&manual, &aug, 0.05, seed).unwrap();
        let val: HashSet<String> = s.validation.iter().map(|r| r.program.canonical()).collect();
        assert!(s.train.iter().all(|r| !val.contains(&r.program.canonical())));
        assert_eq!(s.validation.len(), manual.len() + (aug.len() as f64 * 0.05).round() as usize);
    }
}
