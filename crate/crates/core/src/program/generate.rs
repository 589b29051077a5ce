//! Random well-formed programs over a KB, for property testing.
//!
//! Every generated program parses, type-checks and has all of its KB slots
//! resolvable. Execution may still fail at runtime (e.g. SelectAmong over an
//! empty set).

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{FunctionCall, FunctionKind, Program};
use crate::kb::{KnowledgeBase, TypedValue, ValueKind};

pub struct ProgramGenerator {
    entity_names: Vec<String>,
    concepts: Vec<String>,
    relations: Vec<String>,
    keys: BTreeMap<ValueKind, Vec<String>>,
    observed: BTreeMap<String, Vec<TypedValue>>,
    max_depth: usize,
}

struct Builder {
    calls: Vec<FunctionCall>,
}

impl Builder {
    fn push(&mut self, function: FunctionKind, inputs: Vec<String>, dependencies: Vec<usize>) -> usize {
        self.calls.push(FunctionCall {
            function,
            inputs,
            dependencies,
        });
        self.calls.len() - 1
    }
}

const OPS: [&str; 3] = ["<", ">", "="];

impl ProgramGenerator {
    pub fn new(kb: &KnowledgeBase) -> Self {
        let mut keys: BTreeMap<ValueKind, Vec<String>> = BTreeMap::new();
        for (k, kind) in kb.attribute_keys() {
            keys.entry(*kind).or_default().push(k.clone());
        }
        let mut observed: BTreeMap<String, Vec<TypedValue>> = BTreeMap::new();
        for e in kb.entities() {
            for a in &e.attributes {
                observed.entry(a.key.clone()).or_default().push(a.value.clone());
            }
        }
        ProgramGenerator {
            entity_names: kb.entities().iter().map(|e| e.name.clone()).collect(),
            concepts: kb.concepts().iter().map(|c| c.name.clone()).collect(),
            relations: kb.relation_names().iter().cloned().collect(),
            keys,
            observed,
            max_depth: 3,
        }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Program {
        let mut b = Builder { calls: Vec::new() };
        let depth = rng.random_range(0..=self.max_depth);
        self.terminal(&mut b, depth, rng);
        Program::new(b.calls).expect("generator emits well-formed programs")
    }

    fn keys_of(&self, kinds: &[ValueKind]) -> Vec<&String> {
        kinds
            .iter()
            .flat_map(|k| self.keys.get(k).into_iter().flatten())
            .collect()
    }

    fn observed_value<R: Rng + ?Sized>(&self, key: &str, rng: &mut R) -> Option<&TypedValue> {
        self.observed.get(key).and_then(|v| v.choose(rng))
    }

    fn find<R: Rng + ?Sized>(&self, b: &mut Builder, rng: &mut R) -> usize {
        match self.entity_names.choose(rng) {
            Some(name) => b.push(FunctionKind::Find, vec![name.clone()], vec![]),
            None => b.push(FunctionKind::FindAll, vec![], vec![]),
        }
    }

    fn terminal<R: Rng + ?Sized>(&self, b: &mut Builder, depth: usize, rng: &mut R) {
        let roll = rng.random_range(0..100);
        if roll < 5 {
            let l = self.find(b, rng);
            let r = self.find(b, rng);
            b.push(FunctionKind::QueryRelation, vec![], vec![l, r]);
            return;
        }
        let set = self.set_expr(b, depth, rng);
        match roll {
            5..=29 => {}
            30..=54 => {
                b.push(FunctionKind::Count, vec![], vec![set]);
            }
            55..=69 => {
                b.push(FunctionKind::What, vec![], vec![set]);
            }
            70..=84 => {
                let keys = self.keys_of(&[ValueKind::String, ValueKind::Quantity, ValueKind::Date, ValueKind::Year]);
                if let Some(k) = keys.choose(rng) {
                    b.push(FunctionKind::QueryAttr, vec![(*k).clone()], vec![set]);
                } else {
                    b.push(FunctionKind::Count, vec![], vec![set]);
                }
            }
            _ => self.verify(b, set, rng),
        }
    }

    fn verify<R: Rng + ?Sized>(&self, b: &mut Builder, set: usize, rng: &mut R) {
        let keys = self.keys_of(&[ValueKind::String, ValueKind::Quantity, ValueKind::Date, ValueKind::Year]);
        let Some(key) = keys.choose(rng).map(|k| (*k).clone()) else {
            b.push(FunctionKind::Count, vec![], vec![set]);
            return;
        };
        let Some(value) = self.observed_value(&key, rng).cloned() else {
            b.push(FunctionKind::Count, vec![], vec![set]);
            return;
        };
        let values = b.push(FunctionKind::QueryAttr, vec![key], vec![set]);
        let op = (*OPS.choose(rng).expect("non-empty")).to_owned();
        let (f, inputs) = match &value {
            TypedValue::String(s) => (FunctionKind::VerifyStr, vec![s.clone()]),
            TypedValue::Quantity { .. } => (FunctionKind::VerifyNum, vec![value.literal(), op]),
            TypedValue::Date(_) if rng.random_bool(0.5) => (FunctionKind::VerifyDate, vec![value.literal(), op]),
            TypedValue::Date(_) | TypedValue::Year(_) => (
                FunctionKind::VerifyYear,
                vec![value.year().expect("dated").to_string(), op],
            ),
        };
        b.push(f, inputs, vec![values]);
    }

    fn set_expr<R: Rng + ?Sized>(&self, b: &mut Builder, depth: usize, rng: &mut R) -> usize {
        if depth == 0 {
            return if rng.random_bool(0.5) {
                b.push(FunctionKind::FindAll, vec![], vec![])
            } else {
                self.find(b, rng)
            };
        }
        match rng.random_range(0..16) {
            0 => b.push(FunctionKind::FindAll, vec![], vec![]),
            1 => self.find(b, rng),
            2..=4 => {
                let child = self.set_expr(b, depth - 1, rng);
                match self.concepts.choose(rng) {
                    Some(c) => b.push(FunctionKind::FilterConcept, vec![c.clone()], vec![child]),
                    None => child,
                }
            }
            5 => self.filter(b, depth, ValueKind::String, rng, |_, v, _| {
                (FunctionKind::FilterStr, vec![v.literal()])
            }),
            6 | 7 => self.filter(b, depth, ValueKind::Quantity, rng, |rng, v, op_s| {
                let lit = match v {
                    TypedValue::Quantity { unit: Some(u), .. } if rng.random_bool(0.5) => {
                        format!("{} {u}", v.literal())
                    }
                    _ => v.literal(),
                };
                (FunctionKind::FilterNum, vec![lit, op_s])
            }),
            8 => self.filter(b, depth, ValueKind::Date, rng, |_, v, op_s| {
                (FunctionKind::FilterDate, vec![v.literal(), op_s])
            }),
            9 | 10 => {
                let kind = if rng.random_bool(0.5) { ValueKind::Date } else { ValueKind::Year };
                self.filter(b, depth, kind, rng, |_, v, op_s| {
                    (FunctionKind::FilterYear, vec![v.year().expect("dated").to_string(), op_s])
                })
            }
            11 | 12 => {
                let child = self.set_expr(b, depth - 1, rng);
                match self.relations.choose(rng) {
                    Some(r) => {
                        let mut inputs = vec![r.clone()];
                        match rng.random_range(0..4) {
                            0 => inputs.push("forward".into()),
                            1 => inputs.push("backward".into()),
                            _ => {}
                        }
                        b.push(FunctionKind::Relate, inputs, vec![child])
                    }
                    None => child,
                }
            }
            13 => {
                let l = self.set_expr(b, depth - 1, rng);
                let r = self.set_expr(b, depth - 1, rng);
                let f = if rng.random_bool(0.5) { FunctionKind::And } else { FunctionKind::Or };
                b.push(f, vec![], vec![l, r])
            }
            14 => {
                let child = self.set_expr(b, depth - 1, rng);
                let keys = self.keys_of(&[ValueKind::Quantity, ValueKind::Date, ValueKind::Year]);
                match keys.choose(rng) {
                    Some(k) => {
                        let sel = if rng.random_bool(0.5) { "largest" } else { "smallest" };
                        b.push(FunctionKind::SelectAmong, vec![(*k).clone(), sel.into()], vec![child])
                    }
                    None => child,
                }
            }
            _ => {
                let keys = self.keys_of(&[ValueKind::Quantity, ValueKind::Date, ValueKind::Year]);
                match keys.choose(rng).map(|k| (*k).clone()) {
                    Some(k) => {
                        let l = self.find(b, rng);
                        let r = self.find(b, rng);
                        let cmp = if rng.random_bool(0.5) { "greater" } else { "less" };
                        b.push(FunctionKind::SelectBetween, vec![k, cmp.into()], vec![l, r])
                    }
                    None => self.find(b, rng),
                }
            }
        }
    }

    /// Emits `child -> Filter*(key, literal...)` using a value observed on `key`.
    fn filter<R, F>(&self, b: &mut Builder, depth: usize, kind: ValueKind, rng: &mut R, make: F) -> usize
    where
        R: Rng + ?Sized,
        F: Fn(&mut R, &TypedValue, String) -> (FunctionKind, Vec<String>),
    {
        let child = self.set_expr(b, depth - 1, rng);
        let keys = self.keys_of(&[kind]);
        let Some(key) = keys.choose(rng).map(|k| (*k).clone()) else {
            return child;
        };
        let Some(value) = self.observed_value(&key, rng).cloned() else {
            return child;
        };
        let op_s = (*OPS.choose(rng).expect("non-empty")).to_owned();
        let (f, rest) = make(rng, &value, op_s);
        let mut inputs = vec![key];
        inputs.extend(rest);
        b.push(f, inputs, vec![child])
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::program::{parse_program, serialize_program, validate_slots};

    #[test]
    fn generated_programs_are_valid_and_resolve() {
        let kb = KnowledgeBase::from_json(include_str!("../../fixtures/mini_discos.json")).unwrap();
        let g = ProgramGenerator::new(&kb);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut kinds = std::collections::BTreeSet::new();
        for _ in 0..500 {
            let p = g.generate(&mut rng);
            assert_eq!(parse_program(&serialize_program(&p)).unwrap(), p);
            assert!(validate_slots(&p, &kb).iter().all(|d| d.is_resolved()), "{p}");
            kinds.extend(p.calls().iter().map(|c| c.function));
        }
        assert_eq!(kinds.len(), FunctionKind::ALL.len(), "{kinds:?}");
    }
}
