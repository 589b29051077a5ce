use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{ExecResult, Executor};
use crate::kb::{Direction, EntityRef, KnowledgeBase, TypedValue, ValueKind};
use crate::program::{validate_slots, ArgKind, AttrConstraint, FunctionCall, FunctionKind, Program};

/// One replaced argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub call: usize,
    pub slot: usize,
    pub old: String,
    pub new: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationMeta {
    pub model: String,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedSample {
    #[serde(with = "crate::program::json")]
    pub program: Program,
    /// Identifier of the source program (its dataset index by default).
    pub source: String,
    pub substitutions: Vec<Substitution>,
    #[serde(default)]
    pub question: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<GenerationMeta>,
}

/// Why a source program yielded fewer samples than requested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkipReport {
    pub source: String,
    pub call: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Mutation {
    pub samples: Vec<AugmentedSample>,
    pub skipped: Vec<SkipReport>,
}

/// Ontology-driven argument substitution.
pub struct Mutator<'kb> {
    kb: &'kb KnowledgeBase,
    excluded: HashSet<EntityRef>,
    keep_empty: bool,
    attempts_per_sample: usize,
}

/// `count` substituted variants of `p`, deterministic under `seed`.
pub fn mutate_program(p: &Program, kb: &KnowledgeBase, count: usize, seed: u64) -> Mutation {
    Mutator::new(kb).mutate(p, "0", count, seed)
}

enum Failure {
    /// Nothing can ever be produced for this program.
    Fatal(SkipReport),
    /// This attempt drew an unlucky combination.
    Retry,
}

impl<'kb> Mutator<'kb> {
    pub fn new(kb: &'kb KnowledgeBase) -> Self {
        Mutator {
            kb,
            excluded: HashSet::new(),
            keep_empty: true,
            attempts_per_sample: 30,
        }
    }

    /// Entities that must never be used as replacements, e.g. every entity
    /// mentioned in the manual dataset.
    pub fn with_excluded(mut self, excluded: impl IntoIterator<Item = EntityRef>) -> Self {
        self.excluded.extend(excluded);
        self
    }

    /// Whether samples whose answer is empty (zero entities, "no result") are kept.
    pub fn keep_empty(mut self, keep: bool) -> Self {
        self.keep_empty = keep;
        self
    }

    pub fn mutate(&self, p: &Program, source: &str, count: usize, seed: u64) -> Mutation {
        let mut out = Mutation::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen: HashSet<String> = HashSet::new();
        seen.insert(p.canonical());
        for _ in 0..count * self.attempts_per_sample {
            if out.samples.len() >= count {
                break;
            }
            match self.attempt(p, &mut rng) {
                Ok((program, substitutions)) => {
                    if seen.insert(program.canonical()) {
                        out.samples.push(AugmentedSample {
                            program,
                            source: source.to_owned(),
                            substitutions,
                            question: None,
                            meta: None,
                        });
                    }
                }
                Err(Failure::Fatal(mut r)) => {
                    r.source = source.to_owned();
                    out.skipped.push(r);
                    return out;
                }
                Err(Failure::Retry) => {}
            }
        }
        if out.samples.len() < count {
            out.skipped.push(SkipReport {
                source: source.to_owned(),
                call: None,
                reason: format!("only {} of {count} distinct executable variants found", out.samples.len()),
            });
        }
        out
    }

    fn attempt(&self, p: &Program, rng: &mut ChaCha8Rng) -> Result<(Program, Vec<Substitution>), Failure> {
        let kb = self.kb;
        let exec = Executor::new(kb);
        let mut calls: Vec<FunctionCall> = Vec::with_capacity(p.len());
        let mut results: Vec<ExecResult> = Vec::with_capacity(p.len());
        let mut subs = Vec::new();
        // original entity -> replacement
        let mut replaced: HashMap<EntityRef, EntityRef> = HashMap::new();

        for (ci, call) in p.calls().iter().enumerate() {
            let f = call.function;
            let mut inputs = call.inputs.clone();
            let incoming: Vec<EntityRef> = call
                .dependencies
                .iter()
                .filter_map(|&d| results[d].entities())
                .flatten()
                .copied()
                .collect();
            let slots = f.slots();
            for si in 0..inputs.len() {
                let old = inputs[si].clone();
                let kind = slots[si].kind;
                let new = match kind {
                    ArgKind::Entity => {
                        let orig = match kb.lookup_by_name(&old).first() {
                            Some(&e) => e,
                            None => return Err(fatal(ci, format!("entity '{old}' is not in the KB"))),
                        };
                        let pool = self.entity_pool(orig);
                        let Some(&pick) = pool.choose(rng) else {
                            return Err(fatal(
                                ci,
                                format!("no other entity shares a concept with '{old}'"),
                            ));
                        };
                        replaced.insert(orig, pick);
                        Some(kb.entity(pick).name.clone())
                    }
                    ArgKind::Concept => self.concept_swap(&old, &replaced, rng),
                    ArgKind::Relation => {
                        let dir = inputs
                            .get(si + 1)
                            .and_then(|d| Direction::parse(d))
                            .unwrap_or(Direction::Forward);
                        let present: BTreeSet<&str> = incoming
                            .iter()
                            .flat_map(|&e| kb.relation_facts(e))
                            .filter(|(fact, _)| fact.direction == dir)
                            .map(|(fact, _)| fact.predicate.as_str())
                            .collect();
                        pick_other(&present, &old, rng)?
                    }
                    ArgKind::Attribute(con) => {
                        let present = self.attribute_pool(&incoming, con, f);
                        pick_other(&present, &old, rng)?
                    }
                    ArgKind::Number | ArgKind::Date | ArgKind::Year | ArgKind::Text => {
                        let key = literal_key(f, si, &inputs, &calls);
                        let Some(key) = key else { continue };
                        let observed = self.observed_literals(&key, kind, &incoming);
                        pick_other(&observed.iter().map(String::as_str).collect(), &old, rng)?
                    }
                    _ => None,
                };
                if let Some(new) = new {
                    if new != old {
                        inputs[si] = new.clone();
                        subs.push(Substitution {
                            call: ci,
                            slot: si,
                            old,
                            new,
                        });
                    }
                }
            }
            let deps: Vec<&ExecResult> = call.dependencies.iter().map(|&d| &results[d]).collect();
            let r = exec
                .eval_call(f, &inputs, &deps, &mut Vec::new())
                .map_err(|_| Failure::Retry)?;
            results.push(r);
            calls.push(FunctionCall {
                function: f,
                inputs,
                dependencies: call.dependencies.clone(),
            });
        }
        if subs.is_empty() {
            return Err(fatal_none("program has no substitutable argument"));
        }
        if !self.keep_empty && results.last().is_some_and(is_empty_result) {
            return Err(Failure::Retry);
        }
        let program = Program::new(calls).map_err(|_| Failure::Retry)?;
        if validate_slots(&program, kb).iter().any(|d| !d.is_resolved()) {
            return Err(Failure::Retry);
        }
        Ok((program, subs))
    }

    /// Entities sharing a direct concept with `orig`, minus `orig`, excluded
    /// entities and names that do not resolve uniquely.
    fn entity_pool(&self, orig: EntityRef) -> Vec<EntityRef> {
        let kb = self.kb;
        let concepts: Vec<usize> = (0..kb.concepts().len())
            .filter(|&c| kb.is_member(orig, c, false))
            .collect();
        let mut pool: BTreeSet<EntityRef> = BTreeSet::new();
        for c in concepts {
            pool.extend(kb.concept_members(c, false).iter().copied());
        }
        pool.into_iter()
            .filter(|&e| e != orig && !self.excluded.contains(&e))
            .filter(|&e| kb.lookup_by_name(&kb.entity(e).name) == [e])
            .collect()
    }

    /// If `old` is a direct concept of a replaced entity, a direct concept of its replacement.
    fn concept_swap(
        &self,
        old: &str,
        replaced: &HashMap<EntityRef, EntityRef>,
        rng: &mut ChaCha8Rng,
    ) -> Option<String> {
        let kb = self.kb;
        let c = kb.concept_index(old)?;
        let mut origs: Vec<(&EntityRef, &EntityRef)> = replaced.iter().collect();
        origs.sort();
        let (_, &new) = origs.into_iter().find(|(&o, _)| kb.is_member(o, c, false))?;
        if kb.is_member(new, c, false) {
            return None;
        }
        let options: Vec<usize> = (0..kb.concepts().len()).filter(|&i| kb.is_member(new, i, false)).collect();
        options.choose(rng).map(|&i| kb.concept(i).name.clone())
    }

    fn attribute_pool(&self, incoming: &[EntityRef], con: AttrConstraint, f: FunctionKind) -> BTreeSet<&'kb str> {
        let kb = self.kb;
        let source: Box<dyn Iterator<Item = EntityRef>> = if incoming.is_empty() {
            Box::new(kb.entity_refs())
        } else {
            Box::new(incoming.iter().copied())
        };
        let mut keys = BTreeSet::new();
        for e in source {
            for a in &kb.entity(e).attributes {
                if con.accepts(a.value.kind()) && attr_fits(f, a.value.kind()) {
                    keys.insert(a.key.as_str());
                }
            }
        }
        keys
    }

    /// Distinct literal renderings of values stored under `key`, preferring
    /// the incoming entities.
    fn observed_literals(&self, key: &str, kind: ArgKind, incoming: &[EntityRef]) -> BTreeSet<String> {
        let kb = self.kb;
        let collect = |it: &mut dyn Iterator<Item = EntityRef>| -> BTreeSet<String> {
            it.flat_map(|e| kb.entity(e).values_of(key).filter_map(|v| literal_for(v, kind)).collect::<Vec<_>>())
                .collect()
        };
        let local = collect(&mut incoming.iter().copied());
        if local.is_empty() {
            collect(&mut kb.entity_refs())
        } else {
            local
        }
    }
}

fn fatal(call: usize, reason: String) -> Failure {
    Failure::Fatal(SkipReport {
        source: String::new(),
        call: Some(call),
        reason,
    })
}

fn fatal_none(reason: &str) -> Failure {
    Failure::Fatal(SkipReport {
        source: String::new(),
        call: None,
        reason: reason.to_owned(),
    })
}

/// Uniform pick among `options` other than `old`. `None` keeps `old` when it
/// is the only option; a retry is requested when `old` is not an option at all.
fn pick_other(options: &BTreeSet<&str>, old: &str, rng: &mut ChaCha8Rng) -> Result<Option<String>, Failure> {
    let others: Vec<&str> = options.iter().copied().filter(|o| *o != old).collect();
    match others.choose(rng) {
        Some(o) => Ok(Some((*o).to_owned())),
        None if options.contains(old) => Ok(None),
        None => Err(Failure::Retry),
    }
}

/// Extra kind restrictions beyond the slot constraint.
fn attr_fits(f: FunctionKind, kind: ValueKind) -> bool {
    match f {
        FunctionKind::FilterStr => kind == ValueKind::String,
        FunctionKind::FilterNum => kind == ValueKind::Quantity,
        FunctionKind::FilterDate => kind == ValueKind::Date,
        _ => true,
    }
}

/// The attribute key whose values a literal slot is compared with.
fn literal_key(f: FunctionKind, si: usize, inputs: &[String], calls: &[FunctionCall]) -> Option<String> {
    match f {
        FunctionKind::FilterStr | FunctionKind::FilterNum | FunctionKind::FilterDate | FunctionKind::FilterYear
            if si > 0 =>
        {
            Some(inputs[0].clone())
        }
        FunctionKind::VerifyStr | FunctionKind::VerifyNum | FunctionKind::VerifyDate | FunctionKind::VerifyYear => {
            // the QueryAttr this verification consumes is the latest one
            calls
                .iter()
                .rev()
                .find(|c| c.function == FunctionKind::QueryAttr)
                .and_then(|c| c.inputs.first().cloned())
        }
        _ => None,
    }
}

fn literal_for(v: &TypedValue, kind: ArgKind) -> Option<String> {
    use chrono::Datelike;
    match (kind, v) {
        (ArgKind::Number, TypedValue::Quantity { value, .. }) => Some(value.normalize().to_string()),
        (ArgKind::Date, TypedValue::Date(d)) => Some(d.format("%Y-%m-%d").to_string()),
        (ArgKind::Year, TypedValue::Year(y)) => Some(y.to_string()),
        (ArgKind::Year, TypedValue::Date(d)) => Some(d.year().to_string()),
        (ArgKind::Text, TypedValue::String(s)) => Some(s.clone()),
        _ => None,
    }
}

fn is_empty_result(r: &ExecResult) -> bool {
    match r {
        ExecResult::EntitySet(es) => es.is_empty(),
        ExecResult::Values(vs) => vs.is_empty(),
        ExecResult::Names(ns) => ns.is_empty(),
        _ => false,
    }
}
