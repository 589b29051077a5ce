//! Two-stage parsing: retrieve a sketch for a question, then fill every
//! argument slot from question literals or by scoring KB candidates.

mod negative;
mod pipeline;
mod scorer;
mod sketch;
pub mod text;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::exec::{ExecResult, Executor};
use crate::kb::{Candidate, CandidateKind, Direction, EntityRef, KnowledgeBase};
use crate::program::{
    assign_dependencies, sketch_dependencies, ArgKind, AttrConstraint, CompareOp, FunctionKind,
    Program, ProgramError, Sketch,
};
use crate::value_parse::{TimeValue, ValueParser};

pub use negative::{build_negative_batch, NegativeBatch};
pub use pipeline::{Pipeline, PipelineError, QaResult};
pub use scorer::{
    argmax, score_slot, scores_to_candidates, softmax, CandidateScore, HashedTrigramEncoder, LexicalScorer, PoolEntry,
    QueryContext, ScoringProvider, VectorScorer,
};
pub use sketch::{predict_sketch, SketchPrediction, Template, TemplateStore};

use text::{tokenize, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("template store is empty")]
    EmptyTemplates,
    #[error("template line {line}: {reason}")]
    Template { line: usize, reason: String },
    #[error("empty candidate pool")]
    EmptyPool,
    #[error("call {call} ({function}) slot {slot}: no {kind} candidates")]
    NoCandidates {
        call: usize,
        slot: usize,
        function: FunctionKind,
        kind: &'static str,
    },
    #[error("call {call} ({function}) slot {slot}: the question has no {kind} left for this slot")]
    MissingLiteral {
        call: usize,
        slot: usize,
        function: FunctionKind,
        kind: &'static str,
    },
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSource {
    /// Argmax of the scoring provider.
    Scored,
    /// Taken from a date, year or number mention.
    Literal,
    /// Keyword in the question.
    Cue,
    /// Copied from the retrieved template program.
    Template,
    /// The only option the KB facts support.
    Kb,
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alternative {
    pub label: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkDecision {
    pub call: usize,
    pub slot: usize,
    pub kind: &'static str,
    pub chosen: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate_id: Option<String>,
    pub probability: f64,
    pub margin: f64,
    pub source: DecisionSource,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<Alternative>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linked {
    pub program: Program,
    pub decisions: Vec<LinkDecision>,
    /// Mentions left unused and similar notes.
    pub diagnostics: Vec<String>,
}

/// Candidate pools for one KB, with precomputed surface forms.
pub struct Linker {
    entities: Vec<PoolEntry>,
    concepts: Vec<PoolEntry>,
    relations: Vec<PoolEntry>,
    attributes: HashMap<AttrConstraint, Vec<PoolEntry>>,
    strings: BTreeMap<String, Vec<PoolEntry>>,
    all_strings: Vec<PoolEntry>,
    values: ValueParser,
    local_window: usize,
}

const CONSTRAINTS: [AttrConstraint; 6] = [
    AttrConstraint::Any,
    AttrConstraint::String,
    AttrConstraint::Quantity,
    AttrConstraint::Date,
    AttrConstraint::DateOrYear,
    AttrConstraint::Orderable,
];

const LARGEST: &[&str] = &[
    "largest", "biggest", "heaviest", "highest", "most", "maximum", "latest", "longest", "greatest",
];
const SMALLEST: &[&str] = &[
    "smallest", "lightest", "lowest", "least", "minimum", "earliest", "shortest", "fewest",
];
const GREATER: &[&str] = &["greater", "larger", "bigger", "heavier", "higher", "more", "later", "longer"];
const LESS: &[&str] = &["less", "smaller", "lighter", "lower", "earlier", "shorter", "fewer"];

fn value_entry(v: &str) -> PoolEntry {
    PoolEntry::new(
        Candidate {
            kind: CandidateKind::Value,
            id: v.to_owned(),
            label: v.to_owned(),
            aliases: Vec::new(),
        },
        &[],
    )
}

impl Linker {
    pub fn new(kb: &KnowledgeBase) -> Self {
        Self::with_acronyms(kb, &[])
    }

    /// `acronyms` maps concept labels to expansions that count as extra
    /// surface forms ("LMO" -> "LEO-MEO Crossing Orbits").
    pub fn with_acronyms(kb: &KnowledgeBase, acronyms: &[(String, String)]) -> Self {
        let expansions: HashMap<&str, Vec<String>> =
            acronyms.iter().fold(HashMap::new(), |mut m, (k, v)| {
                m.entry(k.as_str()).or_default().push(v.clone());
                m
            });
        let pool = |kind: CandidateKind| -> Vec<PoolEntry> {
            kb.candidates_of_kind(kind)
                .into_iter()
                .map(|c| {
                    let extra = expansions.get(c.label.as_str()).cloned().unwrap_or_default();
                    PoolEntry::new(c, &extra)
                })
                .collect()
        };
        let attrs = pool(CandidateKind::Attribute);
        let attributes = CONSTRAINTS
            .iter()
            .map(|&con| {
                let entries = attrs
                    .iter()
                    .filter(|e| kb.attribute_kind(&e.candidate.label).is_some_and(|k| con.accepts(k)))
                    .cloned()
                    .collect();
                (con, entries)
            })
            .collect();
        let strings = kb
            .attribute_keys()
            .keys()
            .map(|k| {
                let vals = kb.string_values(Some(k)).into_iter().map(value_entry).collect();
                (k.clone(), vals)
            })
            .collect();
        Linker {
            entities: pool(CandidateKind::Entity),
            concepts: pool(CandidateKind::Concept),
            relations: pool(CandidateKind::Relation),
            attributes,
            strings,
            all_strings: kb.string_values(None).into_iter().map(value_entry).collect(),
            values: ValueParser::default(),
            local_window: 6,
        }
    }

    pub fn with_value_parser(mut self, values: ValueParser) -> Self {
        self.values = values;
        self
    }

    pub fn value_parser(&self) -> &ValueParser {
        &self.values
    }

    /// Pool of a KB-backed slot kind. Text slots use every observed string value.
    pub fn pool(&self, kind: ArgKind) -> &[PoolEntry] {
        match kind {
            ArgKind::Entity => &self.entities,
            ArgKind::Concept => &self.concepts,
            ArgKind::Relation => &self.relations,
            ArgKind::Attribute(c) => &self.attributes[&c],
            ArgKind::Text => &self.all_strings,
            _ => &[],
        }
    }

    /// Fills every slot of `sketch` and wires dependencies. `kb` must be the
    /// knowledge base the linker was built from; each call is executed as soon
    /// as its slots are filled, and relation and attribute candidates the
    /// incoming entities lack are ruled out. `template` is the retrieved
    /// template program, consulted for direction, selector and comparator hints.
    pub fn link(
        &self,
        kb: &KnowledgeBase,
        question: &str,
        sketch: &Sketch,
        template: Option<&Program>,
        scorer: &dyn ScoringProvider,
    ) -> Result<Linked, LinkError> {
        let fs = sketch.functions();
        let deps = sketch_dependencies(sketch)?;
        let tokens = tokenize(question);
        let mut args: Vec<Vec<String>> = fs.iter().map(|f| vec![String::new(); f.slots().len()]).collect();
        let mut decisions: Vec<LinkDecision> = Vec::new();
        let mut diagnostics = Vec::new();

        // literals, left to right
        let times = self.values.extract_times(question);
        let numbers = self.values.extract_numbers(question);
        let mut time_used = vec![false; times.len()];
        let mut num_used = vec![false; numbers.len()];
        let mut consumed: Vec<Range<usize>> = Vec::new();
        let mut call_literal: Vec<Option<(Range<usize>, CompareOp)>> = vec![None; fs.len()];
        for (ci, &f) in fs.iter().enumerate() {
            for (si, slot) in f.slots().iter().enumerate() {
                let missing = || LinkError::MissingLiteral {
                    call: ci,
                    slot: si,
                    function: f,
                    kind: slot.kind.name(),
                };
                let (value, span, op) = match slot.kind {
                    ArgKind::Date => {
                        let i = (0..times.len())
                            .find(|&i| !time_used[i] && matches!(times[i].value, TimeValue::Date(_)))
                            .ok_or_else(missing)?;
                        time_used[i] = true;
                        (times[i].value.literal(), times[i].span.clone(), times[i].op_hint)
                    }
                    ArgKind::Year => {
                        let i = (0..times.len())
                            .find(|&i| !time_used[i] && matches!(times[i].value, TimeValue::Year(_)))
                            .or_else(|| (0..times.len()).find(|&i| !time_used[i]))
                            .ok_or_else(missing)?;
                        time_used[i] = true;
                        let y = match times[i].value {
                            TimeValue::Year(y) => y,
                            TimeValue::Date(d) => chrono::Datelike::year(&d),
                        };
                        (y.to_string(), times[i].span.clone(), times[i].op_hint)
                    }
                    ArgKind::Number => {
                        let i = (0..numbers.len()).find(|&i| !num_used[i]).ok_or_else(missing)?;
                        num_used[i] = true;
                        (numbers[i].value.to_string(), numbers[i].span.clone(), numbers[i].op_hint)
                    }
                    _ => continue,
                };
                args[ci][si] = value.clone();
                consumed.push(span.clone());
                call_literal[ci] = Some((span, op));
                decisions.push(fixed(ci, si, slot.kind, value, DecisionSource::Literal));
            }
            for (si, slot) in f.slots().iter().enumerate() {
                if slot.kind == ArgKind::Operator {
                    let (op, source) = match &call_literal[ci] {
                        Some((_, op)) => (*op, DecisionSource::Literal),
                        None => (CompareOp::Eq, DecisionSource::Default),
                    };
                    args[ci][si] = op.symbol().to_owned();
                    decisions.push(fixed(ci, si, slot.kind, op.symbol().to_owned(), source));
                }
            }
        }
        for (t, used) in times.iter().zip(&time_used) {
            if !used {
                diagnostics.push(format!("unused time mention '{}'", &question[t.span.clone()]));
            }
        }
        for (n, used) in numbers.iter().zip(&num_used) {
            if !used {
                diagnostics.push(format!("unused number mention '{}'", &question[n.span.clone()]));
            }
        }

        let base_mask: Vec<bool> = tokens
            .iter()
            .map(|t| consumed.iter().any(|s| s.start < t.span.end && t.span.start < s.end))
            .collect();
        let mut kind_masks: HashMap<&'static str, Vec<bool>> = HashMap::new();
        let mut chosen: HashMap<&'static str, HashSet<String>> = HashMap::new();
        let mut slot_counter = 0;
        let mut consumer: Vec<Option<usize>> = vec![None; fs.len()];
        for (ci, ds) in deps.iter().enumerate() {
            for &d in ds {
                consumer[d] = Some(ci);
            }
        }

        // Entities first, so that later slots can look at executed results.
        // (call, slot, decision index, token position of the match)
        let mut entity_slots: Vec<(usize, usize, usize, Option<usize>)> = Vec::new();
        for (ci, &f) in fs.iter().enumerate() {
            for (si, slot) in f.slots().iter().enumerate() {
                if slot.kind != ArgKind::Entity {
                    continue;
                }
                let mut step = ScoreStep {
                    question,
                    tokens: &tokens,
                    mask: kind_masks.entry(slot.kind.name()).or_insert_with(|| base_mask.clone()),
                    taken: chosen.entry(slot.kind.name()).or_default(),
                    scorer,
                };
                let (decision, pos) = step.run(&self.entities, ci, si, f, slot.kind, None, &[], &mut slot_counter)?;
                args[ci][si] = decision.chosen.clone();
                entity_slots.push((ci, si, decisions.len(), pos));
                decisions.push(decision);
            }
        }
        // entity arguments follow the order in which the question mentions them
        if entity_slots.len() > 1 && entity_slots.iter().all(|e| e.3.is_some()) {
            let mut order: Vec<usize> = (0..entity_slots.len()).collect();
            order.sort_by_key(|&i| entity_slots[i].3);
            let originals: Vec<LinkDecision> = entity_slots.iter().map(|e| decisions[e.2].clone()).collect();
            for (&(ci, si, di, _), &source) in entity_slots.iter().zip(&order) {
                let mut d = originals[source].clone();
                d.call = ci;
                d.slot = si;
                args[ci][si] = d.chosen.clone();
                decisions[di] = d;
            }
        }

        let exec = Executor::new(kb);
        let mut results: Vec<Option<ExecResult>> = Vec::with_capacity(fs.len());
        for (ci, &f) in fs.iter().enumerate() {
            let incoming: Vec<&[EntityRef]> = deps[ci]
                .iter()
                .filter_map(|&d| results[d].as_ref().and_then(ExecResult::entities))
                .collect();
            for (si, slot) in f.slots().iter().enumerate() {
                let key = slot.kind.name();
                match slot.kind {
                    ArgKind::Entity => {}
                    ArgKind::Concept | ArgKind::Relation | ArgKind::Attribute(_) | ArgKind::Text => {
                        let pool: &[PoolEntry] = match slot.kind {
                            ArgKind::Text => {
                                let attr = match f {
                                    FunctionKind::FilterStr => Some(args[ci][0].as_str()),
                                    _ => deps[ci]
                                        .first()
                                        .filter(|&&d| fs[d] == FunctionKind::QueryAttr)
                                        .map(|&d| args[d][0].as_str()),
                                };
                                match attr.and_then(|a| self.strings.get(a)) {
                                    Some(p) if !p.is_empty() => p,
                                    _ => &self.all_strings,
                                }
                            }
                            ArgKind::Attribute(AttrConstraint::Any) if f == FunctionKind::QueryAttr => {
                                let c = consumer[ci].map_or(AttrConstraint::Any, |c| verified_kind(fs[c]));
                                &self.attributes[&c]
                            }
                            other => self.pool(other),
                        };
                        // candidates the incoming entities actually support
                        let viable: Vec<bool> = match slot.kind {
                            ArgKind::Relation if !incoming.is_empty() => {
                                let dir = hint(template, ci, f, si + 1).and_then(|d| Direction::parse(&d));
                                pool.iter()
                                    .map(|e| supports_relation(kb, &incoming, &e.candidate.label, dir))
                                    .collect()
                            }
                            ArgKind::Attribute(_) if !incoming.is_empty() => pool
                                .iter()
                                .map(|e| {
                                    incoming.iter().any(|es| {
                                        es.iter().any(|&r| kb.entity(r).has_attribute(&e.candidate.label))
                                    })
                                })
                                .collect(),
                            _ => Vec::new(),
                        };
                        let local = match (slot.kind, &call_literal[ci]) {
                            (ArgKind::Attribute(_), Some((span, _))) => Some(span.start),
                            _ => None,
                        };
                        let mut step = ScoreStep {
                            question,
                            tokens: &tokens,
                            mask: kind_masks.entry(key).or_insert_with(|| base_mask.clone()),
                            taken: chosen.entry(key).or_default(),
                            scorer,
                        };
                        let window = local.map(|end| (end, self.local_window));
                        let (decision, _) = step.run(pool, ci, si, f, slot.kind, window, &viable, &mut slot_counter)?;
                        args[ci][si] = decision.chosen.clone();
                        decisions.push(decision);
                    }
                    ArgKind::Direction => {
                        if let Some(d) = hint(template, ci, f, si) {
                            args[ci][si] = d.clone();
                            decisions.push(fixed(ci, si, slot.kind, d, DecisionSource::Template));
                        } else if !incoming.is_empty() {
                            // only backward facts carry this relation
                            let rel = &args[ci][si - 1];
                            if !supports_relation(kb, &incoming, rel, Some(Direction::Forward))
                                && supports_relation(kb, &incoming, rel, Some(Direction::Backward))
                            {
                                let d = Direction::Backward.as_str().to_owned();
                                args[ci][si] = d.clone();
                                decisions.push(fixed(ci, si, slot.kind, d, DecisionSource::Kb));
                            }
                        }
                    }
                    ArgKind::Selector | ArgKind::Comparator => {
                        let (hi, lo, hi_word, lo_word) = if slot.kind == ArgKind::Selector {
                            (LARGEST, SMALLEST, "largest", "smallest")
                        } else {
                            (GREATER, LESS, "greater", "less")
                        };
                        let cue = tokens.iter().find_map(|t| {
                            if hi.contains(&t.text.as_str()) {
                                Some(hi_word)
                            } else if lo.contains(&t.text.as_str()) {
                                Some(lo_word)
                            } else {
                                None
                            }
                        });
                        let (v, source) = match (cue, hint(template, ci, f, si)) {
                            (Some(c), _) => (c.to_owned(), DecisionSource::Cue),
                            (None, Some(h)) => (h, DecisionSource::Template),
                            (None, None) => (hi_word.to_owned(), DecisionSource::Default),
                        };
                        args[ci][si] = v.clone();
                        decisions.push(fixed(ci, si, slot.kind, v, source));
                    }
                    _ => {}
                }
            }
            let inputs = trimmed(f, &args[ci]);
            let dep_results: Option<Vec<&ExecResult>> = deps[ci].iter().map(|&d| results[d].as_ref()).collect();
            let r = dep_results.and_then(|ds| exec.eval_call(f, &inputs, &ds, &mut Vec::new()).ok());
            results.push(r);
        }

        for (ci, &f) in fs.iter().enumerate() {
            args[ci] = trimmed(f, &args[ci]);
        }
        decisions.sort_by_key(|d| (d.call, d.slot));
        let program = assign_dependencies(sketch, &args)?;
        Ok(Linked {
            program,
            decisions,
            diagnostics,
        })
    }
}

fn fixed(call: usize, slot: usize, kind: ArgKind, value: String, source: DecisionSource) -> LinkDecision {
    LinkDecision {
        call,
        slot,
        kind: kind.name(),
        chosen: value,
        candidate_id: None,
        probability: 1.0,
        margin: 1.0,
        source,
        alternatives: Vec::new(),
    }
}

/// State shared by the scored slots of one kind: the question tokens still
/// unclaimed and the labels already chosen.
struct ScoreStep<'a> {
    question: &'a str,
    tokens: &'a [Token],
    mask: &'a mut Vec<bool>,
    taken: &'a mut HashSet<String>,
    scorer: &'a dyn ScoringProvider,
}

impl ScoreStep<'_> {
    /// Scores `pool` and returns the decision plus the token index where the
    /// winner's surface form occurs. `window` is (byte offset, size) of a local
    /// context before a literal. `viable` may be empty (no restriction).
    #[allow(clippy::too_many_arguments)]
    fn run(
        &mut self,
        pool: &[PoolEntry],
        call: usize,
        slot: usize,
        function: FunctionKind,
        kind: ArgKind,
        window: Option<(usize, usize)>,
        viable: &[bool],
        counter: &mut usize,
    ) -> Result<(LinkDecision, Option<usize>), LinkError> {
        let no_candidates = LinkError::NoCandidates {
            call,
            slot,
            function,
            kind: kind.name(),
        };
        if pool.is_empty() {
            return Err(no_candidates);
        }
        let open: Vec<bool> = pool.iter().map(|e| !self.taken.contains(&e.candidate.label)).collect();
        let restrict = viable.iter().zip(&open).any(|(v, o)| *v && *o);
        let allowed: Vec<bool> = (0..pool.len())
            .map(|i| open[i] && (!restrict || viable[i]))
            .collect();

        let mut context = join_unmasked(self.tokens, self.mask, 0..self.tokens.len());
        if let Some((end, size)) = window {
            let local = local_window(self.tokens, self.mask, end, size);
            let padded = format!(" {local} ");
            if pool.iter().zip(&allowed).any(|(e, a)| *a && e.find_in(&padded).is_some()) {
                context = local;
            }
        }
        let mut ctx = QueryContext::new(self.question, &context, *counter);
        ctx.vector = self.scorer.encode_context(&ctx.text);
        *counter += 1;
        let mut raw = self.scorer.score_batch(&ctx, pool);
        for (r, a) in raw.iter_mut().zip(&allowed) {
            if !a {
                *r = f64::NEG_INFINITY;
            }
        }
        if raw.iter().all(|r| *r == f64::NEG_INFINITY) {
            return Err(no_candidates);
        }
        let scores = scorer::scores_to_candidates(raw);
        let (best, margin) = argmax(&scores).expect("non-empty pool");
        let entry = &pool[best];
        self.taken.insert(entry.candidate.label.clone());
        let pos = mask_match(self.tokens, self.mask, entry);
        let decision = LinkDecision {
            call,
            slot,
            kind: kind.name(),
            chosen: entry.candidate.label.clone(),
            candidate_id: Some(entry.candidate.id.clone()),
            probability: scores[best].probability,
            margin,
            source: DecisionSource::Scored,
            alternatives: top_alternatives(&scores, pool, best, 3),
        };
        Ok((decision, pos))
    }
}

/// Up to `size` unmasked tokens ending before byte offset `end`.
fn local_window(tokens: &[Token], mask: &[bool], end: usize, size: usize) -> String {
    let idx: Vec<usize> = (0..tokens.len())
        .filter(|&i| !mask[i] && tokens[i].span.end <= end)
        .collect();
    let from = idx.len().saturating_sub(size);
    idx[from..].iter().map(|&i| tokens[i].text.as_str()).collect::<Vec<_>>().join(" ")
}

fn supports_relation(kb: &KnowledgeBase, incoming: &[&[EntityRef]], rel: &str, dir: Option<Direction>) -> bool {
    incoming.iter().any(|es| {
        es.iter().any(|&e| {
            kb.relation_facts(e)
                .any(|(f, _)| f.predicate == rel && dir.is_none_or(|d| f.direction == d))
        })
    })
}

/// Attribute kind a verification function expects from its QueryAttr input.
fn verified_kind(consumer: FunctionKind) -> AttrConstraint {
    match consumer {
        FunctionKind::VerifyStr => AttrConstraint::String,
        FunctionKind::VerifyNum => AttrConstraint::Quantity,
        FunctionKind::VerifyDate => AttrConstraint::Date,
        FunctionKind::VerifyYear => AttrConstraint::DateOrYear,
        _ => AttrConstraint::Any,
    }
}

/// Drops trailing empty optional inputs.
fn trimmed(f: FunctionKind, args: &[String]) -> Vec<String> {
    let slots = f.slots();
    let mut n = args.len();
    while n > 0 && args[n - 1].is_empty() && !slots[n - 1].required {
        n -= 1;
    }
    args[..n].to_vec()
}

fn hint(template: Option<&Program>, ci: usize, f: FunctionKind, si: usize) -> Option<String> {
    let call = template?.calls().get(ci)?;
    if call.function != f {
        return None;
    }
    call.inputs.get(si).cloned()
}

fn join_unmasked(tokens: &[Token], mask: &[bool], range: Range<usize>) -> String {
    range
        .filter(|&i| !mask[i])
        .map(|i| tokens[i].text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Masks the earliest verbatim occurrence of one of `entry`'s surface forms
/// among unmasked tokens and returns its first token index.
fn mask_match(tokens: &[Token], mask: &mut [bool], entry: &PoolEntry) -> Option<usize> {
    let live: Vec<usize> = (0..tokens.len()).filter(|&i| !mask[i]).collect();
    let mut best: Option<(usize, usize)> = None;
    for phrase in &entry.phrases {
        let words: Vec<&str> = phrase.split(' ').collect();
        let k = words.len();
        if k == 0 || k > live.len() {
            continue;
        }
        for start in 0..=live.len() - k {
            let ok = words.iter().enumerate().all(|(j, w)| {
                let t = tokens[live[start + j]].text.as_str();
                if j + 1 == k {
                    t == *w || t.strip_prefix(w).is_some_and(|rest| rest == "s" || rest == "es")
                } else {
                    t == *w
                }
            });
            if ok {
                if best.is_none_or(|(s, _)| start < s) {
                    best = Some((start, k));
                }
                break;
            }
        }
    }
    let (start, k) = best?;
    for &i in &live[start..start + k] {
        mask[i] = true;
    }
    Some(live[start])
}

fn top_alternatives(scores: &[CandidateScore], pool: &[PoolEntry], best: usize, n: usize) -> Vec<Alternative> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| i != best).collect();
    let k = n.min(idx.len());
    if k == 0 {
        return Vec::new();
    }
    idx.select_nth_unstable_by(k - 1, |&a, &b| {
        scores[b].probability.total_cmp(&scores[a].probability).then(a.cmp(&b))
    });
    idx.truncate(k);
    idx.sort_by(|&a, &b| scores[b].probability.total_cmp(&scores[a].probability).then(a.cmp(&b)));
    idx.into_iter()
        .map(|i| Alternative {
            label: pool[i].candidate.label.clone(),
            probability: scores[i].probability,
        })
        .collect()
}
