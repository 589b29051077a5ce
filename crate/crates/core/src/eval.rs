//! Component-wise and exact-match accuracy of predicted programs.
//!
//! Functions and overall are scored per sample; argument components per
//! gold slot. A sample whose sketch differs from the gold misses every gold
//! slot. Literal and direction slots belong to no component but must still
//! match for overall.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::program::{ArgKind, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Function,
    Entity,
    Attribute,
    Relation,
    Concept,
    Operation,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::Function,
        Component::Entity,
        Component::Attribute,
        Component::Relation,
        Component::Concept,
        Component::Operation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::Function => "function",
            Component::Entity => "entity",
            Component::Attribute => "attribute",
            Component::Relation => "relation",
            Component::Concept => "concept",
            Component::Operation => "operation",
        }
    }

    /// Component an argument slot counts toward, if any.
    pub fn of_slot(kind: ArgKind) -> Option<Component> {
        match kind {
            ArgKind::Entity => Some(Component::Entity),
            ArgKind::Attribute(_) => Some(Component::Attribute),
            ArgKind::Relation => Some(Component::Relation),
            ArgKind::Concept => Some(Component::Concept),
            ArgKind::Operator | ArgKind::Selector | ArgKind::Comparator => Some(Component::Operation),
            _ => None,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += usize::from(ok);
    }

    /// `None` when nothing was counted.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProgramMatch {
    pub components: BTreeMap<Component, Tally>,
    pub overall: bool,
    /// "call 2 slot 0 (attribute): got 'mass', want 'height'"
    pub mismatches: Vec<String>,
}

impl ProgramMatch {
    pub fn function(&self) -> bool {
        self.components[&Component::Function].correct == 1
    }
}

/// Per-component match of `pred` against `gold`; `None` stands for a failed prediction.
pub fn compare_programs(pred: Option<&Program>, gold: &Program) -> ProgramMatch {
    let mut components: BTreeMap<Component, Tally> = Component::ALL.iter().map(|&c| (c, Tally::default())).collect();
    let same_sketch = pred.is_some_and(|p| p.sketch() == gold.sketch());
    components.get_mut(&Component::Function).unwrap().add(same_sketch);
    let mut mismatches = Vec::new();
    if !same_sketch {
        mismatches.push(match pred {
            Some(p) => format!("sketch: got {}, want {}", p.sketch(), gold.sketch()),
            None => "no prediction".to_owned(),
        });
    }
    let mut all_slots = true;
    for (ci, g) in gold.calls().iter().enumerate() {
        let slots = g.function.slots();
        let p_inputs = pred.filter(|_| same_sketch).map(|p| &p.calls()[ci].inputs);
        for (si, slot) in slots.iter().enumerate() {
            let want = g.inputs.get(si).map_or("", String::as_str);
            let got = p_inputs.and_then(|i| i.get(si)).map(String::as_str);
            if want.is_empty() && got.is_none_or(str::is_empty) {
                continue;
            }
            let ok = same_sketch && got == Some(want);
            if let Some(c) = Component::of_slot(slot.kind) {
                components.get_mut(&c).unwrap().add(ok);
            }
            if !ok {
                all_slots = false;
                if same_sketch {
                    mismatches.push(format!(
                        "call {ci} slot {si} ({}): got '{}', want '{want}'",
                        slot.kind.name(),
                        got.unwrap_or("")
                    ));
                }
            }
        }
    }
    ProgramMatch {
        components,
        overall: same_sketch && all_slots,
        mismatches,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{preds} predictions for {golds} gold programs")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("nothing to evaluate")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub index: usize,
    pub overall: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub samples: usize,
    pub components: BTreeMap<Component, ComponentScore>,
    pub overall: ComponentScore,
    pub per_sample: Vec<SampleResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentScore {
    pub correct: usize,
    pub total: usize,
    pub accuracy: Option<f64>,
}

impl From<Tally> for ComponentScore {
    fn from(t: Tally) -> Self {
        ComponentScore {
            correct: t.correct,
            total: t.total,
            accuracy: t.accuracy(),
        }
    }
}

impl EvalReport {
    pub fn accuracy(&self, c: Component) -> Option<f64> {
        self.components[&c].accuracy
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<10} {:>8} {:>7} {:>7}", "component", "accuracy", "correct", "total");
        let rows = self
            .components
            .iter()
            .map(|(c, v)| (c.name(), v))
            .chain(std::iter::once(("overall", &self.overall)));
        for (name, v) in rows {
            let acc = v.accuracy.map_or_else(|| "n/a".to_owned(), |a| format!("{a:.4}"));
            let _ = writeln!(s, "{name:<10} {acc:>8} {:>7} {:>7}", v.correct, v.total);
        }
        s
    }
}

pub fn evaluate(preds: &[Program], golds: &[Program]) -> Result<EvalReport, EvalError> {
    let preds: Vec<Option<&Program>> = preds.iter().map(Some).collect();
    evaluate_partial(&preds, golds)
}

/// Like [`evaluate`], with `None` for samples where no program was produced.
pub fn evaluate_partial(preds: &[Option<&Program>], golds: &[Program]) -> Result<EvalReport, EvalError> {
    if preds.len() != golds.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        });
    }
    if golds.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut totals: BTreeMap<Component, Tally> = Component::ALL.iter().map(|&c| (c, Tally::default())).collect();
    let mut overall = Tally::default();
    let mut per_sample = Vec::with_capacity(golds.len());
    for (index, (p, g)) in preds.iter().zip(golds).enumerate() {
        let m = compare_programs(*p, g);
        for (c, t) in &m.components {
            let acc = totals.get_mut(c).unwrap();
            acc.correct += t.correct;
            acc.total += t.total;
        }
        overall.add(m.overall);
        per_sample.push(SampleResult {
            index,
            overall: m.overall,
            mismatches: m.mismatches,
        });
    }
    Ok(EvalReport {
        samples: golds.len(),
        components: totals.into_iter().map(|(c, t)| (c, t.into())).collect(),
        overall: overall.into(),
        per_sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use proptest::prelude::*;

    const Q2: &str = r#"[{"function":"FindAll","inputs":[],"dependencies":[]},{"function":"FilterYear","inputs":["reentry","2019","<"],"dependencies":[0]},{"function":"FilterConcept","inputs":["RocketDebris"],"dependencies":[1]},{"function":"Count","inputs":[],"dependencies":[2]}]"#;
    const Q1: &str = r#"[{"function":"Find","inputs":["Hubble"],"dependencies":[]},{"function":"Relate","inputs":["orbit"],"dependencies":[0]},{"function":"QueryAttr","inputs":["inclination"],"dependencies":[1]}]"#;

    fn golds() -> Vec<Program> {
        include_str!("../fixtures/gold.jsonl")
            .lines()
            .map(|l| {
                let v: serde_json::Value = serde_json::from_str(l).unwrap();
                crate::program::program_from_value(v["program"].clone()).unwrap()
            })
            .collect()
    }

    #[test]
    fn identity_scores_one() {
        let g = golds();
        let r = evaluate(&g, &g).unwrap();
        for c in Component::ALL {
            assert_eq!(r.accuracy(c), Some(1.0), "{c}");
        }
        assert_eq!(r.overall.accuracy, Some(1.0));
        assert!(r.to_table().contains("overall      1.0000"));
    }

    #[test]
    fn wrong_operator_is_an_operation_miss() {
        let gold = parse_program(Q2).unwrap();
        let pred = gold.with_input(1, 2, ">").unwrap();
        let m = compare_programs(Some(&pred), &gold);
        assert!(m.function());
        assert!(!m.overall);
        assert_eq!(m.components[&Component::Operation], Tally { correct: 0, total: 1 });
        assert_eq!(m.components[&Component::Attribute], Tally { correct: 1, total: 1 });
        assert_eq!(m.components[&Component::Concept], Tally { correct: 1, total: 1 });
        assert_eq!(m.mismatches, ["call 1 slot 2 (operator): got '>', want '<'"]);
    }

    #[test]
    fn different_sketch_misses_every_slot() {
        let m = compare_programs(Some(&parse_program(Q1).unwrap()), &parse_program(Q2).unwrap());
        assert!(!m.function() && !m.overall);
        assert_eq!(m.components[&Component::Attribute], Tally { correct: 0, total: 1 });
        assert_eq!(m.components[&Component::Concept], Tally { correct: 0, total: 1 });
        assert_eq!(m.components[&Component::Entity], Tally::default());
        let none = compare_programs(None, &parse_program(Q1).unwrap());
        assert_eq!(none.components[&Component::Entity], Tally { correct: 0, total: 1 });
    }

    #[test]
    fn one_bad_entity_in_ten() {
        let gold = parse_program(Q1).unwrap();
        let golds = vec![gold.clone(); 10];
        let mut preds = golds.clone();
        preds[3] = gold.with_input(0, 0, "Skylab").unwrap();
        let r = evaluate(&preds, &golds).unwrap();
        assert_eq!(r.accuracy(Component::Entity), Some(0.9));
        assert_eq!(r.accuracy(Component::Relation), Some(1.0));
        assert_eq!(r.accuracy(Component::Function), Some(1.0));
        assert_eq!(r.overall.accuracy, Some(0.9));
        assert_eq!(r.accuracy(Component::Concept), None);
    }

    #[test]
    fn errors() {
        let g = golds();
        assert_eq!(evaluate(&g[..2], &g), Err(EvalError::LengthMismatch { preds: 2, golds: g.len() }));
        assert_eq!(evaluate(&[], &[]), Err(EvalError::Empty));
    }

    proptest! {
        #[test]
        fn overall_never_exceeds_function(mask in proptest::collection::vec(0u8..4, 23), perm_seed in any::<u64>()) {
            let g = golds();
            let other = parse_program(Q1).unwrap();
            let preds: Vec<Option<Program>> = g.iter().zip(&mask).map(|(p, m)| match m {
                0 => Some(p.clone()),
                1 => None,
                2 => Some(other.clone()),
                _ => {
                    let c = p.calls().iter().position(|c| !c.inputs.is_empty());
                    Some(c.map_or(p.clone(), |c| p.with_input(c, 0, "zzz").unwrap_or(p.clone())))
                }
            }).collect();
            let refs: Vec<Option<&Program>> = preds.iter().map(Option::as_ref).collect();
            let r = evaluate_partial(&refs, &g).unwrap();
            prop_assert!(r.overall.accuracy.unwrap() <= r.accuracy(Component::Function).unwrap());
            for c in Component::ALL {
                if let Some(a) = r.accuracy(c) {
                    prop_assert!((0.0..=1.0).contains(&a));
                }
            }
            // permuting samples permutes nothing in the aggregate
            let mut idx: Vec<usize> = (0..g.len()).collect();
            let mut s = perm_seed;
            for i in (1..idx.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                idx.swap(i, (s >> 33) as usize % (i + 1));
            }
            let pg: Vec<Program> = idx.iter().map(|&i| g[i].clone()).collect();
            let pp: Vec<Option<&Program>> = idx.iter().map(|&i| refs[i]).collect();
            let r2 = evaluate_partial(&pp, &pg).unwrap();
            prop_assert_eq!(&r.components, &r2.components);
            prop_assert_eq!(r.overall, r2.overall);
        }
    }
}
