//! Program interpreter over an immutable knowledge base.

mod units;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use crate::kb::{Direction, EntityRef, KnowledgeBase, TypedValue, ValueKind};
use crate::program::{
    parse_date_literal, parse_number_literal, parse_year_literal, AttrConstraint, CompareOp,
    FunctionKind, Program, ResultType,
};

pub use units::UnitTable;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExecResult {
    /// Sorted by entity id, no duplicates.
    EntitySet(Vec<EntityRef>),
    Values(Vec<TypedValue>),
    Count(u64),
    Bool(bool),
    Names(Vec<String>),
}

impl ExecResult {
    pub fn tag(&self) -> ResultType {
        match self {
            ExecResult::EntitySet(_) => ResultType::EntitySet,
            ExecResult::Values(_) => ResultType::Values,
            ExecResult::Count(_) => ResultType::Count,
            ExecResult::Bool(_) => ResultType::Bool,
            ExecResult::Names(_) => ResultType::Names,
        }
    }

    pub fn entities(&self) -> Option<&[EntityRef]> {
        match self {
            ExecResult::EntitySet(v) => Some(v),
            _ => None,
        }
    }

    /// Human-readable form: names for entities, "value unit" for quantities,
    /// yes/no for booleans, "no result" for empty lists.
    pub fn render(&self, kb: &KnowledgeBase) -> String {
        let items: Vec<String> = match self {
            ExecResult::Count(n) => return n.to_string(),
            ExecResult::Bool(b) => return if *b { "yes".into() } else { "no".into() },
            ExecResult::EntitySet(es) => es.iter().map(|&e| kb.entity(e).name.clone()).collect(),
            ExecResult::Values(vs) => vs.iter().map(ToString::to_string).collect(),
            ExecResult::Names(ns) => ns.clone(),
        };
        if items.is_empty() {
            "no result".into()
        } else {
            items.join(", ")
        }
    }

    pub fn to_json(&self, kb: &KnowledgeBase) -> serde_json::Value {
        use serde_json::json;
        match self {
            ExecResult::EntitySet(es) => json!({
                "type": "entity_set",
                "entities": es.iter().map(|&e| {
                    let ent = kb.entity(e);
                    json!({"id": ent.id, "name": ent.name})
                }).collect::<Vec<_>>(),
            }),
            ExecResult::Values(vs) => json!({"type": "values", "values": vs}),
            ExecResult::Count(n) => json!({"type": "count", "value": n}),
            ExecResult::Bool(b) => json!({"type": "bool", "value": b}),
            ExecResult::Names(ns) => json!({"type": "names", "names": ns}),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub result: ExecResult,
    pub rendered: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnswerJson {
    pub rendered: String,
    pub result: serde_json::Value,
    pub warnings: Vec<String>,
}

impl Answer {
    pub fn to_json(&self, kb: &KnowledgeBase) -> AnswerJson {
        AnswerJson {
            rendered: self.rendered.clone(),
            result: self.result.to_json(kb),
            warnings: self.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExecConfig {
    /// Apply the transitive subclass closure in FilterConcept.
    pub subsumption: bool,
    /// Quantities within this distance compare as equal. `None` means exact.
    pub numeric_tolerance: Option<Decimal>,
    pub units: UnitTable,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            subsumption: true,
            numeric_tolerance: None,
            units: UnitTable::strict(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("{function}: expected {expected} input, got {found}")]
    TypeMismatch {
        function: FunctionKind,
        expected: ResultType,
        found: ResultType,
    },
    #[error("{function}: expected {expected} dependency results, got {found}")]
    Arity {
        function: FunctionKind,
        expected: usize,
        found: usize,
    },
    #[error("{function}: missing input {slot}")]
    MissingInput { function: FunctionKind, slot: usize },
    #[error("{function}: empty input")]
    EmptyInput { function: FunctionKind },
    #[error("{function}: expected exactly one entity, got {found}")]
    NotSingleEntity { function: FunctionKind, found: usize },
    #[error("unknown attribute '{0}'")]
    UnknownAttribute(String),
    #[error("unknown relation '{0}'")]
    UnknownRelation(String),
    #[error("unknown concept '{0}'")]
    UnknownConcept(String),
    #[error("{function}: attribute '{key}' is {found}, expected {expected}")]
    AttributeKind {
        function: FunctionKind,
        key: String,
        expected: &'static str,
        found: ValueKind,
    },
    #[error("{function}: cannot compare {found} values")]
    ValueKind { function: FunctionKind, found: ValueKind },
    #[error("{function}: '{value}' is not a valid {kind}")]
    BadLiteral {
        function: FunctionKind,
        kind: &'static str,
        value: String,
    },
    #[error("{function}: values in '{from}' and '{to}' cannot be compared")]
    UnitMismatch {
        function: FunctionKind,
        from: String,
        to: String,
    },
    #[error("call {index}: {source}")]
    AtCall {
        index: usize,
        #[source]
        source: Box<ExecError>,
    },
}

impl ExecError {
    /// The underlying error without the call-index annotation.
    pub fn root(&self) -> &ExecError {
        match self {
            ExecError::AtCall { source, .. } => source.root(),
            e => e,
        }
    }
}

/// Stateless interpreter bound to one KB and configuration.
#[derive(Debug, Clone)]
pub struct Executor<'kb> {
    kb: &'kb KnowledgeBase,
    config: ExecConfig,
}

pub fn execute_program(kb: &KnowledgeBase, p: &Program) -> Result<Answer, ExecError> {
    Executor::new(kb).execute(p)
}

type Res<T> = Result<T, ExecError>;

impl<'kb> Executor<'kb> {
    pub fn new(kb: &'kb KnowledgeBase) -> Self {
        Self::with_config(kb, ExecConfig::default())
    }

    pub fn with_config(kb: &'kb KnowledgeBase, config: ExecConfig) -> Self {
        Executor { kb, config }
    }

    pub fn kb(&self) -> &'kb KnowledgeBase {
        self.kb
    }

    pub fn config(&self) -> &ExecConfig {
        &self.config
    }

    pub fn execute(&self, p: &Program) -> Res<Answer> {
        let (mut results, warnings) = self.execute_all(p)?;
        let result = results.pop().expect("programs are non-empty");
        Ok(Answer {
            rendered: result.render(self.kb),
            result,
            warnings,
        })
    }

    /// Results of every call in order, plus accumulated warnings.
    pub fn execute_all(&self, p: &Program) -> Res<(Vec<ExecResult>, Vec<String>)> {
        let mut results: Vec<ExecResult> = Vec::with_capacity(p.len());
        let mut warnings = Vec::new();
        for (index, call) in p.calls().iter().enumerate() {
            let deps: Vec<&ExecResult> = call.dependencies.iter().map(|&d| &results[d]).collect();
            let r = self
                .eval_call(call.function, &call.inputs, &deps, &mut warnings)
                .map_err(|e| ExecError::AtCall {
                    index,
                    source: Box::new(e),
                })?;
            results.push(r);
        }
        Ok((results, warnings))
    }

    pub fn eval_call(
        &self,
        f: FunctionKind,
        inputs: &[String],
        deps: &[&ExecResult],
        warnings: &mut Vec<String>,
    ) -> Res<ExecResult> {
        if deps.len() != f.arity() {
            return Err(ExecError::Arity {
                function: f,
                expected: f.arity(),
                found: deps.len(),
            });
        }
        for d in deps {
            if d.tag() != f.input_type() {
                return Err(ExecError::TypeMismatch {
                    function: f,
                    expected: f.input_type(),
                    found: d.tag(),
                });
            }
        }
        let input = |slot: usize| -> Res<&str> {
            inputs
                .get(slot)
                .map(String::as_str)
                .ok_or(ExecError::MissingInput { function: f, slot })
        };
        let kb = self.kb;
        use FunctionKind::*;
        Ok(match f {
            FindAll => ExecResult::EntitySet(kb.entity_refs().collect()),
            Find => ExecResult::EntitySet(kb.lookup_by_name(input(0)?)),
            FilterConcept => {
                let label = input(0)?;
                let c = kb
                    .concept_index(label)
                    .ok_or_else(|| ExecError::UnknownConcept(label.to_owned()))?;
                let sub = self.config.subsumption;
                let src = set(deps[0]);
                ExecResult::EntitySet(src.iter().copied().filter(|&e| kb.is_member(e, c, sub)).collect())
            }
            FilterStr => {
                let key = self.attribute(f, input(0)?, AttrConstraint::String)?;
                let want = input(1)?;
                self.filter(deps[0], key, |v| matches!(v, TypedValue::String(s) if s == want))
            }
            FilterNum => {
                let key = self.attribute(f, input(0)?, AttrConstraint::Quantity)?;
                let (lit, unit) = number(f, input(1)?)?;
                let op = operator(f, input(2)?)?;
                let mut out = Vec::new();
                for &e in set(deps[0]) {
                    let mut keep = false;
                    for v in kb.entity(e).values_of(key) {
                        let TypedValue::Quantity { value, unit: vu } = v else { continue };
                        let value = match (&unit, vu) {
                            (None, _) => Some(*value),
                            (Some(u), vu) => {
                                let from = vu.as_deref().unwrap_or("");
                                let conv = self.config.units.convert(*value, from, u);
                                if conv.is_none() {
                                    warnings.push(format!(
                                        "{}: {key} is in '{from}', not '{u}'; excluded",
                                        kb.entity(e).name
                                    ));
                                }
                                conv
                            }
                        };
                        if let Some(value) = value {
                            keep |= op.holds(self.cmp_decimal(value, lit));
                        }
                    }
                    if keep {
                        out.push(e);
                    }
                }
                ExecResult::EntitySet(out)
            }
            FilterDate => {
                let key = self.attribute(f, input(0)?, AttrConstraint::Date)?;
                let lit = parse_date_literal(input(1)?).ok_or_else(|| bad(f, "date", inputs[1].as_str()))?;
                let op = operator(f, input(2)?)?;
                self.filter(deps[0], key, |v| matches!(v, TypedValue::Date(d) if op.holds(d.cmp(&lit))))
            }
            FilterYear => {
                let key = self.attribute(f, input(0)?, AttrConstraint::DateOrYear)?;
                let lit = parse_year_literal(input(1)?).ok_or_else(|| bad(f, "year", inputs[1].as_str()))?;
                let op = operator(f, input(2)?)?;
                self.filter(deps[0], key, |v| v.year().is_some_and(|y| op.holds(y.cmp(&lit))))
            }
            Relate => {
                let label = input(0)?;
                if !kb.has_relation(label) {
                    return Err(ExecError::UnknownRelation(label.to_owned()));
                }
                let dir = match inputs.get(1) {
                    None => Direction::Forward,
                    Some(d) => Direction::parse(d).ok_or_else(|| bad(f, "direction", d))?,
                };
                let mut out: Vec<EntityRef> = set(deps[0])
                    .iter()
                    .flat_map(|&e| kb.related(e, label, dir))
                    .collect();
                out.sort_unstable();
                out.dedup();
                ExecResult::EntitySet(out)
            }
            QueryAttr => {
                let key = self.attribute(f, input(0)?, AttrConstraint::Any)?;
                ExecResult::Values(
                    set(deps[0])
                        .iter()
                        .flat_map(|&e| kb.entity(e).values_of(key).cloned())
                        .collect(),
                )
            }
            What => ExecResult::Names(set(deps[0]).iter().map(|&e| kb.entity(e).name.clone()).collect()),
            Count => ExecResult::Count(set(deps[0]).len() as u64),
            And => {
                let b: BTreeSet<_> = set(deps[1]).iter().collect();
                ExecResult::EntitySet(set(deps[0]).iter().copied().filter(|e| b.contains(e)).collect())
            }
            Or => {
                let mut out: Vec<EntityRef> = set(deps[0]).iter().chain(set(deps[1])).copied().collect();
                out.sort_unstable();
                out.dedup();
                ExecResult::EntitySet(out)
            }
            SelectAmong => self.select_among(f, inputs, deps[0], warnings)?,
            SelectBetween => self.select_between(f, inputs, deps[0], deps[1])?,
            QueryRelation => {
                let a = single(f, deps[0])?;
                let b = single(f, deps[1])?;
                let names: BTreeSet<String> = kb
                    .relation_facts(a)
                    .filter(|(_, o)| *o == b)
                    .map(|(fact, _)| fact.predicate.clone())
                    .collect();
                ExecResult::Names(names.into_iter().collect())
            }
            VerifyStr => {
                let want = input(0)?;
                let vals = values(f, deps[0])?;
                let mut all = true;
                for v in vals {
                    match v {
                        TypedValue::String(s) => all &= s == want,
                        other => return Err(ExecError::ValueKind { function: f, found: other.kind() }),
                    }
                }
                ExecResult::Bool(all)
            }
            VerifyNum => {
                let (lit, unit) = number(f, input(0)?)?;
                let op = operator(f, input(1)?)?;
                let mut all = true;
                for v in values(f, deps[0])? {
                    let TypedValue::Quantity { value, unit: vu } = v else {
                        return Err(ExecError::ValueKind { function: f, found: v.kind() });
                    };
                    let value = match &unit {
                        None => *value,
                        Some(u) => {
                            let from = vu.as_deref().unwrap_or("");
                            self.config.units.convert(*value, from, u).ok_or_else(|| ExecError::UnitMismatch {
                                function: f,
                                from: from.to_owned(),
                                to: u.clone(),
                            })?
                        }
                    };
                    all &= op.holds(self.cmp_decimal(value, lit));
                }
                ExecResult::Bool(all)
            }
            VerifyDate => {
                let lit = parse_date_literal(input(0)?).ok_or_else(|| bad(f, "date", inputs[0].as_str()))?;
                let op = operator(f, input(1)?)?;
                let mut all = true;
                for v in values(f, deps[0])? {
                    let TypedValue::Date(d) = v else {
                        return Err(ExecError::ValueKind { function: f, found: v.kind() });
                    };
                    all &= op.holds(d.cmp(&lit));
                }
                ExecResult::Bool(all)
            }
            VerifyYear => {
                let lit = parse_year_literal(input(0)?).ok_or_else(|| bad(f, "year", inputs[0].as_str()))?;
                let op = operator(f, input(1)?)?;
                let mut all = true;
                for v in values(f, deps[0])? {
                    let y = v.year().ok_or(ExecError::ValueKind { function: f, found: v.kind() })?;
                    all &= op.holds(y.cmp(&lit));
                }
                ExecResult::Bool(all)
            }
        })
    }

    fn cmp_decimal(&self, a: Decimal, b: Decimal) -> Ordering {
        match self.config.numeric_tolerance {
            Some(tol) if (a - b).abs() <= tol => Ordering::Equal,
            _ => a.cmp(&b),
        }
    }

    fn attribute<'a>(&self, f: FunctionKind, key: &'a str, want: AttrConstraint) -> Res<&'a str> {
        let kind = self
            .kb
            .attribute_kind(key)
            .ok_or_else(|| ExecError::UnknownAttribute(key.to_owned()))?;
        if !want.accepts(kind) {
            return Err(ExecError::AttributeKind {
                function: f,
                key: key.to_owned(),
                expected: want.describe(),
                found: kind,
            });
        }
        Ok(key)
    }

    fn filter(&self, dep: &ExecResult, key: &str, pred: impl Fn(&TypedValue) -> bool) -> ExecResult {
        ExecResult::EntitySet(
            set(dep)
                .iter()
                .copied()
                .filter(|&e| self.kb.entity(e).values_of(key).any(&pred))
                .collect(),
        )
    }

    /// Largest (or smallest) value of `key` on one entity, if any.
    fn extreme<'a>(&'a self, e: EntityRef, key: &'a str, largest: bool) -> Option<&'a TypedValue> {
        let mut best: Option<&TypedValue> = None;
        for v in self.kb.entity(e).values_of(key) {
            best = match best {
                None => Some(v),
                Some(b) => {
                    let ord = v.cmp_same_kind(b).unwrap_or(Ordering::Equal);
                    if (ord == Ordering::Greater) == largest && ord != Ordering::Equal {
                        Some(v)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best
    }

    fn select_among(
        &self,
        f: FunctionKind,
        inputs: &[String],
        dep: &ExecResult,
        warnings: &mut Vec<String>,
    ) -> Res<ExecResult> {
        let key = self.attribute(f, inputs.first().map(String::as_str).unwrap_or(""), AttrConstraint::Orderable)?;
        let largest = match inputs.get(1).map(String::as_str) {
            Some("largest") => true,
            Some("smallest") => false,
            other => return Err(bad(f, "selector", other.unwrap_or(""))),
        };
        let src = set(dep);
        let mut scored: Vec<(EntityRef, TypedValue)> = Vec::new();
        let mut unit: Option<Option<String>> = None;
        for &e in src {
            let Some(v) = self.extreme(e, key, largest) else { continue };
            let v = match v {
                TypedValue::Quantity { value, unit: vu } => {
                    let reference = unit.get_or_insert_with(|| vu.clone());
                    let from = vu.as_deref().unwrap_or("");
                    let to = reference.as_deref().unwrap_or("");
                    match self.config.units.convert(*value, from, to) {
                        Some(c) => TypedValue::Quantity { value: c, unit: reference.clone() },
                        None => {
                            warnings.push(format!(
                                "{}: {key} is in '{from}', not '{to}'; skipped",
                                self.kb.entity(e).name
                            ));
                            continue;
                        }
                    }
                }
                other => other.clone(),
            };
            scored.push((e, v));
        }
        let Some(best) = scored
            .iter()
            .map(|(_, v)| v)
            .reduce(|a, b| {
                let ord = b.cmp_same_kind(a).unwrap_or(Ordering::Equal);
                if (ord == Ordering::Greater && largest) || (ord == Ordering::Less && !largest) {
                    b
                } else {
                    a
                }
            })
            .cloned()
        else {
            return Err(ExecError::EmptyInput { function: f });
        };
        Ok(ExecResult::EntitySet(
            scored
                .into_iter()
                .filter(|(_, v)| v.cmp_same_kind(&best) == Some(Ordering::Equal))
                .map(|(e, _)| e)
                .collect(),
        ))
    }

    fn select_between(&self, f: FunctionKind, inputs: &[String], a: &ExecResult, b: &ExecResult) -> Res<ExecResult> {
        let key = self.attribute(f, inputs.first().map(String::as_str).unwrap_or(""), AttrConstraint::Orderable)?;
        let greater = match inputs.get(1).map(String::as_str) {
            Some("greater") => true,
            Some("less") => false,
            other => return Err(bad(f, "comparator", other.unwrap_or(""))),
        };
        let (ea, eb) = (single(f, a)?, single(f, b)?);
        let va = self.extreme(ea, key, true).ok_or(ExecError::EmptyInput { function: f })?;
        let vb = self.extreme(eb, key, true).ok_or(ExecError::EmptyInput { function: f })?;
        let vb_conv = match (va, vb) {
            (TypedValue::Quantity { unit: ua, .. }, TypedValue::Quantity { value, unit: ub }) => {
                let from = ub.as_deref().unwrap_or("");
                let to = ua.as_deref().unwrap_or("");
                let c = self.config.units.convert(*value, from, to).ok_or_else(|| ExecError::UnitMismatch {
                    function: f,
                    from: from.to_owned(),
                    to: to.to_owned(),
                })?;
                TypedValue::Quantity { value: c, unit: ua.clone() }
            }
            _ => vb.clone(),
        };
        let ord = va.cmp_same_kind(&vb_conv).ok_or(ExecError::ValueKind { function: f, found: vb.kind() })?;
        let mut pick = match ord {
            Ordering::Equal => vec![ea, eb],
            Ordering::Greater if greater => vec![ea],
            Ordering::Less if !greater => vec![ea],
            _ => vec![eb],
        };
        pick.sort_unstable();
        pick.dedup();
        Ok(ExecResult::EntitySet(pick))
    }
}

fn set(r: &ExecResult) -> &[EntityRef] {
    r.entities().expect("tag checked before evaluation")
}

fn values(f: FunctionKind, r: &ExecResult) -> Res<&[TypedValue]> {
    match r {
        ExecResult::Values(v) if v.is_empty() => Err(ExecError::EmptyInput { function: f }),
        ExecResult::Values(v) => Ok(v),
        other => Err(ExecError::TypeMismatch {
            function: f,
            expected: ResultType::Values,
            found: other.tag(),
        }),
    }
}

fn single(f: FunctionKind, r: &ExecResult) -> Res<EntityRef> {
    match set(r) {
        [e] => Ok(*e),
        [] => Err(ExecError::EmptyInput { function: f }),
        many => Err(ExecError::NotSingleEntity {
            function: f,
            found: many.len(),
        }),
    }
}

fn bad(f: FunctionKind, kind: &'static str, value: &str) -> ExecError {
    ExecError::BadLiteral {
        function: f,
        kind,
        value: value.to_owned(),
    }
}

fn operator(f: FunctionKind, s: &str) -> Res<CompareOp> {
    CompareOp::parse(s).ok_or_else(|| bad(f, "operator", s))
}

fn number(f: FunctionKind, s: &str) -> Res<(Decimal, Option<String>)> {
    parse_number_literal(s).ok_or_else(|| bad(f, "number", s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;

    fn fixture() -> KnowledgeBase {
        KnowledgeBase::from_json(include_str!("../../fixtures/mini_discos.json")).unwrap()
    }

    fn run(kb: &KnowledgeBase, json: &str) -> Result<Answer, ExecError> {
        execute_program(kb, &parse_program(json).unwrap())
    }

    #[test]
    fn inclination_and_debris_queries() {
        let kb = fixture();
        let q1 = r#"[{"function":"Find","inputs":["Hubble"],"dependencies":[]},{"function":"Relate","inputs":["orbit"],"dependencies":[0]},{"function":"QueryAttr","inputs":["inclination"],"dependencies":[1]}]"#;
        let a = run(&kb, q1).unwrap();
        assert_eq!(a.rendered, "28.5 deg");
        assert!(matches!(&a.result, ExecResult::Values(v) if v.len() == 1));
        let q2 = r#"[{"function":"FindAll","inputs":[],"dependencies":[]},{"function":"FilterYear","inputs":["reentry","2019","<"],"dependencies":[0]},{"function":"FilterConcept","inputs":["RocketDebris"],"dependencies":[1]},{"function":"Count","inputs":[],"dependencies":[2]}]"#;
        assert_eq!(run(&kb, q2).unwrap().result, ExecResult::Count(7));
    }

    #[test]
    fn count_of_empty_set_is_zero() {
        let kb = fixture();
        let p = r#"[{"function":"Find","inputs":["No Such Thing"],"dependencies":[]},{"function":"Count","inputs":[],"dependencies":[0]}]"#;
        assert_eq!(run(&kb, p).unwrap().rendered, "0");
        let p = r#"[{"function":"Find","inputs":["No Such Thing"],"dependencies":[]},{"function":"What","inputs":[],"dependencies":[0]}]"#;
        assert_eq!(run(&kb, p).unwrap().rendered, "no result");
    }

    #[test]
    fn unknown_labels_are_errors_not_empty_results() {
        let kb = fixture();
        let p = r#"[{"function":"FindAll","inputs":[],"dependencies":[]},{"function":"FilterConcept","inputs":["Spaceship"],"dependencies":[0]}]"#;
        let err = run(&kb, p).unwrap_err();
        assert_eq!(err.root(), &ExecError::UnknownConcept("Spaceship".into()));
        assert!(matches!(err, ExecError::AtCall { index: 1, .. }));
        let p = r#"[{"function":"FindAll","inputs":[],"dependencies":[]},{"function":"Relate","inputs":["docked_to"],"dependencies":[0]}]"#;
        assert!(matches!(run(&kb, p).unwrap_err().root(), ExecError::UnknownRelation(_)));
    }

    #[test]
    fn select_and_verify_reject_empty_input() {
        let kb = fixture();
        let p = r#"[{"function":"Find","inputs":["Nothing"],"dependencies":[]},{"function":"SelectAmong","inputs":["mass","largest"],"dependencies":[0]}]"#;
        assert!(matches!(run(&kb, p).unwrap_err().root(), ExecError::EmptyInput { .. }));
        let p = r#"[{"function":"Find","inputs":["Nothing"],"dependencies":[]},{"function":"QueryAttr","inputs":["mass"],"dependencies":[0]},{"function":"VerifyNum","inputs":["5","<"],"dependencies":[1]}]"#;
        assert!(matches!(run(&kb, p).unwrap_err().root(), ExecError::EmptyInput { .. }));
    }

    #[test]
    fn unit_bearing_literal_is_strict() {
        let kb = fixture();
        let base = |lit: &str| {
            format!(
                r#"[{{"function":"FindAll","inputs":[],"dependencies":[]}},{{"function":"FilterNum","inputs":["depth","{lit}","="],"dependencies":[0]}},{{"function":"Count","inputs":[],"dependencies":[1]}}]"#
            )
        };
        // four objects at 0.3 m (one stored as 0.30), the 30 cm one excluded
        let a = run(&kb, &base("0.3 m")).unwrap();
        assert_eq!(a.rendered, "4");
        assert!(a.warnings.iter().any(|w| w.contains("'cm'")));
        assert_eq!(run(&kb, &base("30 cm")).unwrap().rendered, "1");

        let cfg = ExecConfig {
            units: UnitTable::strict().with_factor("cm", "m", Decimal::new(1, 2)),
            ..ExecConfig::default()
        };
        let ex = Executor::with_config(&kb, cfg);
        let a = ex.execute(&parse_program(&base("0.3 m")).unwrap()).unwrap();
        assert_eq!(a.rendered, "5");
        assert!(a.warnings.is_empty());
    }

    #[test]
    fn tolerance_is_opt_in() {
        let kb = fixture();
        let p = parse_program(r#"[{"function":"FindAll","inputs":[],"dependencies":[]},{"function":"FilterNum","inputs":["inclination","28.4","="],"dependencies":[0]},{"function":"Count","inputs":[],"dependencies":[1]}]"#).unwrap();
        assert_eq!(execute_program(&kb, &p).unwrap().rendered, "0");
        let cfg = ExecConfig {
            numeric_tolerance: Some(Decimal::new(2, 1)),
            ..ExecConfig::default()
        };
        let n = Executor::with_config(&kb, cfg).execute(&p).unwrap();
        assert_ne!(n.rendered, "0");
    }

    #[test]
    fn direct_membership_flag() {
        let kb = fixture();
        let p = parse_program(r#"[{"function":"FindAll","inputs":[],"dependencies":[]},{"function":"FilterConcept","inputs":["RocketDebris"],"dependencies":[0]},{"function":"Count","inputs":[],"dependencies":[1]}]"#).unwrap();
        assert_eq!(execute_program(&kb, &p).unwrap().rendered, "12");
        let cfg = ExecConfig {
            subsumption: false,
            ..ExecConfig::default()
        };
        assert_eq!(Executor::with_config(&kb, cfg).execute(&p).unwrap().rendered, "10");
    }

    #[test]
    fn dependency_tags_are_checked() {
        let kb = fixture();
        let ex = Executor::new(&kb);
        let mut w = Vec::new();
        let err = ex
            .eval_call(FunctionKind::Count, &[], &[&ExecResult::Count(3)], &mut w)
            .unwrap_err();
        assert!(matches!(err, ExecError::TypeMismatch { .. }));
        let err = ex.eval_call(FunctionKind::Count, &[], &[], &mut w).unwrap_err();
        assert!(matches!(err, ExecError::Arity { .. }));
    }
}
