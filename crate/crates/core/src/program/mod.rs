//! KoPL programs: representation, parsing, canonical serialization,
//! dependency assignment for linear sketches, and slot validation.

mod function;
pub mod generate;
mod slots;

use std::fmt;

use chrono::NaiveDate;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{parse_decimal, Direction};

pub use function::{ArgKind, AttrConstraint, CompareOp, FunctionKind, ResultType, Slot};
pub use slots::{validate_slots, SlotDiagnostic, SlotStatus};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionCall {
    pub function: FunctionKind,
    pub inputs: Vec<String>,
    pub dependencies: Vec<usize>,
}

impl FunctionCall {
    pub fn new(function: FunctionKind, inputs: &[&str], dependencies: &[usize]) -> Self {
        FunctionCall {
            function,
            inputs: inputs.iter().map(|s| (*s).to_owned()).collect(),
            dependencies: dependencies.to_vec(),
        }
    }
}

/// A validated program. Calls can only be obtained through [`Program::new`]
/// or the parsers, so every `Program` satisfies the structural invariants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    calls: Vec<FunctionCall>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Sketch(Vec<FunctionKind>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("empty program")]
    Empty,
    #[error("call {index}: unknown function '{name}'")]
    UnknownFunction { index: usize, name: String },
    #[error("call {index} ({function}): expected {expected} dependencies, found {found}")]
    Arity {
        index: usize,
        function: FunctionKind,
        expected: usize,
        found: usize,
    },
    #[error("call {index}: dependency {dependency} does not point to an earlier call")]
    ForwardDependency { index: usize, dependency: usize },
    #[error("call {index} ({function}): expected {min}..={max} inputs, found {found}")]
    InputCount {
        index: usize,
        function: FunctionKind,
        min: usize,
        max: usize,
        found: usize,
    },
    #[error("call {index} ({function}) slot {slot}: '{value}' is not a valid {kind}")]
    BadLiteral {
        index: usize,
        function: FunctionKind,
        slot: usize,
        kind: &'static str,
        value: String,
    },
    #[error("call {index} ({function}): dependency {dependency} yields {found}, expected {expected}")]
    TypeMismatch {
        index: usize,
        function: FunctionKind,
        dependency: usize,
        expected: ResultType,
        found: ResultType,
    },
    #[error("call {index}: result is never used (a program has exactly one sink, the last call)")]
    UnusedResult { index: usize },
    #[error("call {index} ({function}): stack underflow, needs {needed} results but {available} available")]
    StackUnderflow {
        index: usize,
        function: FunctionKind,
        needed: usize,
        available: usize,
    },
    #[error("disconnected program: final stack depth is {0}, expected 1")]
    FinalDepth(usize),
    #[error("sketch has {sketch} calls but {args} argument lists were given")]
    ArgumentCount { sketch: usize, args: usize },
}

/// JSON wire form of one call with the canonical key order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCall {
    function: String,
    #[serde(default)]
    inputs: Vec<String>,
    #[serde(default)]
    dependencies: Vec<usize>,
}

impl Program {
    pub fn new(calls: Vec<FunctionCall>) -> Result<Self, ProgramError> {
        validate_structure(&calls)?;
        Ok(Program { calls })
    }

    pub fn calls(&self) -> &[FunctionCall] {
        &self.calls
    }

    pub fn len(&self) -> usize {
        self.calls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calls.is_empty()
    }

    pub fn sketch(&self) -> Sketch {
        Sketch(self.calls.iter().map(|c| c.function).collect())
    }

    pub fn arguments(&self) -> Vec<Vec<String>> {
        self.calls.iter().map(|c| c.inputs.clone()).collect()
    }

    /// Canonical JSON text; used as the identity key for deduplication.
    pub fn canonical(&self) -> String {
        serialize_program(self)
    }

    /// Copy of this program with one input replaced, revalidated.
    pub fn with_input(&self, call: usize, slot: usize, value: &str) -> Result<Program, ProgramError> {
        let mut calls = self.calls.clone();
        let inputs = &mut calls[call].inputs;
        if slot < inputs.len() {
            inputs[slot] = value.to_owned();
        } else {
            inputs.push(value.to_owned());
        }
        Program::new(calls)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.calls.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            write!(f, "{}({})", c.function, c.inputs.join(", "))?;
        }
        Ok(())
    }
}

impl Sketch {
    pub fn new(functions: Vec<FunctionKind>) -> Result<Self, ProgramError> {
        if functions.is_empty() {
            return Err(ProgramError::Empty);
        }
        Ok(Sketch(functions))
    }

    pub fn functions(&self) -> &[FunctionKind] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Necessary condition for a connected program: sum of (1 - arity) is 1.
    pub fn balanced(&self) -> bool {
        self.0.iter().map(|f| 1 - f.arity() as i64).sum::<i64>() == 1
    }
}

impl fmt::Display for Sketch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.0.iter().map(|k| k.name()).collect();
        f.write_str(&names.join(" -> "))
    }
}

impl TryFrom<Vec<String>> for Sketch {
    type Error = ProgramError;

    fn try_from(names: Vec<String>) -> Result<Self, Self::Error> {
        let kinds = names
            .into_iter()
            .enumerate()
            .map(|(index, name)| {
                FunctionKind::from_name(&name).ok_or(ProgramError::UnknownFunction { index, name })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Sketch::new(kinds)
    }
}

impl From<Sketch> for Vec<String> {
    fn from(s: Sketch) -> Self {
        s.0.iter().map(|k| k.name().to_owned()).collect()
    }
}

pub fn parse_program(json_text: &str) -> Result<Program, ProgramError> {
    let wire: Vec<WireCall> =
        serde_json::from_str(json_text).map_err(|e| ProgramError::Syntax(e.to_string()))?;
    from_wire(wire)
}

/// Parses a program already decoded as a JSON value (e.g. embedded in a JSONL record).
pub fn program_from_value(value: serde_json::Value) -> Result<Program, ProgramError> {
    let wire: Vec<WireCall> =
        serde_json::from_value(value).map_err(|e| ProgramError::Syntax(e.to_string()))?;
    from_wire(wire)
}

pub fn program_to_value(p: &Program) -> serde_json::Value {
    serde_json::to_value(to_wire(p)).expect("program serializes")
}

fn from_wire(wire: Vec<WireCall>) -> Result<Program, ProgramError> {
    let calls = wire
        .into_iter()
        .enumerate()
        .map(|(index, w)| {
            let function = FunctionKind::from_name(&w.function).ok_or_else(|| {
                ProgramError::UnknownFunction {
                    index,
                    name: w.function.clone(),
                }
            })?;
            Ok(FunctionCall {
                function,
                inputs: w.inputs,
                dependencies: w.dependencies,
            })
        })
        .collect::<Result<Vec<_>, ProgramError>>()?;
    Program::new(calls)
}

fn to_wire(p: &Program) -> Vec<WireCall> {
    p.calls
        .iter()
        .map(|c| WireCall {
            function: c.function.name().to_owned(),
            inputs: c.inputs.clone(),
            dependencies: c.dependencies.clone(),
        })
        .collect()
}

/// `#[serde(with = "...")]` adapter storing a [`Program`] as its JSON call list.
pub mod json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{from_wire, to_wire, Program, WireCall};

    pub fn serialize<S: Serializer>(p: &Program, s: S) -> Result<S::Ok, S::Error> {
        to_wire(p).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Program, D::Error> {
        let wire = Vec::<WireCall>::deserialize(d)?;
        from_wire(wire).map_err(serde::de::Error::custom)
    }
}

pub fn serialize_program(p: &Program) -> String {
    serde_json::to_string(&to_wire(p)).expect("program serializes")
}

/// Dependencies a linear sketch gets under the result-stack discipline: each
/// call pops `arity` results (the top of the stack becomes the last
/// dependency) and pushes its own index. The final depth must be 1.
pub fn sketch_dependencies(sketch: &Sketch) -> Result<Vec<Vec<usize>>, ProgramError> {
    let mut stack: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(sketch.len());
    for (index, &function) in sketch.functions().iter().enumerate() {
        let needed = function.arity();
        if stack.len() < needed {
            return Err(ProgramError::StackUnderflow {
                index,
                function,
                needed,
                available: stack.len(),
            });
        }
        out.push(stack.split_off(stack.len() - needed));
        stack.push(index);
    }
    if stack.len() != 1 {
        return Err(ProgramError::FinalDepth(stack.len()));
    }
    Ok(out)
}

/// Wires a linear sketch and its argument lists into a program.
pub fn assign_dependencies(sketch: &Sketch, args: &[Vec<String>]) -> Result<Program, ProgramError> {
    if sketch.len() != args.len() {
        return Err(ProgramError::ArgumentCount {
            sketch: sketch.len(),
            args: args.len(),
        });
    }
    let deps = sketch_dependencies(sketch)?;
    let calls = sketch
        .functions()
        .iter()
        .zip(args)
        .zip(deps)
        .map(|((&function, inputs), dependencies)| FunctionCall {
            function,
            inputs: inputs.clone(),
            dependencies,
        })
        .collect();
    Program::new(calls)
}

/// Parses a number literal of the form `"0.3"` or `"0.3 m"`.
pub fn parse_number_literal(text: &str) -> Option<(Decimal, Option<String>)> {
    let text = text.trim();
    match text.split_once(char::is_whitespace) {
        None => parse_decimal(text).map(|v| (v, None)),
        Some((num, unit)) => {
            let unit = unit.trim();
            if unit.is_empty() || unit.contains(char::is_whitespace) {
                return None;
            }
            parse_decimal(num).map(|v| (v, Some(unit.to_owned())))
        }
    }
}

pub fn parse_date_literal(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").ok()
}

pub fn parse_year_literal(text: &str) -> Option<i32> {
    let t = text.trim();
    if t.is_empty() || !t.trim_start_matches('-').bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

/// `true` when `text` is well-formed for a literal slot kind. KB-backed kinds
/// (entity, concept, ...) always pass here; they are checked by [`validate_slots`].
pub fn literal_ok(kind: ArgKind, text: &str) -> bool {
    match kind {
        ArgKind::Number => parse_number_literal(text).is_some(),
        ArgKind::Date => parse_date_literal(text).is_some(),
        ArgKind::Year => parse_year_literal(text).is_some(),
        ArgKind::Operator => CompareOp::parse(text).is_some(),
        ArgKind::Direction => Direction::parse(text).is_some(),
        ArgKind::Selector => matches!(text, "largest" | "smallest"),
        ArgKind::Comparator => matches!(text, "greater" | "less"),
        _ => true,
    }
}

fn validate_structure(calls: &[FunctionCall]) -> Result<(), ProgramError> {
    if calls.is_empty() {
        return Err(ProgramError::Empty);
    }
    let mut used = vec![false; calls.len()];
    for (index, call) in calls.iter().enumerate() {
        let f = call.function;
        if call.dependencies.len() != f.arity() {
            return Err(ProgramError::Arity {
                index,
                function: f,
                expected: f.arity(),
                found: call.dependencies.len(),
            });
        }
        for &d in &call.dependencies {
            if d >= index {
                return Err(ProgramError::ForwardDependency {
                    index,
                    dependency: d,
                });
            }
            used[d] = true;
            let found = calls[d].function.output();
            if found != f.input_type() {
                return Err(ProgramError::TypeMismatch {
                    index,
                    function: f,
                    dependency: d,
                    expected: f.input_type(),
                    found,
                });
            }
        }
        let slots = f.slots();
        let (min, max) = (f.required_inputs(), slots.len());
        if call.inputs.len() < min || call.inputs.len() > max {
            return Err(ProgramError::InputCount {
                index,
                function: f,
                min,
                max,
                found: call.inputs.len(),
            });
        }
        for (slot, (spec, value)) in slots.iter().zip(&call.inputs).enumerate() {
            let blank = value.trim().is_empty();
            if blank || !literal_ok(spec.kind, value) {
                return Err(ProgramError::BadLiteral {
                    index,
                    function: f,
                    slot,
                    kind: spec.kind.name(),
                    value: value.clone(),
                });
            }
        }
    }
    if let Some(index) = used[..calls.len() - 1].iter().position(|u| !u) {
        return Err(ProgramError::UnusedResult { index });
    }
    Ok(())
}
