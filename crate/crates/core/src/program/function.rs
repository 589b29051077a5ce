use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kb::{CandidateKind, ValueKind};

/// The basic functions a program is composed of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionKind {
    FindAll,
    Find,
    FilterConcept,
    FilterStr,
    FilterNum,
    FilterDate,
    FilterYear,
    Relate,
    QueryAttr,
    What,
    Count,
    And,
    Or,
    SelectAmong,
    SelectBetween,
    VerifyStr,
    VerifyNum,
    VerifyDate,
    VerifyYear,
    QueryRelation,
}

/// Runtime result tags, used for static type checking of dependencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultType {
    EntitySet,
    Values,
    Count,
    Bool,
    Names,
}

impl fmt::Display for ResultType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResultType::EntitySet => "entity set",
            ResultType::Values => "values",
            ResultType::Count => "count",
            ResultType::Bool => "boolean",
            ResultType::Names => "names",
        })
    }
}

/// Which attribute kinds an attribute slot accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttrConstraint {
    Any,
    String,
    Quantity,
    Date,
    DateOrYear,
    Orderable,
}

impl AttrConstraint {
    pub fn accepts(self, kind: ValueKind) -> bool {
        match self {
            AttrConstraint::Any => true,
            AttrConstraint::String => kind == ValueKind::String,
            AttrConstraint::Quantity => kind == ValueKind::Quantity,
            AttrConstraint::Date => kind == ValueKind::Date,
            AttrConstraint::DateOrYear => matches!(kind, ValueKind::Date | ValueKind::Year),
            AttrConstraint::Orderable => kind != ValueKind::String,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            AttrConstraint::Any => "any",
            AttrConstraint::String => "string",
            AttrConstraint::Quantity => "quantity",
            AttrConstraint::Date => "date",
            AttrConstraint::DateOrYear => "date or year",
            AttrConstraint::Orderable => "quantity, date or year",
        }
    }
}

/// What fills one input position of a function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArgKind {
    Entity,
    Concept,
    Relation,
    Attribute(AttrConstraint),
    Operator,
    /// Free string literal compared against string attributes.
    Text,
    /// Decimal literal, optionally followed by a unit ("0.3" or "0.3 m").
    Number,
    Date,
    Year,
    Direction,
    /// largest | smallest
    Selector,
    /// greater | less
    Comparator,
}

impl ArgKind {
    /// The KB pool a slot is linked against, if any.
    pub fn pool(self) -> Option<CandidateKind> {
        match self {
            ArgKind::Entity => Some(CandidateKind::Entity),
            ArgKind::Concept => Some(CandidateKind::Concept),
            ArgKind::Relation => Some(CandidateKind::Relation),
            ArgKind::Attribute(_) => Some(CandidateKind::Attribute),
            ArgKind::Operator => Some(CandidateKind::Operator),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ArgKind::Entity => "entity",
            ArgKind::Concept => "concept",
            ArgKind::Relation => "relation",
            ArgKind::Attribute(_) => "attribute",
            ArgKind::Operator => "operator",
            ArgKind::Text => "string",
            ArgKind::Number => "number",
            ArgKind::Date => "date",
            ArgKind::Year => "year",
            ArgKind::Direction => "direction",
            ArgKind::Selector => "selector",
            ArgKind::Comparator => "comparator",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub kind: ArgKind,
    pub required: bool,
}

use ArgKind as A;
use AttrConstraint as C;

impl FunctionKind {
    pub const ALL: [FunctionKind; 20] = [
        FunctionKind::FindAll,
        FunctionKind::Find,
        FunctionKind::FilterConcept,
        FunctionKind::FilterStr,
        FunctionKind::FilterNum,
        FunctionKind::FilterDate,
        FunctionKind::FilterYear,
        FunctionKind::Relate,
        FunctionKind::QueryAttr,
        FunctionKind::What,
        FunctionKind::Count,
        FunctionKind::And,
        FunctionKind::Or,
        FunctionKind::SelectAmong,
        FunctionKind::SelectBetween,
        FunctionKind::VerifyStr,
        FunctionKind::VerifyNum,
        FunctionKind::VerifyDate,
        FunctionKind::VerifyYear,
        FunctionKind::QueryRelation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::FindAll => "FindAll",
            FunctionKind::Find => "Find",
            FunctionKind::FilterConcept => "FilterConcept",
            FunctionKind::FilterStr => "FilterStr",
            FunctionKind::FilterNum => "FilterNum",
            FunctionKind::FilterDate => "FilterDate",
            FunctionKind::FilterYear => "FilterYear",
            FunctionKind::Relate => "Relate",
            FunctionKind::QueryAttr => "QueryAttr",
            FunctionKind::What => "What",
            FunctionKind::Count => "Count",
            FunctionKind::And => "And",
            FunctionKind::Or => "Or",
            FunctionKind::SelectAmong => "SelectAmong",
            FunctionKind::SelectBetween => "SelectBetween",
            FunctionKind::VerifyStr => "VerifyStr",
            FunctionKind::VerifyNum => "VerifyNum",
            FunctionKind::VerifyDate => "VerifyDate",
            FunctionKind::VerifyYear => "VerifyYear",
            FunctionKind::QueryRelation => "QueryRelation",
        }
    }

    /// Accepts canonical names plus `QueryName` as an alias of `What`.
    pub fn from_name(name: &str) -> Option<Self> {
        if name == "QueryName" {
            return Some(FunctionKind::What);
        }
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Number of dependencies.
    pub fn arity(self) -> usize {
        match self {
            FunctionKind::FindAll | FunctionKind::Find => 0,
            FunctionKind::And
            | FunctionKind::Or
            | FunctionKind::SelectBetween
            | FunctionKind::QueryRelation => 2,
            _ => 1,
        }
    }

    pub fn slots(self) -> &'static [Slot] {
        match self {
            FunctionKind::FindAll
            | FunctionKind::What
            | FunctionKind::Count
            | FunctionKind::And
            | FunctionKind::Or
            | FunctionKind::QueryRelation => &[],
            FunctionKind::Find => &[Slot { kind: A::Entity, required: true }],
            FunctionKind::FilterConcept => &[Slot { kind: A::Concept, required: true }],
            FunctionKind::FilterStr => &[Slot { kind: A::Attribute(C::String), required: true }, Slot { kind: A::Text, required: true }],
            FunctionKind::FilterNum => &[Slot { kind: A::Attribute(C::Quantity), required: true }, Slot { kind: A::Number, required: true }, Slot { kind: A::Operator, required: true }],
            FunctionKind::FilterDate => &[Slot { kind: A::Attribute(C::Date), required: true }, Slot { kind: A::Date, required: true }, Slot { kind: A::Operator, required: true }],
            FunctionKind::FilterYear => &[Slot { kind: A::Attribute(C::DateOrYear), required: true }, Slot { kind: A::Year, required: true }, Slot { kind: A::Operator, required: true }],
            FunctionKind::Relate => &[Slot { kind: A::Relation, required: true }, Slot { kind: A::Direction, required: false }],
            FunctionKind::QueryAttr => &[Slot { kind: A::Attribute(C::Any), required: true }],
            FunctionKind::SelectAmong => &[Slot { kind: A::Attribute(C::Orderable), required: true }, Slot { kind: A::Selector, required: true }],
            FunctionKind::SelectBetween => &[Slot { kind: A::Attribute(C::Orderable), required: true }, Slot { kind: A::Comparator, required: true }],
            FunctionKind::VerifyStr => &[Slot { kind: A::Text, required: true }],
            FunctionKind::VerifyNum => &[Slot { kind: A::Number, required: true }, Slot { kind: A::Operator, required: true }],
            FunctionKind::VerifyDate => &[Slot { kind: A::Date, required: true }, Slot { kind: A::Operator, required: true }],
            FunctionKind::VerifyYear => &[Slot { kind: A::Year, required: true }, Slot { kind: A::Operator, required: true }],
        }
    }

    pub fn required_inputs(self) -> usize {
        self.slots().iter().filter(|s| s.required).count()
    }

    pub fn output(self) -> ResultType {
        match self {
            FunctionKind::QueryAttr => ResultType::Values,
            FunctionKind::What | FunctionKind::QueryRelation => ResultType::Names,
            FunctionKind::Count => ResultType::Count,
            FunctionKind::VerifyStr
            | FunctionKind::VerifyNum
            | FunctionKind::VerifyDate
            | FunctionKind::VerifyYear => ResultType::Bool,
            _ => ResultType::EntitySet,
        }
    }

    /// Expected tag of each dependency result.
    pub fn input_type(self) -> ResultType {
        match self {
            FunctionKind::VerifyStr
            | FunctionKind::VerifyNum
            | FunctionKind::VerifyDate
            | FunctionKind::VerifyYear => ResultType::Values,
            _ => ResultType::EntitySet,
        }
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Comparison operator used by Filter*/Verify* functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
            CompareOp::Eq => "=",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "<" => Some(CompareOp::Lt),
            ">" => Some(CompareOp::Gt),
            "=" => Some(CompareOp::Eq),
            _ => None,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        matches!(
            (self, ord),
            (CompareOp::Lt, Less) | (CompareOp::Gt, Greater) | (CompareOp::Eq, Equal)
        )
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_function_has_one_signature() {
        for f in FunctionKind::ALL {
            assert_eq!(FunctionKind::from_name(f.name()), Some(f));
            let expected_arity = match f {
                FunctionKind::FindAll | FunctionKind::Find => 0,
                FunctionKind::And
                | FunctionKind::Or
                | FunctionKind::SelectBetween
                | FunctionKind::QueryRelation => 2,
                _ => 1,
            };
            assert_eq!(f.arity(), expected_arity, "{f}");
            // optional slots only ever trail required ones
            let slots = f.slots();
            let first_opt = slots.iter().position(|s| !s.required).unwrap_or(slots.len());
            assert!(slots[first_opt..].iter().all(|s| !s.required), "{f}");
        }
        assert_eq!(FunctionKind::from_name("QueryName"), Some(FunctionKind::What));
        assert_eq!(FunctionKind::from_name("Qualifier"), None);
    }

    #[test]
    fn slot_signatures_match_the_inventory() {
        use FunctionKind::*;
        let names = |f: FunctionKind| f.slots().iter().map(|s| s.kind.name()).collect::<Vec<_>>();
        assert_eq!(names(Find), ["entity"]);
        assert_eq!(names(FilterNum), ["attribute", "number", "operator"]);
        assert_eq!(names(FilterDate), ["attribute", "date", "operator"]);
        assert_eq!(names(FilterYear), ["attribute", "year", "operator"]);
        assert_eq!(names(Relate), ["relation", "direction"]);
        assert_eq!(Relate.required_inputs(), 1);
        assert_eq!(names(SelectBetween), ["attribute", "comparator"]);
        assert!(names(Count).is_empty() && names(FindAll).is_empty() && names(What).is_empty());
    }

    #[test]
    fn operators() {
        use std::cmp::Ordering;
        assert!(CompareOp::Lt.holds(Ordering::Less));
        assert!(!CompareOp::Lt.holds(Ordering::Equal));
        assert_eq!(CompareOp::parse(">"), Some(CompareOp::Gt));
        assert_eq!(CompareOp::parse(">="), None);
    }
}
