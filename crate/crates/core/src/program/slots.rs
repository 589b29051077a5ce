use serde::Serialize;

use super::{literal_ok, ArgKind, Program};
use crate::kb::KnowledgeBase;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SlotStatus {
    Resolved,
    Unresolved,
    KindMismatch { expected: String, found: String },
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotDiagnostic {
    pub call: usize,
    pub slot: usize,
    pub function: String,
    pub kind: &'static str,
    pub value: String,
    #[serde(flatten)]
    pub status: SlotStatus,
}

impl SlotDiagnostic {
    pub fn is_resolved(&self) -> bool {
        self.status == SlotStatus::Resolved
    }
}

/// One diagnostic per filled argument slot, in program order.
pub fn validate_slots(p: &Program, kb: &KnowledgeBase) -> Vec<SlotDiagnostic> {
    let mut out = Vec::new();
    for (call, c) in p.calls().iter().enumerate() {
        for (slot, (spec, value)) in c.function.slots().iter().zip(&c.inputs).enumerate() {
            out.push(SlotDiagnostic {
                call,
                slot,
                function: c.function.name().to_owned(),
                kind: spec.kind.name(),
                value: value.clone(),
                status: check(kb, spec.kind, value),
            });
        }
    }
    out
}

fn check(kb: &KnowledgeBase, kind: ArgKind, value: &str) -> SlotStatus {
    let found = |ok: bool| if ok { SlotStatus::Resolved } else { SlotStatus::Unresolved };
    match kind {
        ArgKind::Entity => found(!kb.lookup_by_name(value).is_empty()),
        ArgKind::Concept => found(kb.concept_index(value).is_some()),
        ArgKind::Relation => found(kb.has_relation(value)),
        ArgKind::Attribute(constraint) => match kb.attribute_kind(value) {
            None => SlotStatus::Unresolved,
            Some(k) if constraint.accepts(k) => SlotStatus::Resolved,
            Some(k) => SlotStatus::KindMismatch {
                expected: constraint.describe().to_owned(),
                found: k.as_str().to_owned(),
            },
        },
        other => {
            if literal_ok(other, value) {
                SlotStatus::Resolved
            } else {
                SlotStatus::Malformed
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::KnowledgeBase;
    use crate::program::parse_program;

    fn fixture() -> KnowledgeBase {
        KnowledgeBase::from_json(include_str!("../../fixtures/mini_discos.json")).unwrap()
    }

    #[test]
    fn inclination_program_resolves() {
        let kb = fixture();
        let p = parse_program(r#"[{"function":"Find","inputs":["Hubble"],"dependencies":[]},{"function":"Relate","inputs":["orbit"],"dependencies":[0]},{"function":"QueryAttr","inputs":["inclination"],"dependencies":[1]}]"#).unwrap();
        let d = validate_slots(&p, &kb);
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(SlotDiagnostic::is_resolved));
    }

    #[test]
    fn unknown_entity_and_kind_mismatch() {
        let kb = fixture();
        let p = parse_program(r#"[{"function":"Find","inputs":["Nonexistent Satellite"],"dependencies":[]},{"function":"FilterNum","inputs":["epoch","5","="],"dependencies":[0]}]"#).unwrap();
        let d = validate_slots(&p, &kb);
        assert_eq!(d[0].status, SlotStatus::Unresolved);
        assert_eq!(
            d[1].status,
            SlotStatus::KindMismatch {
                expected: "quantity".into(),
                found: "date".into()
            }
        );
        assert!(d[2].is_resolved() && d[3].is_resolved());
    }
}
