//! Seeded synthetic catalogues for load and performance testing.
//!
//! The generated KB has the same concept and relation counts as the full
//! DISCOS catalogue (39 concepts, 32 relations) and any number of entities.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use super::{
    AttributeFact, Concept, Direction, Entity, KbDocument, KnowledgeBase, RelationFact, TypedValue,
};

pub const CONCEPT_COUNT: usize = 39;
pub const RELATION_COUNT: usize = 32;

const ROOT_CONCEPTS: [&str; 4] = ["SpaceObject", "OrbitRecord", "Launch", "Entity"];

/// Letters-only designation so generated names never look like numbers or years.
fn designation(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    while out.len() < 4 {
        out.push(b'A');
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

pub fn concept_name(i: usize) -> String {
    if i < ROOT_CONCEPTS.len() {
        ROOT_CONCEPTS[i].to_owned()
    } else {
        format!("Class{}", designation(i))
    }
}

pub fn relation_label(i: usize) -> String {
    format!("link_{}", designation(i).to_lowercase())
}

pub fn entity_name(i: usize) -> String {
    format!("Object {}", designation(i))
}

/// Builds a synthetic KB with `entities` entities. Every non-root concept is a
/// subclass of one root, so membership queries exercise the subsumption index.
pub fn synthetic_kb(entities: usize, seed: u64) -> KnowledgeBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts: Vec<Concept> = (0..CONCEPT_COUNT)
        .map(|i| Concept {
            id: format!("c{i:02}"),
            name: concept_name(i),
            subclass_of: if i < ROOT_CONCEPTS.len() {
                Vec::new()
            } else {
                vec![format!("c{:02}", i % ROOT_CONCEPTS.len())]
            },
        })
        .collect();
    let epoch0 = NaiveDate::from_ymd_opt(1957, 10, 4).expect("valid date");

    let mut docs: Vec<Entity> = (0..entities)
        .map(|i| {
            let concept = rng.random_range(ROOT_CONCEPTS.len()..CONCEPT_COUNT);
            let mass = Decimal::new(rng.random_range(1..5_000_000), 1);
            let epoch = epoch0 + chrono::Days::new(rng.random_range(0..24_000));
            let status = if rng.random_bool(0.3) { "decayed" } else { "in orbit" };
            Entity {
                id: format!("e{i:07}"),
                name: entity_name(i),
                aliases: Vec::new(),
                instance_of: vec![format!("c{concept:02}")],
                attributes: vec![
                    AttributeFact {
                        key: "mass".into(),
                        value: TypedValue::quantity(mass, Some("kg")),
                    },
                    AttributeFact {
                        key: "epoch".into(),
                        value: TypedValue::Date(epoch),
                    },
                    AttributeFact {
                        key: "status".into(),
                        value: TypedValue::String(status.into()),
                    },
                ],
                relations: Vec::new(),
            }
        })
        .collect();

    if entities > 1 {
        for i in 0..entities {
            let links = rng.random_range(1..=2);
            for _ in 0..links {
                let mut j = rng.random_range(0..entities);
                if j == i {
                    j = (j + 1) % entities;
                }
                let label = relation_label(rng.random_range(0..RELATION_COUNT));
                let (oi, oj) = (docs[i].id.clone(), docs[j].id.clone());
                docs[i].relations.push(RelationFact {
                    predicate: label.clone(),
                    object: oj,
                    direction: Direction::Forward,
                });
                docs[j].relations.push(RelationFact {
                    predicate: label,
                    object: oi,
                    direction: Direction::Backward,
                });
            }
        }
        // make sure every relation label occurs at least once
        for r in 0..RELATION_COUNT {
            let (i, j) = (r % entities, (r + 1) % entities);
            let oj = docs[j].id.clone();
            docs[i].relations.push(RelationFact {
                predicate: relation_label(r),
                object: oj,
                direction: Direction::Forward,
            });
        }
    }

    KnowledgeBase::from_document(KbDocument {
        concepts,
        entities: docs,
    })
    .expect("synthetic KB is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        let kb = synthetic_kb(500, 7);
        let s = kb.stats();
        assert_eq!(s.entities, 500);
        assert_eq!(s.concepts, CONCEPT_COUNT);
        assert_eq!(s.relations, RELATION_COUNT);
        assert_eq!(kb, synthetic_kb(500, 7));
        assert_ne!(kb, synthetic_kb(500, 8));
    }

    #[test]
    fn designations_are_distinct_letters() {
        assert_eq!(designation(0), "AAAA");
        assert_eq!(designation(27), "AABB");
        assert_ne!(entity_name(26), entity_name(1));
    }
}
