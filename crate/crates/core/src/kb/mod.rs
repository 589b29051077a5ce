//! In-memory knowledge base: concepts, entities, relation labels and typed
//! attribute keys, with name and concept-membership indexes.
//!
//! A [`KnowledgeBase`] is immutable once loaded. Entities are stored sorted by
//! id, so an [`EntityRef`] ordering is the same as id ordering and entity sets
//! can be kept as sorted vectors of refs.

mod load;
pub mod synthetic;
mod value;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use load::{load_kb, KbDocument};
pub use value::{parse_decimal, TypedValue, ValueKind};

/// Position of an entity in the id-sorted entity table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityRef(pub u32);

impl EntityRef {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub name: String,
    #[serde(rename = "subclassOf", default)]
    pub subclass_of: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(rename = "instanceOf", default)]
    pub instance_of: Vec<String>,
    #[serde(default)]
    pub attributes: Vec<AttributeFact>,
    #[serde(default)]
    pub relations: Vec<RelationFact>,
}

impl Entity {
    pub fn values_of<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a TypedValue> + 'a {
        self.attributes
            .iter()
            .filter(move |a| a.key == key)
            .map(|a| &a.value)
    }

    pub fn has_attribute(&self, key: &str) -> bool {
        self.attributes.iter().any(|a| a.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeFact {
    pub key: String,
    pub value: TypedValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "forward" => Some(Direction::Forward),
            "backward" => Some(Direction::Backward),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationFact {
    pub predicate: String,
    pub object: String,
    pub direction: Direction,
}

/// The disjoint argument pools a function input can be drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateKind {
    Entity,
    Relation,
    Concept,
    Attribute,
    Operator,
    /// Observed string attribute values, for string literal slots.
    Value,
}

impl fmt::Display for CandidateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidateKind::Entity => "entity",
            CandidateKind::Relation => "relation",
            CandidateKind::Concept => "concept",
            CandidateKind::Attribute => "attribute",
            CandidateKind::Operator => "operator",
            CandidateKind::Value => "value",
        })
    }
}

/// One element of an argument pool. `label` is the text written into a program input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

/// Entity, concept, relation and attribute counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbStats {
    pub entities: usize,
    pub relations: usize,
    pub concepts: usize,
    pub attribute_keys: usize,
    pub attribute_facts: usize,
    pub relation_facts: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed knowledge base JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid record {record}: {reason}")]
    Validation { record: String, reason: String },
}

impl KbError {
    pub(crate) fn invalid(record: impl Into<String>, reason: impl Into<String>) -> Self {
        KbError::Validation {
            record: record.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    concepts: Vec<Concept>,
    entities: Vec<Entity>,
    relation_names: BTreeSet<String>,
    attribute_keys: BTreeMap<String, ValueKind>,

    concept_by_id: HashMap<String, usize>,
    concept_by_name: HashMap<String, usize>,
    entity_by_id: HashMap<String, EntityRef>,
    exact_names: HashMap<String, Vec<EntityRef>>,
    folded_names: HashMap<String, Vec<EntityRef>>,
    members_direct: Vec<Vec<EntityRef>>,
    members_closure: Vec<Vec<EntityRef>>,
    /// Resolved objects of each entity's relation facts, parallel to `Entity::relations`.
    relation_objects: Vec<Vec<EntityRef>>,
}

/// Deep equality over the stored facts; indexes are derived and not compared.
impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.concepts == other.concepts
            && self.entities == other.entities
            && self.relation_names == other.relation_names
            && self.attribute_keys == other.attribute_keys
    }
}

impl KnowledgeBase {
    pub fn empty() -> Self {
        KnowledgeBase::from_document(KbDocument::default()).expect("empty KB is valid")
    }

    pub fn stats(&self) -> KbStats {
        KbStats {
            entities: self.entities.len(),
            relations: self.relation_names.len(),
            concepts: self.concepts.len(),
            attribute_keys: self.attribute_keys.len(),
            attribute_facts: self.entities.iter().map(|e| e.attributes.len()).sum(),
            relation_facts: self.entities.iter().map(|e| e.relations.len()).sum(),
        }
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn entity(&self, r: EntityRef) -> &Entity {
        &self.entities[r.index()]
    }

    pub fn entity_refs(&self) -> impl ExactSizeIterator<Item = EntityRef> {
        (0..self.entities.len() as u32).map(EntityRef)
    }

    pub fn entity_by_id(&self, id: &str) -> Option<EntityRef> {
        self.entity_by_id.get(id).copied()
    }

    pub fn relation_names(&self) -> &BTreeSet<String> {
        &self.relation_names
    }

    pub fn attribute_keys(&self) -> &BTreeMap<String, ValueKind> {
        &self.attribute_keys
    }

    pub fn attribute_kind(&self, key: &str) -> Option<ValueKind> {
        self.attribute_keys.get(key).copied()
    }

    pub fn has_relation(&self, label: &str) -> bool {
        self.relation_names.contains(label)
    }

    /// Resolves a concept by name, falling back to its id.
    pub fn concept_index(&self, label: &str) -> Option<usize> {
        self.concept_by_name
            .get(label)
            .or_else(|| self.concept_by_id.get(label))
            .copied()
    }

    pub fn concept(&self, index: usize) -> &Concept {
        &self.concepts[index]
    }

    /// Sorted members of a concept, either through the transitive subclass
    /// closure or only by direct `instanceOf`.
    pub fn concept_members(&self, index: usize, subsumption: bool) -> &[EntityRef] {
        if subsumption {
            &self.members_closure[index]
        } else {
            &self.members_direct[index]
        }
    }

    pub fn is_member(&self, entity: EntityRef, concept: usize, subsumption: bool) -> bool {
        self.concept_members(concept, subsumption)
            .binary_search(&entity)
            .is_ok()
    }

    /// Objects reached from `entity` through facts with this predicate and direction.
    pub fn related(
        &self,
        entity: EntityRef,
        predicate: &str,
        direction: Direction,
    ) -> impl Iterator<Item = EntityRef> + '_ {
        let e = &self.entities[entity.index()];
        let objects = &self.relation_objects[entity.index()];
        let predicate = predicate.to_owned();
        e.relations
            .iter()
            .zip(objects)
            .filter(move |(f, _)| f.predicate == predicate && f.direction == direction)
            .map(|(_, o)| *o)
    }

    /// Facts of `entity` paired with their resolved objects.
    pub fn relation_facts(&self, entity: EntityRef) -> impl Iterator<Item = (&RelationFact, EntityRef)> {
        self.entities[entity.index()]
            .relations
            .iter()
            .zip(self.relation_objects[entity.index()].iter().copied())
    }

    /// Entities whose name or alias equals `name`. Exact matches win; a
    /// case-insensitive match is the fallback tier. Sorted by id.
    pub fn lookup_by_name(&self, name: &str) -> Vec<EntityRef> {
        if name.is_empty() {
            return Vec::new();
        }
        if let Some(hits) = self.exact_names.get(name) {
            return hits.clone();
        }
        self.folded_names
            .get(&name.to_lowercase())
            .cloned()
            .unwrap_or_default()
    }

    /// The full candidate pool for one argument kind, in stable order.
    pub fn candidates_of_kind(&self, kind: CandidateKind) -> Vec<Candidate> {
        match kind {
            CandidateKind::Entity => self
                .entities
                .iter()
                .map(|e| Candidate {
                    kind,
                    id: e.id.clone(),
                    label: e.name.clone(),
                    aliases: e.aliases.clone(),
                })
                .collect(),
            CandidateKind::Concept => self
                .concepts
                .iter()
                .map(|c| Candidate {
                    kind,
                    id: c.id.clone(),
                    label: c.name.clone(),
                    aliases: Vec::new(),
                })
                .collect(),
            CandidateKind::Relation => self
                .relation_names
                .iter()
                .map(|r| plain_candidate(kind, r))
                .collect(),
            CandidateKind::Attribute => self
                .attribute_keys
                .keys()
                .map(|k| plain_candidate(kind, k))
                .collect(),
            CandidateKind::Operator => ["<", ">", "="]
                .into_iter()
                .map(|op| plain_candidate(kind, op))
                .collect(),
            CandidateKind::Value => self
                .string_values(None)
                .into_iter()
                .map(|v| plain_candidate(kind, v))
                .collect(),
        }
    }

    /// Distinct string values of one key (or of every string key), sorted.
    pub fn string_values(&self, key: Option<&str>) -> BTreeSet<&str> {
        self.entities
            .iter()
            .flat_map(|e| e.attributes.iter())
            .filter(|a| key.is_none_or(|k| a.key == k))
            .filter_map(|a| match &a.value {
                TypedValue::String(s) => Some(s.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Order-sensitive fingerprint of the stored facts.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.to_json().hash(&mut h);
        h.finish()
    }
}

fn plain_candidate(kind: CandidateKind, label: &str) -> Candidate {
    Candidate {
        kind,
        id: label.to_owned(),
        label: label.to_owned(),
        aliases: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> KnowledgeBase {
        KnowledgeBase::from_json(include_str!("../../fixtures/mini_discos.json")).unwrap()
    }

    #[test]
    fn lookup_tiers() {
        let kb = fixture();
        let ids = |v: Vec<EntityRef>| v.into_iter().map(|r| kb.entity(r).id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(kb.lookup_by_name("Hubble")), vec!["e.hubble"]);
        assert_eq!(ids(kb.lookup_by_name("hubble")), vec!["e.hubble"]);
        assert_eq!(ids(kb.lookup_by_name("HST")), vec!["e.hubble"]);
        assert!(kb.lookup_by_name("").is_empty());
        assert!(kb.lookup_by_name("Nonexistent Satellite").is_empty());
    }

    #[test]
    fn operator_pool_is_fixed() {
        let kb = KnowledgeBase::empty();
        let ops: Vec<_> = kb
            .candidates_of_kind(CandidateKind::Operator)
            .into_iter()
            .map(|c| c.label)
            .collect();
        assert_eq!(ops, ["<", ">", "="]);
        assert!(kb.candidates_of_kind(CandidateKind::Entity).is_empty());
    }

    #[test]
    fn subsumption_flag() {
        let kb = fixture();
        let c = kb.concept_index("RocketDebris").unwrap();
        assert_eq!(kb.concept_members(c, true).len(), 12);
        assert_eq!(kb.concept_members(c, false).len(), 10);
        assert_eq!(kb.concept_index("c.rocket_debris"), Some(c));
    }

    #[test]
    fn relate_follows_stored_direction() {
        let kb = fixture();
        let ksc = kb.entity_by_id("e.ksc").unwrap();
        let fwd: Vec<_> = kb.related(ksc, "site", Direction::Forward).collect();
        assert!(fwd.is_empty());
        let back: Vec<_> = kb
            .related(ksc, "site", Direction::Backward)
            .map(|r| kb.entity(r).name.as_str())
            .collect();
        assert_eq!(back, ["STS-31", "AS-506", "Ax-1"]);
    }
}
