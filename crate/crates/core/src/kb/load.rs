use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Concept, Entity, EntityRef, KbError, KnowledgeBase, ValueKind};

/// The on-disk KB document: one JSON object holding concepts and entities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KbDocument {
    #[serde(default)]
    pub concepts: Vec<Concept>,
    #[serde(default)]
    pub entities: Vec<Entity>,
}

pub fn load_kb(path: impl AsRef<Path>) -> Result<KnowledgeBase, KbError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| KbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    KnowledgeBase::from_json(&text)
}

impl KnowledgeBase {
    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let doc: KbDocument = serde_json::from_str(text)?;
        Self::from_document(doc)
    }

    pub fn to_document(&self) -> KbDocument {
        KbDocument {
            concepts: self.concepts.clone(),
            entities: self.entities.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("KB serializes")
    }

    /// Validates a document and builds every index.
    pub fn from_document(doc: KbDocument) -> Result<Self, KbError> {
        let KbDocument {
            mut concepts,
            mut entities,
        } = doc;
        concepts.sort_by(|a, b| a.id.cmp(&b.id));
        entities.sort_by(|a, b| a.id.cmp(&b.id));

        let mut concept_by_id = HashMap::with_capacity(concepts.len());
        let mut concept_by_name = HashMap::with_capacity(concepts.len());
        for (i, c) in concepts.iter().enumerate() {
            let record = format!("concept {}", c.id);
            if c.id.is_empty() {
                return Err(KbError::invalid(record, "empty id"));
            }
            if c.name.is_empty() {
                return Err(KbError::invalid(record, "empty name"));
            }
            if c.subclass_of.iter().any(|s| s == &c.id) {
                return Err(KbError::invalid(record, "subclassOf contains itself"));
            }
            if concept_by_id.insert(c.id.clone(), i).is_some() {
                return Err(KbError::invalid(record, "duplicate concept id"));
            }
            if concept_by_name.insert(c.name.clone(), i).is_some() {
                return Err(KbError::invalid(record, format!("duplicate concept name '{}'", c.name)));
            }
        }
        let mut parents = Vec::with_capacity(concepts.len());
        for c in &concepts {
            let mut ps = Vec::with_capacity(c.subclass_of.len());
            for s in &c.subclass_of {
                let p = concept_by_id.get(s).copied().ok_or_else(|| {
                    KbError::invalid(format!("concept {}", c.id), format!("subclassOf unknown concept '{s}'"))
                })?;
                ps.push(p);
            }
            parents.push(ps);
        }
        check_acyclic(&concepts, &parents)?;
        let ancestors = ancestor_sets(&parents);

        let mut entity_by_id = HashMap::with_capacity(entities.len());
        for (i, e) in entities.iter().enumerate() {
            if e.id.is_empty() {
                return Err(KbError::invalid("entity with empty id", "empty id"));
            }
            if entity_by_id.insert(e.id.clone(), EntityRef(i as u32)).is_some() {
                return Err(KbError::invalid(format!("entity {}", e.id), "duplicate entity id"));
            }
            if concept_by_id.contains_key(&e.id) {
                return Err(KbError::invalid(
                    format!("entity {}", e.id),
                    "id collides with a concept id",
                ));
            }
        }

        let mut attribute_keys: BTreeMap<String, ValueKind> = BTreeMap::new();
        let mut relation_names = BTreeSet::new();
        let mut members_direct = vec![Vec::new(); concepts.len()];
        let mut members_closure = vec![Vec::new(); concepts.len()];
        let mut relation_objects = Vec::with_capacity(entities.len());
        let mut exact_names: HashMap<String, Vec<EntityRef>> = HashMap::with_capacity(entities.len());
        let mut folded_names: HashMap<String, Vec<EntityRef>> = HashMap::with_capacity(entities.len());

        for (i, e) in entities.iter().enumerate() {
            let r = EntityRef(i as u32);
            let record = || format!("entity {}", e.id);
            if e.name.is_empty() {
                return Err(KbError::invalid(record(), "empty name"));
            }
            let mut direct_hits: Vec<usize> = Vec::with_capacity(e.instance_of.len());
            for c in &e.instance_of {
                let ci = *concept_by_id.get(c).ok_or_else(|| {
                    KbError::invalid(record(), format!("instanceOf unknown concept '{c}'"))
                })?;
                direct_hits.push(ci);
            }
            direct_hits.sort_unstable();
            direct_hits.dedup();
            let mut closure_hits: Vec<usize> = Vec::new();
            for &ci in &direct_hits {
                members_direct[ci].push(r);
                closure_hits.extend(ancestors[ci].iter().copied());
            }
            closure_hits.sort_unstable();
            closure_hits.dedup();
            for ci in closure_hits {
                members_closure[ci].push(r);
            }

            for a in &e.attributes {
                if a.key.is_empty() {
                    return Err(KbError::invalid(record(), "attribute with empty key"));
                }
                let kind = a.value.kind();
                match attribute_keys.get(&a.key) {
                    Some(k) if *k != kind => {
                        return Err(KbError::invalid(
                            record(),
                            format!("attribute '{}' has kind {kind} but the KB declares {k}", a.key),
                        ))
                    }
                    Some(_) => {}
                    None => {
                        attribute_keys.insert(a.key.clone(), kind);
                    }
                }
            }

            let mut objects = Vec::with_capacity(e.relations.len());
            for f in &e.relations {
                if f.predicate.is_empty() {
                    return Err(KbError::invalid(record(), "relation with empty predicate"));
                }
                let o = entity_by_id.get(&f.object).copied().ok_or_else(|| {
                    KbError::invalid(
                        record(),
                        format!("relation '{}' points to unknown entity '{}'", f.predicate, f.object),
                    )
                })?;
                objects.push(o);
                if !relation_names.contains(&f.predicate) {
                    relation_names.insert(f.predicate.clone());
                }
            }
            relation_objects.push(objects);

            for n in std::iter::once(&e.name).chain(&e.aliases) {
                if n.is_empty() {
                    continue;
                }
                push_unique(exact_names.entry(n.clone()).or_default(), r);
                push_unique(folded_names.entry(n.to_lowercase()).or_default(), r);
            }
        }

        check_label_disjointness(&concepts, &exact_names, &relation_names, &attribute_keys)?;

        Ok(KnowledgeBase {
            concepts,
            entities,
            relation_names,
            attribute_keys,
            concept_by_id,
            concept_by_name,
            entity_by_id,
            exact_names,
            folded_names,
            members_direct,
            members_closure,
            relation_objects,
        })
    }
}

fn push_unique(v: &mut Vec<EntityRef>, r: EntityRef) {
    if v.last() != Some(&r) {
        v.push(r);
    }
}

fn check_acyclic(concepts: &[Concept], parents: &[Vec<usize>]) -> Result<(), KbError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut marks = vec![Mark::New; concepts.len()];
    for start in 0..concepts.len() {
        if marks[start] != Mark::New {
            continue;
        }
        // iterative DFS: (node, next parent position)
        let mut stack = vec![(start, 0usize)];
        marks[start] = Mark::Active;
        while let Some((node, pos)) = stack.pop() {
            if pos < parents[node].len() {
                stack.push((node, pos + 1));
                let p = parents[node][pos];
                match marks[p] {
                    Mark::Active => {
                        return Err(KbError::invalid(
                            format!("concept {}", concepts[node].id),
                            format!("subclass cycle through '{}'", concepts[p].id),
                        ))
                    }
                    Mark::New => {
                        marks[p] = Mark::Active;
                        stack.push((p, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                marks[node] = Mark::Done;
            }
        }
    }
    Ok(())
}

/// For every concept, itself plus all transitive superclasses (sorted).
fn ancestor_sets(parents: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(parents.len());
    for start in 0..parents.len() {
        let mut seen = BTreeSet::from([start]);
        let mut todo = vec![start];
        while let Some(c) = todo.pop() {
            for &p in &parents[c] {
                if seen.insert(p) {
                    todo.push(p);
                }
            }
        }
        out.push(seen.into_iter().collect());
    }
    out
}

fn check_label_disjointness(
    concepts: &[Concept],
    entity_names: &HashMap<String, Vec<EntityRef>>,
    relations: &BTreeSet<String>,
    attributes: &BTreeMap<String, ValueKind>,
) -> Result<(), KbError> {
    let clash = |label: &str, a: &str, b: &str| {
        KbError::invalid(format!("label '{label}'"), format!("used both as {a} and as {b}"))
    };
    for c in concepts {
        if entity_names.contains_key(&c.name) {
            return Err(clash(&c.name, "concept", "entity name"));
        }
        if relations.contains(&c.name) {
            return Err(clash(&c.name, "concept", "relation"));
        }
        if attributes.contains_key(&c.name) {
            return Err(clash(&c.name, "concept", "attribute"));
        }
    }
    for r in relations {
        if entity_names.contains_key(r) {
            return Err(clash(r, "relation", "entity name"));
        }
        if attributes.contains_key(r) {
            return Err(clash(r, "relation", "attribute"));
        }
    }
    for a in attributes.keys() {
        if entity_names.contains_key(a) {
            return Err(clash(a, "attribute", "entity name"));
        }
    }
    Ok(())
}
