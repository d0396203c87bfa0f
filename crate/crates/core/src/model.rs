//! The instance graph: entities and links conforming to the catalog.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{EntityKind, RelationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

/// Attribute value. Numbers are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Number(n) => write!(f, "{n}"),
            Scalar::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Number(v)
    }
}

impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Bool(v)
    }
}

impl From<&str> for Scalar {
    fn from(v: &str) -> Self {
        Scalar::Text(v.to_string())
    }
}

pub type Attributes = BTreeMap<String, Scalar>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub kind: EntityKind,
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: Attributes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub relation: RelationKind,
    pub source: EntityId,
    pub target: EntityId,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid name {0:?}: names must be non-empty")]
    InvalidName(String),
    #[error("unknown entity kind `{0}`")]
    UnknownKind(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("a {kind} named `{name}` already exists")]
    DuplicateName { kind: EntityKind, name: String },
    #[error("no entity {0}")]
    UnknownEntity(String),
    #[error("no link {0}")]
    UnknownLink(LinkId),
    #[error("{relation} does not accept a {found} as {end}")]
    KindMismatch {
        relation: RelationKind,
        end: &'static str,
        found: EntityKind,
    },
    #[error("decomposing `{parent}` into `{child}` would create a cycle")]
    DecompositionCycle { parent: String, child: String },
    #[error("attribute `{key}`: {reason}")]
    InvalidAttribute { key: String, reason: &'static str },
}

/// A design-phase model: a typed entity/link graph over the standard
/// catalog. Mutations keep referential integrity and an acyclic
/// decomposition; multiplicity bounds are left to validation.
#[derive(Debug, Clone, Default)]
pub struct QualityModel {
    name: String,
    entities: BTreeMap<EntityId, Entity>,
    links: BTreeMap<LinkId, Link>,
    by_name: HashMap<(EntityKind, String), EntityId>,
    outgoing: HashMap<EntityId, Vec<LinkId>>,
    incoming: HashMap<EntityId, Vec<LinkId>>,
    next_entity: u32,
    next_link: u32,
}

impl QualityModel {
    pub fn new(name: &str) -> Result<Self, ModelError> {
        if name.trim().is_empty() {
            return Err(ModelError::InvalidName(name.to_string()));
        }
        Ok(QualityModel {
            name: name.to_string(),
            next_entity: 1,
            next_link: 1,
            ..Default::default()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn add_entity(&mut self, kind: EntityKind, name: &str, attributes: Attributes) -> Result<EntityId, ModelError> {
        let id = EntityId(self.next_entity);
        self.insert_entity(id, kind, name, attributes)?;
        Ok(id)
    }

    /// Like [`add_entity`](Self::add_entity) but with a caller-chosen id.
    /// Used when restoring a persisted model.
    pub(crate) fn insert_entity(
        &mut self,
        id: EntityId,
        kind: EntityKind,
        name: &str,
        attributes: Attributes,
    ) -> Result<(), ModelError> {
        if name.is_empty() {
            return Err(ModelError::InvalidName(name.to_string()));
        }
        for (key, value) in &attributes {
            check_attribute(key, value)?;
        }
        if self.by_name.contains_key(&(kind, name.to_string())) {
            return Err(ModelError::DuplicateName {
                kind,
                name: name.to_string(),
            });
        }
        if self.entities.contains_key(&id) {
            return Err(ModelError::UnknownEntity(format!("{id} (id already in use)")));
        }
        self.by_name.insert((kind, name.to_string()), id);
        self.entities.insert(
            id,
            Entity {
                id,
                kind,
                name: name.to_string(),
                attributes,
            },
        );
        self.next_entity = self.next_entity.max(id.0 + 1);
        Ok(())
    }

    pub fn set_attribute(&mut self, id: EntityId, key: &str, value: Scalar) -> Result<(), ModelError> {
        check_attribute(key, &value)?;
        let e = self
            .entities
            .get_mut(&id)
            .ok_or_else(|| ModelError::UnknownEntity(id.to_string()))?;
        e.attributes.insert(key.to_string(), value);
        Ok(())
    }

    /// Removes an entity together with every link touching it.
    pub fn remove_entity(&mut self, id: EntityId) -> Result<Entity, ModelError> {
        if !self.entities.contains_key(&id) {
            return Err(ModelError::UnknownEntity(id.to_string()));
        }
        let mut touching: Vec<LinkId> = self.outgoing.get(&id).cloned().unwrap_or_default();
        touching.extend(self.incoming.get(&id).cloned().unwrap_or_default());
        touching.sort();
        touching.dedup();
        for l in touching {
            self.remove_link(l)?;
        }
        self.outgoing.remove(&id);
        self.incoming.remove(&id);
        let e = self.entities.remove(&id).expect("checked above");
        self.by_name.remove(&(e.kind, e.name.clone()));
        Ok(e)
    }

    /// Adds a link after checking that both endpoints exist and conform to
    /// the relation signature. `composed_of` links are routed through the
    /// cycle check of [`decompose`](Self::decompose).
    pub fn add_link(
        &mut self,
        relation: RelationKind,
        source: EntityId,
        target: EntityId,
    ) -> Result<LinkId, ModelError> {
        let id = LinkId(self.next_link);
        self.insert_link(id, relation, source, target)?;
        Ok(id)
    }

    pub(crate) fn insert_link(
        &mut self,
        id: LinkId,
        relation: RelationKind,
        source: EntityId,
        target: EntityId,
    ) -> Result<(), ModelError> {
        let src = self.require(source)?;
        let tgt = self.require(target)?;
        if !relation.accepts_source(src.kind) {
            return Err(ModelError::KindMismatch {
                relation,
                end: "source",
                found: src.kind,
            });
        }
        if !relation.accepts_target(tgt.kind) {
            return Err(ModelError::KindMismatch {
                relation,
                end: "target",
                found: tgt.kind,
            });
        }
        if relation == RelationKind::ComposedOf && self.reaches_via_parts(target, source) {
            return Err(ModelError::DecompositionCycle {
                parent: src.name.clone(),
                child: tgt.name.clone(),
            });
        }
        if self.links.contains_key(&id) {
            return Err(ModelError::UnknownLink(id));
        }
        self.links.insert(
            id,
            Link {
                id,
                relation,
                source,
                target,
            },
        );
        self.outgoing.entry(source).or_default().push(id);
        self.incoming.entry(target).or_default().push(id);
        self.next_link = self.next_link.max(id.0 + 1);
        Ok(())
    }

    /// Records that `child` is an elementary process of `parent`.
    pub fn decompose(&mut self, parent: EntityId, child: EntityId) -> Result<LinkId, ModelError> {
        self.add_link(RelationKind::ComposedOf, parent, child)
    }

    pub fn remove_link(&mut self, id: LinkId) -> Result<Link, ModelError> {
        let link = self.links.remove(&id).ok_or(ModelError::UnknownLink(id))?;
        if let Some(v) = self.outgoing.get_mut(&link.source) {
            v.retain(|l| *l != id);
        }
        if let Some(v) = self.incoming.get_mut(&link.target) {
            v.retain(|l| *l != id);
        }
        Ok(link)
    }

    /// Depth-first search along `composed_of` from `from`.
    fn reaches_via_parts(&self, from: EntityId, to: EntityId) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(cur) = stack.pop() {
            if cur == to {
                return true;
            }
            if seen.insert(cur) {
                stack.extend(self.targets(cur, RelationKind::ComposedOf));
            }
        }
        false
    }

    fn require(&self, id: EntityId) -> Result<&Entity, ModelError> {
        self.entities
            .get(&id)
            .ok_or_else(|| ModelError::UnknownEntity(id.to_string()))
    }

    pub fn entity(&self, id: EntityId) -> Option<&Entity> {
        self.entities.get(&id)
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.links.get(&id)
    }

    /// Exact-kind lookup by name.
    pub fn find(&self, kind: EntityKind, name: &str) -> Option<EntityId> {
        self.by_name.get(&(kind, name.to_string())).copied()
    }

    /// All entities named `name` whose kind conforms to one of `kinds`,
    /// ordered by id.
    pub fn find_conforming(&self, name: &str, kinds: &[EntityKind]) -> Vec<EntityId> {
        let mut hits: Vec<EntityId> = EntityKind::ALL
            .into_iter()
            .filter(|k| kinds.iter().any(|accepted| k.is_a(*accepted)))
            .filter_map(|k| self.find(k, name))
            .collect();
        hits.sort();
        hits
    }

    /// Entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    /// Links in id order.
    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    /// Entities whose kind is `kind` or one of its descendants, in id order.
    pub fn entities_of(&self, kind: EntityKind) -> impl Iterator<Item = &Entity> {
        self.entities.values().filter(move |e| e.kind.is_a(kind))
    }

    pub fn outgoing(&self, id: EntityId, relation: RelationKind) -> impl Iterator<Item = &Link> {
        self.outgoing
            .get(&id)
            .into_iter()
            .flatten()
            .map(|l| &self.links[l])
            .filter(move |l| l.relation == relation)
    }

    pub fn incoming(&self, id: EntityId, relation: RelationKind) -> impl Iterator<Item = &Link> {
        self.incoming
            .get(&id)
            .into_iter()
            .flatten()
            .map(|l| &self.links[l])
            .filter(move |l| l.relation == relation)
    }

    pub fn targets(&self, id: EntityId, relation: RelationKind) -> Vec<EntityId> {
        self.outgoing(id, relation).map(|l| l.target).collect()
    }

    pub fn sources(&self, id: EntityId, relation: RelationKind) -> Vec<EntityId> {
        self.incoming(id, relation).map(|l| l.source).collect()
    }

    pub fn has_link(&self, relation: RelationKind, source: EntityId, target: EntityId) -> bool {
        self.outgoing(source, relation).any(|l| l.target == target)
    }

    /// Id-free description of the model: entities as (kind, name,
    /// attributes) and the link multiset as (relation, source, target)
    /// named by (kind, name). Two models are isomorphic iff their canonical
    /// forms are equal.
    pub fn canonical_form(&self) -> CanonicalForm {
        let key = |id: EntityId| {
            let e = &self.entities[&id];
            (e.kind, e.name.clone())
        };
        let mut entities: Vec<_> = self
            .entities
            .values()
            .map(|e| (e.kind, e.name.clone(), e.attributes.clone()))
            .collect();
        entities.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        let mut links: Vec<_> = self
            .links
            .values()
            .map(|l| (l.relation, key(l.source), key(l.target)))
            .collect();
        links.sort();
        CanonicalForm { entities, links }
    }

    pub fn is_isomorphic(&self, other: &QualityModel) -> bool {
        self.canonical_form() == other.canonical_form()
    }

    /// Human-readable `Kind:Name` for diagnostics.
    pub fn describe(&self, id: EntityId) -> String {
        match self.entities.get(&id) {
            Some(e) => format!("{}:{}", e.kind, e.name),
            None => id.to_string(),
        }
    }
}

type EntityKey = (EntityKind, String);

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub entities: Vec<(EntityKind, String, Attributes)>,
    pub links: Vec<(RelationKind, EntityKey, EntityKey)>,
}

fn check_attribute(key: &str, value: &Scalar) -> Result<(), ModelError> {
    if key.is_empty() {
        return Err(ModelError::InvalidAttribute {
            key: key.to_string(),
            reason: "empty key",
        });
    }
    if let Scalar::Number(n) = value {
        if !n.is_finite() {
            return Err(ModelError::InvalidAttribute {
                key: key.to_string(),
                reason: "numbers must be finite",
            });
        }
    }
    Ok(())
}
