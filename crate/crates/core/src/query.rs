//! Read-only selection over a [`QualityModel`].
//!
//! A selector is a kind filter, a relation pattern, or both. The textual
//! form accepted by [`Selector::parse`] is
//!
//! ```text
//! Cause                      every Cause, including the 5M subtypes
//! caused_by(NC1, *)          causes linked from nonconformity NC1
//! MachineCause & caused_by(NC1, *)
//! caused_by(*, *)            the links themselves
//! ```

use std::cmp::Ordering;

use crate::catalog::{EntityKind, RelationKind};
use crate::model::{Entity, EntityId, Link, ModelError, QualityModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Any,
    Named(String),
    Id(EntityId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub relation: RelationKind,
    pub source: Endpoint,
    pub target: Endpoint,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selector {
    pub kind: Option<EntityKind>,
    pub pattern: Option<Pattern>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hit<'m> {
    Entity(&'m Entity),
    Link(&'m Link),
}

impl<'m> Hit<'m> {
    pub fn as_entity(&self) -> Option<&'m Entity> {
        match self {
            Hit::Entity(e) => Some(e),
            Hit::Link(_) => None,
        }
    }
}

impl Selector {
    pub fn kind(kind: EntityKind) -> Self {
        Selector {
            kind: Some(kind),
            pattern: None,
        }
    }

    pub fn pattern(relation: RelationKind, source: Endpoint, target: Endpoint) -> Self {
        Selector {
            kind: None,
            pattern: Some(Pattern {
                relation,
                source,
                target,
            }),
        }
    }

    pub fn and_kind(mut self, kind: EntityKind) -> Self {
        self.kind = Some(kind);
        self
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut sel = Selector::default();
        for part in text.split('&').map(str::trim) {
            if let Some(open) = part.find('(') {
                let rel: RelationKind = part[..open].trim().parse()?;
                let args = part[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| ModelError::UnknownRelation(part.to_string()))?;
                let (src, tgt) = args
                    .split_once(',')
                    .ok_or_else(|| ModelError::UnknownRelation(part.to_string()))?;
                let endpoint = |s: &str| match s.trim() {
                    "*" => Endpoint::Any,
                    name => Endpoint::Named(name.to_string()),
                };
                sel.pattern = Some(Pattern {
                    relation: rel,
                    source: endpoint(src),
                    target: endpoint(tgt),
                });
            } else {
                sel.kind = Some(part.parse()?);
            }
        }
        Ok(sel)
    }
}

impl Endpoint {
    fn matches(&self, model: &QualityModel, id: EntityId, accepted: &[EntityKind]) -> bool {
        match self {
            Endpoint::Any => true,
            Endpoint::Id(want) => *want == id,
            Endpoint::Named(name) => model.find_conforming(name, accepted).contains(&id),
        }
    }
}

fn entity_order(a: &Entity, b: &Entity) -> Ordering {
    (a.kind, &a.name, a.id).cmp(&(b.kind, &b.name, b.id))
}

/// Runs `selector` against `model`.
///
/// Kind filters match descendants. A pattern with exactly one wildcard end
/// yields the entities at that end; any other pattern yields links. Results
/// are ordered by (kind, name, id) for entities and by (relation, source,
/// target, id) for links. The kind filter narrows entity results only.
pub fn query<'m>(model: &'m QualityModel, selector: &Selector) -> Vec<Hit<'m>> {
    let Some(pattern) = &selector.pattern else {
        let mut hits: Vec<&Entity> = match selector.kind {
            Some(k) => model.entities_of(k).collect(),
            None => model.entities().collect(),
        };
        hits.sort_by(|a, b| entity_order(a, b));
        return hits.into_iter().map(Hit::Entity).collect();
    };

    let rel = pattern.relation;
    let matching: Vec<&Link> = model
        .links()
        .filter(|l| l.relation == rel)
        .filter(|l| pattern.source.matches(model, l.source, rel.source_kinds()))
        .filter(|l| pattern.target.matches(model, l.target, rel.target_kinds()))
        .collect();

    let wildcard_end = match (&pattern.source, &pattern.target) {
        (Endpoint::Any, Endpoint::Any) => None,
        (Endpoint::Any, _) => Some(true),
        (_, Endpoint::Any) => Some(false),
        _ => None,
    };

    match wildcard_end {
        Some(source_side) => {
            let mut ids: Vec<EntityId> = matching
                .iter()
                .map(|l| if source_side { l.source } else { l.target })
                .collect();
            ids.sort();
            ids.dedup();
            let mut hits: Vec<&Entity> = ids
                .into_iter()
                .filter_map(|id| model.entity(id))
                .filter(|e| selector.kind.is_none_or(|k| e.kind.is_a(k)))
                .collect();
            hits.sort_by(|a, b| entity_order(a, b));
            hits.into_iter().map(Hit::Entity).collect()
        }
        None => {
            let key = |id: EntityId| model.entity(id).map(|e| (e.kind, e.name.clone()));
            let mut links = matching;
            links.sort_by(|a, b| {
                (a.relation, key(a.source), key(a.target), a.id).cmp(&(b.relation, key(b.source), key(b.target), b.id))
            });
            links.into_iter().map(Hit::Link).collect()
        }
    }
}
