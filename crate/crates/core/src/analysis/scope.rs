//! Populations an analysis ranges over, for the whole model or for one
//! product or process (a process scope includes its elementary processes).

use std::collections::BTreeSet;

use crate::catalog::{EntityKind, RelationKind as R};
use crate::model::{EntityId, ModelError, QualityModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    #[default]
    Model,
    /// A Product or a Process.
    Entity(EntityId),
}

pub(crate) struct Population<'m> {
    model: &'m QualityModel,
    scope: Scope,
}

impl<'m> Population<'m> {
    /// Fails unless `scope` names a Product or Process of `model`.
    pub fn new(model: &'m QualityModel, scope: Scope) -> Result<Self, ModelError> {
        if let Scope::Entity(id) = scope {
            match model.entity(id) {
                Some(e) if matches!(e.kind, EntityKind::Process | EntityKind::Product) => {}
                _ => {
                    return Err(ModelError::UnknownEntity(format!(
                        "{} (not a product or process)",
                        model.describe(id)
                    )))
                }
            }
        }
        Ok(Population { model, scope })
    }

    pub fn model(&self) -> &'m QualityModel {
        self.model
    }

    fn is_product_scope(&self) -> bool {
        matches!(self.scope, Scope::Entity(id)
            if self.model.entity(id).is_some_and(|e| e.kind == EntityKind::Product))
    }

    /// Processes in scope.
    pub fn processes(&self) -> BTreeSet<EntityId> {
        match self.scope {
            Scope::Model => self.model.entities_of(EntityKind::Process).map(|e| e.id).collect(),
            Scope::Entity(_) if self.is_product_scope() => BTreeSet::new(),
            Scope::Entity(root) => {
                let mut seen = BTreeSet::new();
                let mut stack = vec![root];
                while let Some(p) = stack.pop() {
                    if seen.insert(p) {
                        stack.extend(self.model.targets(p, R::ComposedOf));
                    }
                }
                seen
            }
        }
    }

    /// Processes the guide's context step is asked about: the scope
    /// process itself, or every process that is not part of another.
    pub fn roots(&self) -> Vec<EntityId> {
        match self.scope {
            Scope::Model => self
                .model
                .entities_of(EntityKind::Process)
                .filter(|e| self.model.incoming(e.id, R::ComposedOf).next().is_none())
                .map(|e| e.id)
                .collect(),
            Scope::Entity(_) if self.is_product_scope() => Vec::new(),
            Scope::Entity(root) => vec![root],
        }
    }

    /// Products resulting from a process in scope (or the scope product).
    pub fn outputs(&self) -> BTreeSet<EntityId> {
        match self.scope {
            Scope::Entity(id) if self.is_product_scope() => BTreeSet::from([id]),
            Scope::Model => self
                .model
                .entities_of(EntityKind::Product)
                .filter(|e| self.model.outgoing(e.id, R::ResultsFrom).next().is_some())
                .map(|e| e.id)
                .collect(),
            Scope::Entity(_) => self
                .processes()
                .into_iter()
                .flat_map(|p| self.model.sources(p, R::ResultsFrom))
                .collect(),
        }
    }

    /// Products consumed by a process in scope.
    pub fn inputs_of(&self, processes: &BTreeSet<EntityId>) -> BTreeSet<EntityId> {
        processes
            .iter()
            .flat_map(|p| self.model.targets(*p, R::Consumes))
            .collect()
    }

    /// Products and processes whose requirements and nonconformities are in
    /// scope.
    fn owners(&self) -> BTreeSet<EntityId> {
        let mut o = self.outputs();
        o.extend(self.processes());
        o
    }

    pub fn requirements(&self) -> BTreeSet<EntityId> {
        match self.scope {
            Scope::Model => self.model.entities_of(EntityKind::Requirement).map(|e| e.id).collect(),
            Scope::Entity(_) => self
                .owners()
                .into_iter()
                .flat_map(|o| self.model.targets(o, R::HasRequirement))
                .collect(),
        }
    }

    pub fn characteristics(&self) -> BTreeSet<EntityId> {
        match self.scope {
            Scope::Model => self
                .model
                .entities_of(EntityKind::QualityCharacteristic)
                .map(|e| e.id)
                .collect(),
            Scope::Entity(_) => self
                .requirements()
                .into_iter()
                .flat_map(|r| self.model.targets(r, R::Specifies))
                .collect(),
        }
    }

    /// Observations, measurements and tests in scope.
    pub fn checkers(&self) -> BTreeSet<EntityId> {
        match self.scope {
            Scope::Model => [EntityKind::Observation, EntityKind::Measurement, EntityKind::Test]
                .into_iter()
                .flat_map(|k| self.model.entities_of(k).map(|e| e.id))
                .collect(),
            Scope::Entity(_) => self
                .characteristics()
                .into_iter()
                .flat_map(|c| self.model.targets(c, R::CheckedBy))
                .collect(),
        }
    }

    pub fn nonconformities(&self) -> BTreeSet<EntityId> {
        let all = self.model.entities_of(EntityKind::Nonconformity).map(|e| e.id);
        match self.scope {
            Scope::Model => all.collect(),
            Scope::Entity(_) => {
                let owners = self.owners();
                all.filter(|nc| self.model.targets(*nc, R::Concerns).iter().any(|o| owners.contains(o)))
                    .collect()
            }
        }
    }
}
