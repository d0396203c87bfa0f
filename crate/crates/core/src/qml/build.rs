//! Second parser pass: declarations to entities, then references to links.

use std::collections::{BTreeMap, HashSet};

use crate::catalog::{EntityKind, RelationKind};
use crate::diagnostic::{Diagnostic, SourceSpan, Subject};
use crate::model::{Attributes, EntityId, ModelError, QualityModel};
use crate::rules;

use super::parser::{AttrAssign, Decl, Ident, Mention};

const OWNERS: &[EntityKind] = &[EntityKind::Product, EntityKind::Process];
const EVIDENCE: &[EntityKind] = &[
    EntityKind::Observation,
    EntityKind::Measurement,
    EntityKind::Test,
    EntityKind::Control,
    EntityKind::Validation,
    EntityKind::Checking,
];
const TREATABLE: &[EntityKind] = &[EntityKind::Nonconformity, EntityKind::Cause];

pub(super) struct Builder {
    pub model: QualityModel,
    pub diagnostics: Vec<Diagnostic>,
    pub spans: BTreeMap<EntityId, SourceSpan>,
    explicit: HashSet<(EntityKind, String)>,
}

fn span_subject(span: &SourceSpan) -> Subject {
    Subject::Span(span.clone())
}

fn kind_list(kinds: &[EntityKind]) -> String {
    kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(" or ")
}

impl Builder {
    pub fn new(model: QualityModel) -> Self {
        Builder {
            model,
            diagnostics: Vec::new(),
            spans: BTreeMap::new(),
            explicit: HashSet::new(),
        }
    }

    pub fn build(mut self, decls: &[Decl]) -> Self {
        // Declaring passes first so that references may point forward.
        let owners: Vec<Option<EntityId>> = decls.iter().map(|d| self.declare(d)).collect();
        for (decl, owner) in decls.iter().zip(&owners) {
            if owner.is_some() {
                self.declare_mentions(decl);
            }
        }
        for (decl, owner) in decls.iter().zip(&owners) {
            match (decl, owner) {
                (Decl::Link { .. }, _) => self.generic_link(decl),
                (_, Some(id)) => self.link_decl(decl, *id),
                _ => {}
            }
        }
        self
    }

    fn push(&mut self, rule: &'static rules::Rule, span: &SourceSpan, msg: impl Into<String>) {
        self.diagnostics.push(rule.diag(span_subject(span), msg));
    }

    fn attributes(&mut self, attrs: &[AttrAssign]) -> Attributes {
        let mut out = Attributes::new();
        for a in attrs {
            match out.get(&a.key.text) {
                Some(prev) if *prev != a.value => {
                    self.push(
                        &rules::Q_ATTRIBUTE,
                        &a.key.span,
                        format!("attribute `{}` assigned twice with different values", a.key.text),
                    );
                }
                _ => {
                    out.insert(a.key.text.clone(), a.value.clone());
                }
            }
        }
        out
    }

    /// Creates the entity an owning declaration introduces.
    fn declare(&mut self, decl: &Decl) -> Option<EntityId> {
        let (kind, head) = match decl {
            Decl::Model(_) | Decl::Link { .. } => return None,
            Decl::Process { head, .. } => (EntityKind::Process, head),
            Decl::Customer { head, .. } => (EntityKind::Customer, head),
            Decl::Supplier { head, .. } => (EntityKind::Supplier, head),
            Decl::Requirement { kind, head, .. }
            | Decl::Check { kind, head, .. }
            | Decl::Determination { kind, head, .. }
            | Decl::Cause { kind, head, .. }
            | Decl::Action { kind, head, .. }
            | Decl::Entity { kind, head } => (*kind, head),
        };
        let attrs = self.attributes(&head.attrs);
        let key = (kind, head.name.text.clone());
        if !self.explicit.insert(key) {
            self.push(
                &rules::Q_DUPLICATE,
                &head.name.span,
                format!("{kind} `{}` is declared more than once", head.name.text),
            );
            return None;
        }
        match self.model.add_entity(kind, &head.name.text, attrs) {
            Ok(id) => {
                self.spans.insert(id, head.name.span.clone());
                Some(id)
            }
            Err(e) => {
                self.push(&rules::Q_ATTRIBUTE, &head.name.span, e.to_string());
                None
            }
        }
    }

    /// Products, characteristics and proofs come into existence on first
    /// mention; later mentions refer to the same entity.
    fn declare_mentions(&mut self, decl: &Decl) {
        match decl {
            Decl::Process { inputs, outputs, .. } => {
                for m in inputs.iter().chain(outputs) {
                    self.find_or_create(EntityKind::Product, m);
                }
            }
            Decl::Requirement { characteristics, .. } => {
                for m in characteristics {
                    self.find_or_create(EntityKind::QualityCharacteristic, m);
                }
            }
            Decl::Check { proofs, .. } => {
                for m in proofs {
                    self.find_or_create(EntityKind::TangibleProof, m);
                }
            }
            _ => {}
        }
    }

    fn find_or_create(&mut self, kind: EntityKind, m: &Mention) -> Option<EntityId> {
        let attrs = self.attributes(&m.attrs);
        if let Some(id) = self.model.find(kind, &m.name.text) {
            for (key, value) in attrs {
                let existing = self.model.entity(id).and_then(|e| e.attributes.get(&key)).cloned();
                match existing {
                    Some(prev) if prev != value => {
                        let span = m
                            .attrs
                            .iter()
                            .find(|a| a.key.text == key)
                            .map(|a| a.key.span.clone())
                            .unwrap_or_else(|| m.name.span.clone());
                        self.push(
                            &rules::Q_ATTRIBUTE,
                            &span,
                            format!(
                                "attribute `{key}` of {kind} `{}` conflicts with an earlier value",
                                m.name.text
                            ),
                        );
                    }
                    Some(_) => {}
                    None => {
                        let _ = self.model.set_attribute(id, &key, value);
                    }
                }
            }
            return Some(id);
        }
        match self.model.add_entity(kind, &m.name.text, attrs) {
            Ok(id) => {
                self.spans.insert(id, m.name.span.clone());
                Some(id)
            }
            Err(e) => {
                self.push(&rules::Q_ATTRIBUTE, &m.name.span, e.to_string());
                None
            }
        }
    }

    fn resolve(&mut self, name: &Ident, kinds: &[EntityKind]) -> Option<EntityId> {
        let hits = self.model.find_conforming(&name.text, kinds);
        match hits.as_slice() {
            [id] => Some(*id),
            [] => {
                self.push(
                    &rules::Q_UNRESOLVED,
                    &name.span,
                    format!("unresolved reference: no {} named `{}`", kind_list(kinds), name.text),
                );
                None
            }
            many => {
                let found: Vec<_> = many.iter().map(|id| self.model.describe(*id)).collect();
                self.push(
                    &rules::Q_AMBIGUOUS,
                    &name.span,
                    format!("ambiguous reference `{}`: {}", name.text, found.join(", ")),
                );
                None
            }
        }
    }

    fn connect(&mut self, rel: RelationKind, source: EntityId, target: EntityId, at: &SourceSpan) {
        if let Err(e) = self.model.add_link(rel, source, target) {
            let rule = match e {
                ModelError::DecompositionCycle { .. } => &rules::Q_CYCLE,
                _ => &rules::Q_LINK,
            };
            self.push(rule, at, e.to_string());
        }
    }

    fn link_decl(&mut self, decl: &Decl, id: EntityId) {
        use RelationKind as R;
        match decl {
            Decl::Process {
                inputs, outputs, parts, ..
            } => {
                for m in inputs {
                    if let Some(p) = self.model.find(EntityKind::Product, &m.name.text) {
                        self.connect(R::Consumes, id, p, &m.name.span);
                    }
                }
                for m in outputs {
                    if let Some(p) = self.model.find(EntityKind::Product, &m.name.text) {
                        self.connect(R::ResultsFrom, p, id, &m.name.span);
                    }
                }
                for part in parts {
                    if let Some(child) = self.resolve(part, &[EntityKind::Process]) {
                        self.connect(R::ComposedOf, id, child, &part.span);
                    }
                }
            }
            Decl::Customer { receives, .. } => {
                for n in receives {
                    if let Some(p) = self.resolve(n, &[EntityKind::Product]) {
                        self.connect(R::Receives, id, p, &n.span);
                    }
                }
            }
            Decl::Supplier { supplies, .. } => {
                for n in supplies {
                    if let Some(p) = self.resolve(n, &[EntityKind::Product]) {
                        self.connect(R::Supplies, id, p, &n.span);
                    }
                }
            }
            Decl::Requirement {
                owners,
                characteristics,
                ..
            } => {
                for n in owners {
                    if let Some(o) = self.resolve(n, OWNERS) {
                        self.connect(R::HasRequirement, o, id, &n.span);
                    }
                }
                for m in characteristics {
                    if let Some(c) = self.model.find(EntityKind::QualityCharacteristic, &m.name.text) {
                        self.connect(R::Specifies, id, c, &m.name.span);
                    }
                }
            }
            Decl::Check { checks, proofs, .. } => {
                for n in checks {
                    if let Some(c) = self.resolve(n, &[EntityKind::QualityCharacteristic]) {
                        self.connect(R::CheckedBy, c, id, &n.span);
                    }
                }
                for m in proofs {
                    if let Some(p) = self.model.find(EntityKind::TangibleProof, &m.name.text) {
                        self.connect(R::AttachedProof, id, p, &m.name.span);
                    }
                }
            }
            Decl::Determination { on, detected_by, .. } => {
                for n in on {
                    if let Some(o) = self.resolve(n, OWNERS) {
                        self.connect(R::Concerns, id, o, &n.span);
                    }
                }
                for n in detected_by {
                    if let Some(c) = self.resolve(n, EVIDENCE) {
                        self.connect(R::Detects, c, id, &n.span);
                    }
                }
            }
            Decl::Cause { of, .. } => {
                for n in of {
                    if let Some(nc) = self.resolve(n, &[EntityKind::Nonconformity]) {
                        self.connect(R::CausedBy, nc, id, &n.span);
                    }
                }
            }
            Decl::Action { treats, .. } => {
                for n in treats {
                    if let Some(t) = self.resolve(n, TREATABLE) {
                        self.connect(R::Treats, id, t, &n.span);
                    }
                }
            }
            Decl::Entity { .. } | Decl::Model(_) | Decl::Link { .. } => {}
        }
    }

    fn generic_link(&mut self, decl: &Decl) {
        let Decl::Link {
            relation,
            source,
            target,
        } = decl
        else {
            return;
        };
        let mut end = |(kind, name): &(EntityKind, Ident)| {
            let found = self.model.find(*kind, &name.text);
            if found.is_none() {
                self.push(
                    &rules::Q_UNRESOLVED,
                    &name.span,
                    format!("unresolved reference: no {kind} named `{}`", name.text),
                );
            }
            found
        };
        let (s, t) = (end(source), end(target));
        if let (Some(s), Some(t)) = (s, t) {
            self.connect(*relation, s, t, &source.1.span);
        }
    }
}
