//! Meta-model constraint checking.

use std::collections::{BTreeMap, BTreeSet};

use crate::catalog::{AttributeType, EntityKind, RelationKind};
use crate::diagnostic::{Diagnostic, Subject};
use crate::model::{Entity, EntityId, QualityModel, Scalar};
use crate::rules;

/// Reports every constraint violation in `model`, ordered by (code,
/// subject). The list is empty iff the model is fully conformant.
pub fn validate(model: &QualityModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    multiplicities(model, &mut out);
    system_theory(model, &mut out);
    orphans(model, &mut out);
    decomposition_cycles(model, &mut out);
    attributes(model, &mut out);

    let key = |d: &Diagnostic| match d.subject {
        Subject::Entity { id } => model
            .entity(id)
            .map(|e| (e.kind.ordinal(), e.name.clone(), id.0))
            .unwrap_or((usize::MAX, String::new(), id.0)),
        _ => (usize::MAX, String::new(), 0),
    };
    out.sort_by(|a, b| (a.code, key(a), &a.message).cmp(&(b.code, key(b), &b.message)));
    out
}

fn entity_subject(id: EntityId) -> Subject {
    Subject::Entity { id }
}

fn is_leaf_process(model: &QualityModel, id: EntityId) -> bool {
    model.outgoing(id, RelationKind::ComposedOf).next().is_none()
}

/// Lower bounds that are waived for particular instances.
fn lower_bound_applies(model: &QualityModel, rel: RelationKind, e: &Entity, outgoing: bool) -> bool {
    match (rel, outgoing) {
        // Purchased products originate outside the modelled processes.
        (RelationKind::ResultsFrom, true) => model.incoming(e.id, RelationKind::Supplies).next().is_none(),
        // A composite process yields products through its parts.
        (RelationKind::ResultsFrom, false) => is_leaf_process(model, e.id),
        // Reported as R-ORPH-001 instead.
        (RelationKind::Specifies, true) => false,
        _ => true,
    }
}

fn multiplicities(model: &QualityModel, out: &mut Vec<Diagnostic>) {
    for rel in RelationKind::ALL {
        for e in model.entities() {
            for outgoing in [true, false] {
                let (accepts, mult, count, other) = if outgoing {
                    (
                        rel.accepts_source(e.kind),
                        rel.target_mult(),
                        model.outgoing(e.id, rel).count(),
                        rel.target_kinds(),
                    )
                } else {
                    (
                        rel.accepts_target(e.kind),
                        rel.source_mult(),
                        model.incoming(e.id, rel).count(),
                        rel.source_kinds(),
                    )
                };
                if !accepts {
                    continue;
                }
                let others = other.iter().map(|k| k.name()).collect::<Vec<_>>().join("|");
                let dir = if outgoing { "to" } else { "from" };
                if mult.max.is_some_and(|max| count > max) {
                    out.push(rules::R_MULT_UPPER.diag(
                        entity_subject(e.id),
                        format!(
                            "{count} `{rel}` links {dir} {others}; at most {} allowed (multiplicity {mult})",
                            mult.max.unwrap()
                        ),
                    ));
                } else if count < mult.min && lower_bound_applies(model, rel, e, outgoing) {
                    out.push(rules::R_MULT_LOWER.diag(
                        entity_subject(e.id),
                        format!(
                            "{count} `{rel}` links {dir} {others}; at least {} required (multiplicity {mult})",
                            mult.min
                        ),
                    ));
                }
            }
        }
    }
}

const ATTRIBUTE_KINDS: [(EntityKind, &str); 3] = [
    (EntityKind::ShapeRequirement, "shape"),
    (EntityKind::SpaceRequirement, "space"),
    (EntityKind::TimeRequirement, "time"),
];

/// Which of shape/space/time the output-product requirements of
/// `process` cover.
pub(crate) fn covered_attributes(model: &QualityModel, process: EntityId) -> BTreeSet<&'static str> {
    let mut covered = BTreeSet::new();
    for product in model.sources(process, RelationKind::ResultsFrom) {
        for req in model.targets(product, RelationKind::HasRequirement) {
            if let Some(kind) = model.entity(req).map(|e| e.kind) {
                for (k, label) in ATTRIBUTE_KINDS {
                    if kind.is_a(k) {
                        covered.insert(label);
                    }
                }
            }
        }
    }
    covered
}

/// An elementary process transforms at least two of the shape, space and
/// time attributes of its output.
fn system_theory(model: &QualityModel, out: &mut Vec<Diagnostic>) {
    for p in model.entities_of(EntityKind::Process) {
        if !is_leaf_process(model, p.id) {
            continue;
        }
        let covered = covered_attributes(model, p.id);
        if covered.len() < 2 {
            let have = if covered.is_empty() {
                "none".to_string()
            } else {
                covered.iter().copied().collect::<Vec<_>>().join(", ")
            };
            out.push(rules::R_SYS.diag(
                entity_subject(p.id),
                format!(
                    "output requirements cover {} of shape/space/time ({have}); at least two are required",
                    covered.len()
                ),
            ));
        }
    }
}

fn orphans(model: &QualityModel, out: &mut Vec<Diagnostic>) {
    for r in model.entities_of(EntityKind::Requirement) {
        if model.outgoing(r.id, RelationKind::Specifies).next().is_none() {
            out.push(
                rules::R_ORPH_REQUIREMENT.diag(entity_subject(r.id), "requirement specifies no quality characteristic"),
            );
        }
        if model.incoming(r.id, RelationKind::HasRequirement).next().is_none() {
            out.push(rules::R_ORPH_UNOWNED.diag(
                entity_subject(r.id),
                "requirement is not attached to any product or process",
            ));
        }
    }
    for nc in model.entities_of(EntityKind::Nonconformity) {
        if model.outgoing(nc.id, RelationKind::Concerns).next().is_none() {
            out.push(rules::R_ORPH_NONCONFORMITY.diag(
                entity_subject(nc.id),
                "nonconformity is not attached to a product or process",
            ));
        }
    }
}

fn decomposition_cycles(model: &QualityModel, out: &mut Vec<Diagnostic>) {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit(model: &QualityModel, id: EntityId, marks: &mut BTreeMap<EntityId, Mark>, hits: &mut BTreeSet<EntityId>) {
        marks.insert(id, Mark::Open);
        for child in model.targets(id, RelationKind::ComposedOf) {
            match marks.get(&child) {
                Some(Mark::Open) => {
                    hits.insert(child);
                }
                Some(Mark::Done) => {}
                None => visit(model, child, marks, hits),
            }
        }
        marks.insert(id, Mark::Done);
    }

    let mut marks = BTreeMap::new();
    let mut hits = BTreeSet::new();
    for p in model.entities_of(EntityKind::Process) {
        if !marks.contains_key(&p.id) {
            visit(model, p.id, &mut marks, &mut hits);
        }
    }
    for id in hits {
        out.push(rules::R_CYCLE.diag(entity_subject(id), "process is part of itself through composed_of"));
    }
}

fn attributes(model: &QualityModel, out: &mut Vec<Diagnostic>) {
    for e in model.entities() {
        for (key, value) in &e.attributes {
            let Some(def) = e.kind.attribute(key) else {
                out.push(rules::R_ATTR_UNKNOWN.diag(
                    entity_subject(e.id),
                    format!("attribute `{key}` is not registered for {}", e.kind),
                ));
                continue;
            };
            let fits = matches!(
                (def.ty, value),
                (AttributeType::Text, Scalar::Text(_))
                    | (AttributeType::Numeric, Scalar::Number(_))
                    | (AttributeType::Boolean, Scalar::Bool(_))
            );
            if !fits {
                out.push(rules::R_ATTR_TYPE.diag(
                    entity_subject(e.id),
                    format!("attribute `{key}` expects a {:?} value, got {value:?}", def.ty).to_lowercase(),
                ));
            }
        }
    }
}
