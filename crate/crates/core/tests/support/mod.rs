//! Shared helpers for integration tests: fixtures, a random model
//! generator, a naive indicator oracle and the guide-order build script.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use qproc_core::catalog::RelationKind as R;
use qproc_core::{Attributes, EntityId, EntityKind as K, QualityModel, RelationKind, Scalar};
use rand::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn lathe() -> QualityModel {
    let r = qproc_core::parse(&fixture_text("lathe.qml"), "lathe.qml");
    assert!(r.diagnostics.is_empty(), "{:#?}", r.diagnostics);
    r.model
}

const NAMES: &[&str] = &[
    "A",
    "B",
    "Shaft",
    "Bar",
    "tool_1",
    "two words",
    "process",
    "output",
    "Größe",
    "say \"hi\"",
    "back\\slash",
    "9lives",
];

fn random_scalar(rng: &mut StdRng) -> Scalar {
    match rng.random_range(0..3) {
        0 => Scalar::Bool(rng.random()),
        1 => Scalar::Number((rng.random_range(-1000..1000) as f64) / 8.0),
        _ => Scalar::Text(NAMES[rng.random_range(0..NAMES.len())].to_string()),
    }
}

/// A random model with at most `max_entities` entities and links drawn
/// from every relation. Names repeat across kinds on purpose.
pub fn random_model(rng: &mut StdRng, max_entities: usize) -> QualityModel {
    let mut m = QualityModel::new("Random").unwrap();
    let n = rng.random_range(0..=max_entities);
    for _ in 0..n {
        let kind = K::ALL[rng.random_range(0..K::ALL.len())];
        let name = if rng.random_bool(0.7) {
            NAMES[rng.random_range(0..NAMES.len())].to_string()
        } else {
            format!("E{}", rng.random_range(0..100))
        };
        let mut attrs = Attributes::new();
        if rng.random_bool(0.3) {
            let defs = kind.attributes();
            let key = defs[rng.random_range(0..defs.len())].key.to_string();
            attrs.insert(key, random_scalar(rng));
        }
        if rng.random_bool(0.05) {
            attrs.insert("custom key".into(), random_scalar(rng));
        }
        let _ = m.add_entity(kind, &name, attrs);
    }
    let ids: Vec<EntityId> = m.entities().map(|e| e.id).collect();
    if ids.is_empty() {
        return m;
    }
    for _ in 0..rng.random_range(0..=2 * ids.len()) {
        let rel = RelationKind::ALL[rng.random_range(0..RelationKind::ALL.len())];
        let sources: Vec<_> = ids
            .iter()
            .copied()
            .filter(|id| rel.accepts_source(m.entity(*id).unwrap().kind))
            .collect();
        let targets: Vec<_> = ids
            .iter()
            .copied()
            .filter(|id| rel.accepts_target(m.entity(*id).unwrap().kind))
            .collect();
        if let (Some(s), Some(t)) = (sources.choose(rng), targets.choose(rng)) {
            let _ = m.add_link(rel, *s, *t);
        }
    }
    m
}

/// Indicator scope as seen by the oracle.
#[derive(Debug, Clone, Copy)]
pub enum OracleScope {
    Model,
    Entity(EntityId),
}

fn links_of(m: &QualityModel, rel: RelationKind) -> Vec<(EntityId, EntityId)> {
    m.links()
        .filter(|l| l.relation == rel)
        .map(|l| (l.source, l.target))
        .collect()
}

/// Characteristics and nonconformities in scope, found by scanning the
/// full link list until nothing changes.
fn oracle_population(m: &QualityModel, scope: OracleScope) -> (BTreeSet<EntityId>, BTreeSet<EntityId>) {
    let kind = |id: EntityId| m.entity(id).unwrap().kind;
    let all_chars: BTreeSet<_> = m
        .entities()
        .filter(|e| e.kind == K::QualityCharacteristic)
        .map(|e| e.id)
        .collect();
    let all_ncs: BTreeSet<_> = m
        .entities()
        .filter(|e| e.kind == K::Nonconformity)
        .map(|e| e.id)
        .collect();
    let root = match scope {
        OracleScope::Model => return (all_chars, all_ncs),
        OracleScope::Entity(id) => id,
    };
    let mut processes = BTreeSet::new();
    let mut owners = BTreeSet::new();
    if kind(root) == K::Process {
        processes.insert(root);
        loop {
            let before = processes.len();
            for (p, c) in links_of(m, R::ComposedOf) {
                if processes.contains(&p) {
                    processes.insert(c);
                }
            }
            if processes.len() == before {
                break;
            }
        }
        for (product, process) in links_of(m, R::ResultsFrom) {
            if processes.contains(&process) {
                owners.insert(product);
            }
        }
        owners.extend(processes.iter().copied());
    } else {
        owners.insert(root);
    }
    let reqs: BTreeSet<_> = links_of(m, R::HasRequirement)
        .into_iter()
        .filter(|(o, _)| owners.contains(o))
        .map(|(_, r)| r)
        .collect();
    let chars = links_of(m, R::Specifies)
        .into_iter()
        .filter(|(r, _)| reqs.contains(r))
        .map(|(_, c)| c)
        .collect();
    let ncs = links_of(m, R::Concerns)
        .into_iter()
        .filter(|(nc, o)| kind(*nc) == K::Nonconformity && owners.contains(o))
        .map(|(nc, _)| nc)
        .collect();
    (chars, ncs)
}

/// (checked-with-proof, total) characteristics by plain link enumeration.
pub fn oracle_conformity(m: &QualityModel, scope: OracleScope) -> (usize, usize) {
    let (chars, _) = oracle_population(m, scope);
    let checks = links_of(m, R::CheckedBy);
    let proofs = links_of(m, R::AttachedProof);
    let hits = chars
        .iter()
        .filter(|c| {
            checks
                .iter()
                .any(|(src, checker)| src == *c && proofs.iter().any(|(holder, _)| holder == checker))
        })
        .count();
    (hits, chars.len())
}

/// (caused, total) nonconformities by plain link enumeration.
pub fn oracle_cause(m: &QualityModel, scope: OracleScope) -> (usize, usize) {
    let (_, ncs) = oracle_population(m, scope);
    let caused = links_of(m, R::CausedBy);
    let hits = ncs.iter().filter(|nc| caused.iter().any(|(s, _)| s == *nc)).count();
    (hits, ncs.len())
}

/// One construction step of the guide-order script.
#[derive(Debug, Clone)]
pub enum Op {
    Entity {
        kind: K,
        name: String,
        attrs: Attributes,
    },
    Link {
        rel: RelationKind,
        source: (K, String),
        target: (K, String),
    },
}

impl Op {
    pub fn apply(&self, m: &mut QualityModel) {
        match self {
            Op::Entity { kind, name, attrs } => {
                m.add_entity(*kind, name, attrs.clone()).unwrap();
            }
            Op::Link { rel, source, target } => {
                let s = m.find(source.0, &source.1).unwrap();
                let t = m.find(target.0, &target.1).unwrap();
                m.add_link(*rel, s, t).unwrap();
            }
        }
    }
}

fn kind_phase(k: K) -> usize {
    if k.is_a(K::Requirement) || k == K::QualityCharacteristic {
        2
    } else if matches!(k, K::Observation | K::Measurement | K::Test) {
        3
    } else if matches!(k, K::TangibleProof | K::Control | K::Validation | K::Checking) {
        4
    } else if matches!(k, K::Conformity | K::Nonconformity) {
        5
    } else if k.is_a(K::Cause) {
        6
    } else if k.is_a(K::Action) {
        7
    } else {
        1
    }
}

/// Relations in the order the script adds them within each phase.
const LINK_ORDER: [(RelationKind, usize); 13] = [
    (R::ComposedOf, 1),
    (R::Consumes, 1),
    (R::ResultsFrom, 1),
    (R::Supplies, 1),
    (R::Receives, 1),
    (R::HasRequirement, 2),
    (R::Specifies, 2),
    (R::CheckedBy, 3),
    (R::AttachedProof, 4),
    (R::Concerns, 5),
    (R::Detects, 5),
    (R::CausedBy, 6),
    (R::Treats, 7),
];

/// Rebuilds `target` in guide order: phase k adds the entities and links
/// that step k asks about, entities before links.
pub fn guide_script(target: &QualityModel) -> Vec<Vec<Op>> {
    let mut phases = vec![Vec::new(); 7];
    for e in target.entities() {
        phases[kind_phase(e.kind) - 1].push(Op::Entity {
            kind: e.kind,
            name: e.name.clone(),
            attrs: e.attributes.clone(),
        });
    }
    let end = |id: EntityId| {
        let e = target.entity(id).unwrap();
        (e.kind, e.name.clone())
    };
    for (rel, phase) in LINK_ORDER {
        for l in target.links().filter(|l| l.relation == rel) {
            phases[phase - 1].push(Op::Link {
                rel,
                source: end(l.source),
                target: end(l.target),
            });
        }
    }
    phases
}
