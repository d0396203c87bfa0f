//! Canonical QML writer.
//!
//! Declarations are grouped by kind in catalog order and sorted by name.
//! Links are written with the declaration that owns them in the grammar
//! when the reference would resolve unambiguously; everything else falls
//! back to `entity` and `link` lines, so every model can be written.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::catalog::{EntityKind, RelationKind};
use crate::model::{Attributes, Entity, EntityId, Link, QualityModel, Scalar};

use super::lexer::{is_ident_continue, is_ident_start};
use super::parser::is_reserved;

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

/// Kind and name of one end of a link, used as a sort key.
type EndKey<'a> = (EntityKind, &'a str);

pub fn format_name(name: &str) -> String {
    let mut chars = name.chars();
    let plain = chars.next().is_some_and(is_ident_start) && chars.all(is_ident_continue) && !is_reserved(name);
    if plain {
        name.to_string()
    } else {
        quote(name)
    }
}

fn format_key(key: &str) -> String {
    let mut chars = key.chars();
    if chars.next().is_some_and(is_ident_start) && chars.all(is_ident_continue) {
        key.to_string()
    } else {
        quote(key)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn format_value(v: &Scalar) -> String {
    match v {
        Scalar::Bool(b) => b.to_string(),
        Scalar::Number(n) => format!("{n}"),
        Scalar::Text(s) => quote(s),
    }
}

fn format_attrs(attrs: &Attributes, skip_value: bool) -> String {
    let parts: Vec<String> = attrs
        .iter()
        .filter(|(k, _)| !(skip_value && k.as_str() == "value"))
        .map(|(k, v)| format!("{} = {}", format_key(k), format_value(v)))
        .collect();
    if parts.is_empty() {
        String::new()
    } else {
        format!(" [{}]", parts.join(", "))
    }
}

/// Keyword for kinds that have a dedicated declaration form.
fn sugar(kind: EntityKind) -> Option<&'static str> {
    use EntityKind::*;
    Some(match kind {
        Process => "process",
        Customer => "customer",
        Supplier => "supplier",
        ShapeRequirement => "requirement shape",
        SpaceRequirement => "requirement space",
        TimeRequirement => "requirement time",
        ProcessRequirement => "requirement process",
        Observation => "observation",
        Measurement => "measurement",
        Test => "test",
        Conformity => "conformity",
        Nonconformity => "nonconformity",
        MachineCause => "cause machine",
        MethodCause => "cause method",
        MaterialCause => "cause material",
        ManpowerCause => "cause manpower",
        EnvironmentCause => "cause environment",
        CorrectiveAction => "action corrective",
        ScheduledPreventiveAction => "action scheduled",
        ConditionalPreventiveAction => "action conditional",
        PredictivePreventiveAction => "action predictive",
        _ => return None,
    })
}

/// Kinds created implicitly by a mention inside another declaration.
fn mentioned_kind(kind: EntityKind) -> bool {
    matches!(
        kind,
        EntityKind::Product | EntityKind::QualityCharacteristic | EntityKind::TangibleProof
    )
}

struct Writer<'m> {
    model: &'m QualityModel,
    out: String,
    /// Implicit entities already written (with their attributes).
    written: HashSet<EntityId>,
}

impl<'m> Writer<'m> {
    fn entity(&self, id: EntityId) -> &'m Entity {
        self.model.entity(id).expect("links reference existing entities")
    }

    fn unambiguous(&self, id: EntityId, kinds: &[EntityKind]) -> bool {
        self.model.find_conforming(&self.entity(id).name, kinds).len() == 1
    }

    /// True when the grammar's sugar for `link` will be written inside a
    /// declaration; otherwise it becomes a `link` line.
    fn is_sugared(&self, link: &Link) -> bool {
        use RelationKind as R;
        let src = self.entity(link.source).kind;
        let tgt = self.entity(link.target).kind;
        match link.relation {
            R::ResultsFrom | R::Consumes | R::ComposedOf | R::Supplies | R::Receives => true,
            R::CheckedBy => true,
            R::HasRequirement => sugar(tgt).is_some() && self.unambiguous(link.source, OWNERS),
            R::Specifies => sugar(src).is_some(),
            R::AttachedProof => sugar(src).is_some(),
            R::Detects => self.unambiguous(link.source, EVIDENCE),
            R::Concerns => self.unambiguous(link.target, OWNERS),
            R::CausedBy => sugar(tgt).is_some(),
            R::Treats => sugar(src).is_some() && self.unambiguous(link.target, TREATABLE),
        }
    }

    fn sorted_names(&self, ids: impl Iterator<Item = EntityId>) -> Vec<(String, EntityId)> {
        let mut v: Vec<(String, EntityId)> = ids.map(|id| (self.entity(id).name.clone(), id)).collect();
        v.sort();
        v
    }

    fn out_names(&self, id: EntityId, rel: RelationKind) -> Vec<(String, EntityId)> {
        let ids: Vec<EntityId> = self
            .model
            .outgoing(id, rel)
            .filter(|l| self.is_sugared(l))
            .map(|l| l.target)
            .collect();
        self.sorted_names(ids.into_iter())
    }

    fn in_names(&self, id: EntityId, rel: RelationKind) -> Vec<(String, EntityId)> {
        let ids: Vec<EntityId> = self
            .model
            .incoming(id, rel)
            .filter(|l| self.is_sugared(l))
            .map(|l| l.source)
            .collect();
        self.sorted_names(ids.into_iter())
    }

    fn list(names: &[(String, EntityId)]) -> String {
        names.iter().map(|(n, _)| format_name(n)).collect::<Vec<_>>().join(", ")
    }

    /// A mention of an implicit entity; attributes go with the first one.
    fn mention(&mut self, id: EntityId, value_sugar: bool) -> String {
        let e = self.entity(id);
        let mut s = format_name(&e.name);
        if self.written.insert(id) {
            s.push_str(&format_attrs(&e.attributes, value_sugar));
            if value_sugar {
                if let Some(v) = e.attributes.get("value") {
                    let _ = write!(s, " = {}", format_value(v));
                }
            }
        }
        s
    }

    fn declaration(&mut self, e: &'m Entity, keyword: &str) {
        use RelationKind as R;
        let head = format!(
            "{keyword} {}{}",
            format_name(&e.name),
            format_attrs(&e.attributes, false)
        );
        match e.kind {
            EntityKind::Process => {
                let inputs = self.out_names(e.id, R::Consumes);
                let outputs = self.in_names(e.id, R::ResultsFrom);
                let parts = self.out_names(e.id, R::ComposedOf);
                if inputs.is_empty() && outputs.is_empty() && parts.is_empty() {
                    let _ = writeln!(self.out, "{head}");
                    return;
                }
                let _ = writeln!(self.out, "{head} {{");
                for (_, id) in &inputs {
                    let m = self.mention(*id, false);
                    let _ = writeln!(self.out, "  input product {m}");
                }
                for (_, id) in &outputs {
                    let m = self.mention(*id, false);
                    let _ = writeln!(self.out, "  output product {m}");
                }
                for (n, _) in &parts {
                    let _ = writeln!(self.out, "  part {}", format_name(n));
                }
                let _ = writeln!(self.out, "}}");
            }
            EntityKind::Customer | EntityKind::Supplier => {
                let rel = if e.kind == EntityKind::Customer {
                    (R::Receives, "receives")
                } else {
                    (R::Supplies, "supplies")
                };
                let products = self.out_names(e.id, rel.0);
                if products.is_empty() {
                    let _ = writeln!(self.out, "{head}");
                } else {
                    let _ = writeln!(self.out, "{head} {} {}", rel.1, Self::list(&products));
                }
            }
            k if k.is_a(EntityKind::Requirement) => {
                let owners = self.in_names(e.id, R::HasRequirement);
                let chars = self.out_names(e.id, R::Specifies);
                let mut line = head;
                if !owners.is_empty() {
                    let _ = write!(line, " on {}", Self::list(&owners));
                }
                if chars.is_empty() {
                    let _ = writeln!(self.out, "{line}");
                    return;
                }
                let _ = writeln!(self.out, "{line} {{");
                for (_, id) in &chars {
                    let m = self.mention(*id, true);
                    let _ = writeln!(self.out, "  characteristic {m}");
                }
                let _ = writeln!(self.out, "}}");
            }
            EntityKind::Observation | EntityKind::Measurement | EntityKind::Test => {
                let checks = self.in_names(e.id, R::CheckedBy);
                let proofs = self.out_names(e.id, R::AttachedProof);
                let mut line = head;
                if !checks.is_empty() {
                    let _ = write!(line, " checks {}", Self::list(&checks));
                }
                if !proofs.is_empty() {
                    let ms: Vec<String> = proofs.iter().map(|(_, id)| self.mention(*id, false)).collect();
                    let _ = write!(line, " proof {}", ms.join(", "));
                }
                let _ = writeln!(self.out, "{line}");
            }
            EntityKind::Conformity | EntityKind::Nonconformity => {
                let on = self.out_names(e.id, R::Concerns);
                let by = self.in_names(e.id, R::Detects);
                let mut line = head;
                if !on.is_empty() {
                    let _ = write!(line, " on {}", Self::list(&on));
                }
                if !by.is_empty() {
                    let _ = write!(line, " detected by {}", Self::list(&by));
                }
                let _ = writeln!(self.out, "{line}");
            }
            k if k.is_a(EntityKind::Cause) => {
                let of = self.in_names(e.id, R::CausedBy);
                if of.is_empty() {
                    let _ = writeln!(self.out, "{head}");
                } else {
                    let _ = writeln!(self.out, "{head} of {}", Self::list(&of));
                }
            }
            _ => {
                let treats = self.out_names(e.id, R::Treats);
                if treats.is_empty() {
                    let _ = writeln!(self.out, "{head}");
                } else {
                    let _ = writeln!(self.out, "{head} treats {}", Self::list(&treats));
                }
            }
        }
    }
}

/// Writes `model` in canonical QML.
pub fn serialize(model: &QualityModel) -> String {
    let mut w = Writer {
        model,
        out: String::new(),
        written: HashSet::new(),
    };
    let _ = writeln!(w.out, "model {}", format_name(model.name()));

    for kind in EntityKind::ALL {
        let mut group: Vec<&Entity> = model.entities().filter(|e| e.kind == kind).collect();
        if group.is_empty() {
            continue;
        }
        group.sort_by(|a, b| a.name.cmp(&b.name));
        let mut started = false;
        for e in group {
            if mentioned_kind(kind) && w.written.contains(&e.id) {
                continue;
            }
            if !started {
                w.out.push('\n');
                started = true;
            }
            match sugar(kind) {
                Some(keyword) => w.declaration(e, keyword),
                None => {
                    w.written.insert(e.id);
                    let _ = writeln!(
                        w.out,
                        "entity {kind} {}{}",
                        format_name(&e.name),
                        format_attrs(&e.attributes, false)
                    );
                }
            }
        }
    }

    let mut rest: Vec<(RelationKind, EndKey, EndKey)> = model
        .links()
        .filter(|l| !w.is_sugared(l))
        .map(|l| {
            let s = w.entity(l.source);
            let t = w.entity(l.target);
            (l.relation, (s.kind, s.name.as_str()), (t.kind, t.name.as_str()))
        })
        .collect();
    rest.sort();
    if !rest.is_empty() {
        w.out.push('\n');
    }
    for (rel, (sk, sn), (tk, tn)) in rest {
        let _ = writeln!(w.out, "link {rel} {sk}:{} -> {tk}:{}", format_name(sn), format_name(tn));
    }
    w.out
}
