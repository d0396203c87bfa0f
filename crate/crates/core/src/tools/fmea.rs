//! FMEA worksheets and their attachment to a quality model.
//!
//! A worksheet is a `;`-separated table, one entry per line:
//!
//! ```text
//! # comment
//! process;Turning
//! failure_mode;effect;S;O;D;nonconformity;cause;action
//! Diameter above tolerance;shaft rejected;7;5;4;OversizeDiameter;ToolWear;ReplaceInsert
//! ```
//!
//! The `process` line and the column header are optional. Reference fields
//! hold entity names and may be empty.

use std::cmp::Reverse;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{EntityKind, RelationKind};
use crate::diagnostic::{Diagnostic, Subject};
use crate::model::{EntityId, QualityModel};
use crate::rules;

pub const SCALE: std::ops::RangeInclusive<u32> = 1..=10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FmeaError {
    #[error("rating {value} is outside the 1..10 scale")]
    InvalidScale { value: u32 },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("unknown entity: {0}")]
    UnknownEntity(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FmeaEntry {
    pub failure_mode: String,
    pub effect: String,
    pub severity: u8,
    pub occurrence: u8,
    pub detection: u8,
    pub rpn: u32,
    pub nonconformity: Option<String>,
    pub cause: Option<String>,
    pub action: Option<String>,
    /// 1-based line in the worksheet, 0 when built in code.
    pub line: usize,
}

impl FmeaEntry {
    pub fn new(
        failure_mode: &str,
        effect: &str,
        (s, o, d): (u32, u32, u32),
        nonconformity: Option<&str>,
        cause: Option<&str>,
        action: Option<&str>,
    ) -> Result<Self, FmeaError> {
        let rpn = compute_rpn(s, o, d)?;
        Ok(FmeaEntry {
            failure_mode: failure_mode.to_string(),
            effect: effect.to_string(),
            severity: s as u8,
            occurrence: o as u8,
            detection: d as u8,
            rpn,
            nonconformity: nonconformity.map(str::to_string),
            cause: cause.map(str::to_string),
            action: action.map(str::to_string),
            line: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct FmeaDocument {
    /// Name of the studied process; `None` means the model's only root
    /// process.
    pub process: Option<String>,
    pub entries: Vec<FmeaEntry>,
    pub file: String,
}

/// Risk priority number `S × O × D`.
pub fn compute_rpn(s: u32, o: u32, d: u32) -> Result<u32, FmeaError> {
    for value in [s, o, d] {
        if !SCALE.contains(&value) {
            return Err(FmeaError::InvalidScale { value });
        }
    }
    Ok(s * o * d)
}

pub fn parse_fmea(text: &str, file: &str) -> Result<FmeaDocument, FmeaError> {
    let mut doc = FmeaDocument {
        file: file.to_string(),
        ..Default::default()
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(';').map(str::trim).collect();
        let malformed = |reason: String| FmeaError::Malformed { line, reason };
        if fields[0].eq_ignore_ascii_case("process") {
            if fields.len() != 2 || fields[1].is_empty() {
                return Err(malformed("expected `process;<name>`".into()));
            }
            if doc.process.is_some() {
                return Err(malformed("process given more than once".into()));
            }
            doc.process = Some(fields[1].to_string());
            continue;
        }
        if fields[0].eq_ignore_ascii_case("failure_mode") {
            continue;
        }
        if fields.len() != 8 {
            return Err(malformed(format!("expected 8 fields, found {}", fields.len())));
        }
        let rating = |idx: usize, what: &str| -> Result<u32, FmeaError> {
            fields[idx]
                .parse::<u32>()
                .map_err(|_| malformed(format!("{what} `{}` is not an integer", fields[idx])))
        };
        let s = rating(2, "severity")?;
        let o = rating(3, "occurrence")?;
        let d = rating(4, "detection")?;
        let opt = |idx: usize| Some(fields[idx]).filter(|f| !f.is_empty());
        let mut entry = FmeaEntry::new(fields[0], fields[1], (s, o, d), opt(5), opt(6), opt(7))
            .map_err(|e| malformed(e.to_string()))?;
        entry.line = line;
        doc.entries.push(entry);
    }
    Ok(doc)
}

/// Entries by descending RPN, then descending severity; equal entries keep
/// their worksheet order.
pub fn rank_entries(doc: &FmeaDocument) -> Vec<FmeaEntry> {
    let mut ranked = doc.entries.clone();
    ranked.sort_by_key(|e| (Reverse(e.rpn), Reverse(e.severity)));
    ranked
}

fn resolve_process(model: &QualityModel, name: Option<&str>) -> Result<EntityId, FmeaError> {
    match name {
        Some(n) => model
            .find(EntityKind::Process, n)
            .ok_or_else(|| FmeaError::UnknownEntity(format!("Process:{n}"))),
        None => {
            let roots: Vec<_> = model
                .entities_of(EntityKind::Process)
                .filter(|p| model.incoming(p.id, RelationKind::ComposedOf).next().is_none())
                .map(|p| p.id)
                .collect();
            match roots.as_slice() {
                [only] => Ok(*only),
                [] => Err(FmeaError::UnknownEntity("the model has no process".into())),
                _ => Err(FmeaError::UnknownEntity(
                    "several root processes; name the studied process".into(),
                )),
            }
        }
    }
}

/// Links worksheet entries into `model` through the objects both share:
/// a failure's nonconformity is `caused_by` the entry's cause, and the
/// recommended action `treats` the cause (or the nonconformity when no
/// cause resolves). Links that already exist are left alone, so attaching
/// the same worksheet twice changes nothing the second time.
pub fn attach_fmea(model: &mut QualityModel, doc: &FmeaDocument) -> Result<Vec<Diagnostic>, FmeaError> {
    resolve_process(model, doc.process.as_deref())?;
    let mut out = Vec::new();
    for entry in &doc.entries {
        let subject = || Subject::Line {
            file: doc.file.clone(),
            line: entry.line,
        };
        if entry.nonconformity.is_none() && entry.cause.is_none() && entry.action.is_none() {
            out.push(rules::F_NO_REFS.diag(
                subject(),
                format!("`{}` references no nonconformity, cause or action", entry.failure_mode),
            ));
            continue;
        }
        let mut lookup = |name: &Option<String>, kind: EntityKind| -> Option<EntityId> {
            let name = name.as_deref()?;
            let hits = model.find_conforming(name, &[kind]);
            if let [id] = hits.as_slice() {
                Some(*id)
            } else {
                out.push(rules::F_UNRESOLVED.diag(subject(), format!("no {kind} named `{name}` in the model")));
                None
            }
        };
        let nc = lookup(&entry.nonconformity, EntityKind::Nonconformity);
        let cause = lookup(&entry.cause, EntityKind::Cause);
        let action = lookup(&entry.action, EntityKind::Action);

        let mut wanted = Vec::new();
        if let (Some(nc), Some(cause)) = (nc, cause) {
            wanted.push((RelationKind::CausedBy, nc, cause));
        }
        if let Some(action) = action {
            if let Some(target) = cause.or(nc) {
                wanted.push((RelationKind::Treats, action, target));
            }
        }
        for (rel, s, t) in wanted {
            if model.has_link(rel, s, t) {
                continue;
            }
            let link = model
                .add_link(rel, s, t)
                .expect("kinds were resolved against the relation signature");
            out.push(rules::F_LINKED.diag(
                Subject::Link { id: link },
                format!("added {} {rel} {}", model.describe(s), model.describe(t)),
            ));
        }
    }
    Ok(out)
}
