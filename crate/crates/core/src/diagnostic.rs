use std::fmt;

use serde::Serialize;

use crate::model::{EntityId, LinkId, QualityModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        })
    }
}

/// 1-based location in a source file. `column` counts characters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// What a diagnostic is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Subject {
    Model,
    Entity {
        id: EntityId,
    },
    Link {
        id: LinkId,
    },
    Span(SourceSpan),
    /// 1-based subgroup number of a measurement series.
    Subgroup {
        index: usize,
    },
    /// 1-based line of a tool input file.
    Line {
        file: String,
        line: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub subject: Subject,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<u8>,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// One-line rendering. Entity subjects are shown as `Kind:Name` and,
    /// when `locate` knows where the entity was declared, prefixed by that
    /// location.
    pub fn render(&self, model: Option<&QualityModel>, locate: impl Fn(EntityId) -> Option<SourceSpan>) -> String {
        let step = self.step.map(|s| format!(" (step {s})")).unwrap_or_default();
        let head = format!("{}[{}]{}", self.severity, self.code, step);
        match &self.subject {
            Subject::Span(span) => format!("{span}: {head}: {}", self.message),
            Subject::Entity { id } => {
                let what = model.map(|m| m.describe(*id)).unwrap_or_else(|| id.to_string());
                match locate(*id) {
                    Some(span) => format!("{span}: {head}: {what}: {}", self.message),
                    None => format!("{head}: {what}: {}", self.message),
                }
            }
            Subject::Link { id } => format!("{head}: link {id}: {}", self.message),
            Subject::Subgroup { index } => format!("{head}: subgroup {index}: {}", self.message),
            Subject::Line { file, line } => format!("{file}:{line}: {head}: {}", self.message),
            Subject::Model => format!("{head}: {}", self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
