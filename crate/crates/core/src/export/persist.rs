//! JSON persistence of quality models.
//!
//! ```json
//! { "format_version": "qproc/1", "name": "Lathe",
//!   "entities": [ { "id": 1, "kind": "Process", "name": "Turning", "attributes": {} } ],
//!   "links": [ { "id": 1, "relation": "results_from", "source": 2, "target": 1 } ] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Entity, Link, QualityModel};

pub const FORMAT_VERSION: &str = "qproc/1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PersistenceError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format_version `{0}` (expected `{FORMAT_VERSION}`)")]
    UnsupportedVersion(String),
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format_version: String,
    name: String,
    entities: Vec<Entity>,
    links: Vec<Link>,
}

/// Canonical JSON text: entities and links ordered by id.
pub fn to_json(model: &QualityModel) -> String {
    let doc = Document {
        format_version: FORMAT_VERSION.into(),
        name: model.name().into(),
        entities: model.entities().cloned().collect(),
        links: model.links().cloned().collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model data is always serializable");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<QualityModel, PersistenceError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| PersistenceError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format_version != FORMAT_VERSION {
        return Err(PersistenceError::UnsupportedVersion(doc.format_version));
    }
    let invalid = |at: String, e: crate::ModelError| PersistenceError::Invalid {
        at,
        message: e.to_string(),
    };
    let mut model = QualityModel::new(&doc.name).map_err(|e| invalid("name".into(), e))?;
    for (i, e) in doc.entities.into_iter().enumerate() {
        model
            .insert_entity(e.id, e.kind, &e.name, e.attributes)
            .map_err(|err| invalid(format!("entities[{i}]"), err))?;
    }
    for (i, l) in doc.links.into_iter().enumerate() {
        model
            .insert_link(l.id, l.relation, l.source, l.target)
            .map_err(|err| invalid(format!("links[{i}]"), err))?;
    }
    Ok(model)
}

pub fn save(model: &QualityModel, path: impl AsRef<Path>) -> Result<(), PersistenceError> {
    let path = path.as_ref();
    std::fs::write(path, to_json(model)).map_err(|e| PersistenceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<QualityModel, PersistenceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| PersistenceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    from_json(&text)
}
