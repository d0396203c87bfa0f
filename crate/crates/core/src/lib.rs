//! Model engine for quality-process models built on an ISO 9000 process
//! meta-model: the entity/relation catalog, the QML authoring format,
//! validation and the design guide, the quality indicators, FMEA and SPC
//! tools, and relational export.

pub mod analysis;
pub mod catalog;
pub mod diagnostic;
pub mod export;
pub mod model;
pub mod qml;
pub mod query;
pub mod rules;
pub mod tools;

pub use analysis::{indicator_report, run_guide, validate, GuideReport, IndicatorReport, Percentage, Scope};
pub use catalog::{EntityKind, MetaCatalog, Multiplicity, RelationKind};
pub use diagnostic::{Diagnostic, Severity, SourceSpan, Subject};
pub use model::{Attributes, Entity, EntityId, Link, LinkId, ModelError, QualityModel, Scalar};
pub use qml::{parse, serialize, ParseResult};
