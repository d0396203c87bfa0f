//! Relational export, persistence and reports.

mod data;
mod ddl;
mod persist;
mod report;
mod schema;

pub use data::{export_instances, junction_link_count, ExportError};
pub use ddl::{emit_ddl, Ddl};
pub use persist::{from_json, load, save, to_json, PersistenceError, FORMAT_VERSION};
pub use report::{render_report, Analyses, ReportDocument, SpcSummary};
pub use schema::{
    derive_schema, Column, ColumnType, EndColumns, ForeignKey, Placement, RelationalSchema, Table, TableOrigin,
};
