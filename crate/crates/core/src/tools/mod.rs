//! The integrated quality tools: FMEA worksheets and SPC charts.

pub mod fmea;
pub mod spc;

pub use fmea::{attach_fmea, compute_rpn, parse_fmea, rank_entries, FmeaDocument, FmeaEntry, FmeaError};
pub use spc::{
    build_charts, capability, detect_violations, parse_series, spc_constants, CapabilityResult, ChartKind, Charts,
    ControlChart, RunRule, SpcConstants, SpcError, SubgroupSeries, Violation,
};
