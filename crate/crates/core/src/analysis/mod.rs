//! Rule engine: meta-model validation, the design guide and the quality
//! indicators. Everything here reads the model and never mutates it.

mod guide;
mod indicators;
mod scope;
mod validate;

pub use guide::{run_guide, GuideReport, StepReport, StepStatus, STEP_TITLES};
pub use indicators::{
    cause_indicator, conformity_indicator, indicator_report, indicators, CauseIndicator, ConformityIndicator,
    IndicatorReport, Percentage,
};
pub use scope::Scope;
pub use validate::validate;
