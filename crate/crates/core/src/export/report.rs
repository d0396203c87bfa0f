//! Human-readable and JSON reports combining every analysis of a model.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::analysis::{indicator_report, run_guide, validate, GuideReport, IndicatorReport};
use crate::diagnostic::Diagnostic;
use crate::model::{EntityId, QualityModel};
use crate::tools::{CapabilityResult, Charts, FmeaEntry, Violation};

#[derive(Debug, Clone, PartialEq)]
pub struct SpcSummary {
    pub label: String,
    pub subgroups: usize,
    pub charts: Charts,
    pub violations: Vec<Violation>,
    pub capability: Option<CapabilityResult>,
}

/// Results of the analyses a report is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Analyses {
    pub validation: Vec<Diagnostic>,
    pub guide: GuideReport,
    pub indicators: IndicatorReport,
    /// Ranked worksheet entries, when a worksheet was attached.
    pub fmea: Option<Vec<FmeaEntry>>,
    pub spc: Vec<SpcSummary>,
}

impl Analyses {
    /// Validation, guide and indicators over the whole model.
    pub fn of(model: &QualityModel) -> Self {
        Analyses {
            validation: validate(model),
            guide: run_guide(model, None).expect("whole-model guide always runs"),
            indicators: indicator_report(model),
            fmea: None,
            spc: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub text: String,
    pub json: Value,
}

fn describe_all(model: &QualityModel, ids: &[EntityId]) -> Vec<String> {
    ids.iter().map(|id| model.describe(*id)).collect()
}

fn render_diag(model: &QualityModel, d: &Diagnostic) -> String {
    d.render(Some(model), |_| None)
}

fn diag_json(model: &QualityModel, d: &Diagnostic) -> Value {
    let mut v = serde_json::to_value(d).expect("diagnostics serialize");
    if let crate::Subject::Entity { id } = d.subject {
        v["entity"] = json!(model.describe(id));
    }
    v
}

fn evidence_json(model: &QualityModel, pairs: &[(EntityId, Vec<EntityId>)]) -> Value {
    pairs
        .iter()
        .map(|(id, ev)| json!({"entity": model.describe(*id), "evidence": describe_all(model, ev)}))
        .collect()
}

pub fn render_report(model: &QualityModel, a: &Analyses) -> ReportDocument {
    let mut t = String::new();
    let _ = writeln!(t, "Quality report for model {}", model.name());
    let _ = writeln!(t, "{} entities, {} links", model.entity_count(), model.link_count());

    let _ = writeln!(t, "\n== Design guide ==");
    for s in &a.guide.steps {
        let status = if s.is_complete() { "complete" } else { "incomplete" };
        let _ = writeln!(t, "step {} {}: {status}", s.step, s.title);
        for d in &s.pending {
            let _ = writeln!(t, "  - {}", render_diag(model, d));
        }
    }

    let _ = writeln!(t, "\n== Validation ==");
    if a.validation.is_empty() {
        let _ = writeln!(t, "no violations");
    }
    for d in &a.validation {
        let _ = writeln!(t, "{}", render_diag(model, d));
    }

    let ind = &a.indicators;
    let _ = writeln!(t, "\n== Indicators ==");
    let _ = writeln!(
        t,
        "conformity: {:.1}% ({} of {} characteristics checked with proof)",
        ind.conformity_pct.as_f64(),
        ind.conformity_pct.hits,
        ind.conformity_pct.total
    );
    let _ = writeln!(
        t,
        "cause: {:.1}% ({} of {} nonconformities linked to a cause)",
        ind.cause_pct.as_f64(),
        ind.cause_pct.hits,
        ind.cause_pct.total
    );
    if !ind.unchecked.is_empty() {
        let _ = writeln!(t, "unchecked: {}", describe_all(model, &ind.unchecked).join(", "));
    }
    if !ind.unexplained.is_empty() {
        let _ = writeln!(t, "unexplained: {}", describe_all(model, &ind.unexplained).join(", "));
    }
    for d in &ind.notices {
        let _ = writeln!(t, "{}", render_diag(model, d));
    }

    let _ = writeln!(t, "\n== FMEA ==");
    match &a.fmea {
        None => {
            let _ = writeln!(t, "no FMEA worksheet attached");
        }
        Some(entries) => {
            for (rank, e) in entries.iter().enumerate() {
                let _ = writeln!(
                    t,
                    "{:>2}. RPN {:>4} (S{} O{} D{}) {}",
                    rank + 1,
                    e.rpn,
                    e.severity,
                    e.occurrence,
                    e.detection,
                    e.failure_mode
                );
            }
        }
    }

    let _ = writeln!(t, "\n== SPC ==");
    if a.spc.is_empty() {
        let _ = writeln!(t, "no measurement series");
    }
    for s in &a.spc {
        let (x, r) = (&s.charts.xbar, &s.charts.range);
        let _ = writeln!(t, "{} ({} subgroups of {})", s.label, s.subgroups, x.constants.n);
        let _ = writeln!(t, "  x-bar: center {:.6} LCL {:.6} UCL {:.6}", x.center, x.lcl, x.ucl);
        let _ = writeln!(t, "  range: center {:.6} LCL {:.6} UCL {:.6}", r.center, r.lcl, r.ucl);
        if let Some(c) = &s.capability {
            let _ = writeln!(t, "  Cp {:.3} Cpk {:.3}", c.cp, c.cpk);
        }
        let _ = writeln!(t, "  violations: {}", s.violations.len());
        for v in &s.violations {
            let _ = writeln!(t, "    {}", v.to_diagnostic().render(None, |_| None));
        }
    }

    let json = json!({
        "model": model.name(),
        "entities": model.entity_count(),
        "links": model.link_count(),
        "guide": a.guide.steps.iter().map(|s| json!({
            "step": s.step,
            "title": s.title,
            "status": s.status,
            "pending": s.pending.iter().map(|d| diag_json(model, d)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "validation": a.validation.iter().map(|d| diag_json(model, d)).collect::<Vec<_>>(),
        "indicators": {
            "conformity_pct": ind.conformity_pct,
            "cause_pct": ind.cause_pct,
            "checked": evidence_json(model, &ind.checked),
            "unchecked": describe_all(model, &ind.unchecked),
            "explained": evidence_json(model, &ind.explained),
            "unexplained": describe_all(model, &ind.unexplained),
            "notices": ind.notices.iter().map(|d| diag_json(model, d)).collect::<Vec<_>>(),
        },
        "fmea": a.fmea,
        "spc": a.spc.iter().map(|s| json!({
            "label": s.label,
            "subgroups": s.subgroups,
            "charts": s.charts,
            "violations": s.violations,
            "capability": s.capability,
        })).collect::<Vec<_>>(),
    });
    ReportDocument { text: t, json }
}
