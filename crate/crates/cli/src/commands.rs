use std::fmt::Write as _;
use std::path::Path;

use qproc_core::analysis::{indicators, run_guide, Scope};
use qproc_core::diagnostic::has_errors;
use qproc_core::export::{
    derive_schema, emit_ddl, export_instances, junction_link_count, render_report, Analyses, ExportError, SpcSummary,
};
use qproc_core::tools::{
    attach_fmea, build_charts, capability, detect_violations, parse_fmea, parse_series, rank_entries, FmeaEntry,
};
use qproc_core::{rules, Diagnostic, EntityKind, GuideReport, IndicatorReport, MetaCatalog, QualityModel, Subject};
use serde_json::{json, Value};

use crate::{Cli, Command, Format};

/// A usage or I/O problem; reported on stderr with exit status 2.
struct Failure(String);

/// `Ok(true)` when error diagnostics were produced.
type Outcome = Result<bool, Failure>;

pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(Failure(msg)) => {
            eprintln!("qproc: {msg}");
            2
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let out = Output { cli };
    match &cli.command {
        Command::Validate { file } => validate_cmd(&out, file),
        Command::Guide { file, process } => guide_cmd(&out, file, process.as_deref()),
        Command::Indicators { file, scope } => indicators_cmd(&out, file, scope.as_deref()),
        Command::Fmea { file, doc } => fmea_cmd(&out, file, doc),
        Command::Spc { series, usl, lsl } => spc_cmd(&out, series, usl.zip(*lsl)),
        Command::ExportSchema => export_schema_cmd(&out),
        Command::ExportData { file } => export_data_cmd(&out, file),
        Command::Report { file, doc, series } => report_cmd(&out, file, doc.as_deref(), series),
        Command::Rules => rules_cmd(&out),
    }
}

struct Output<'a> {
    cli: &'a Cli,
}

impl Output<'_> {
    fn json(&self) -> bool {
        self.cli.format == Format::Json
    }

    /// Writes `text` when the format is text and `value` when it is JSON.
    fn emit(&self, text: &str, value: impl FnOnce() -> Value) -> Result<(), Failure> {
        let body = match self.cli.format {
            Format::Text => text.to_string(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&value()).expect("JSON values always serialize");
                s.push('\n');
                s
            }
        };
        match &self.cli.output {
            Some(path) => {
                std::fs::write(path, body).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))
            }
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

/// A parsed model plus a way to print diagnostics with source locations.
struct Loaded {
    parse: qproc_core::ParseResult,
}

impl Loaded {
    fn model(&self) -> &QualityModel {
        &self.parse.model
    }

    fn render(&self, d: &Diagnostic) -> String {
        d.render(Some(self.model()), |id| self.parse.span_of(id))
    }

    fn report(&self, diags: &[Diagnostic]) {
        for d in diags {
            eprintln!("{}", self.render(d));
        }
    }

    fn diag_json(&self, d: &Diagnostic) -> Value {
        let mut v = serde_json::to_value(d).expect("diagnostics serialize");
        if let Subject::Entity { id } = d.subject {
            v["entity"] = json!(self.model().describe(id));
            if let Some(span) = self.parse.span_of(id) {
                v["span"] = json!(span);
            }
        }
        v
    }
}

/// Parses a QML file. Parse diagnostics are printed right away; a model
/// with syntax or reference errors is returned as `Err(Ok(true))` so that
/// callers stop before analysing a partial model.
fn load(path: &Path) -> Result<Loaded, Outcome> {
    let text = read(path).map_err(Err)?;
    let loaded = Loaded {
        parse: qproc_core::parse(&text, file_name(path)),
    };
    loaded.report(&loaded.parse.diagnostics);
    if loaded.parse.failed() {
        return Err(Ok(true));
    }
    Ok(loaded)
}

macro_rules! load_or_return {
    ($path:expr) => {
        match load($path) {
            Ok(l) => l,
            Err(outcome) => return outcome,
        }
    };
}

fn count(diags: &[Diagnostic], severity: qproc_core::Severity) -> usize {
    diags.iter().filter(|d| d.severity == severity).count()
}

fn validate_cmd(out: &Output, path: &Path) -> Outcome {
    let loaded = load_or_return!(path);
    let diags = qproc_core::validate(loaded.model());
    loaded.report(&diags);
    let (errors, warnings) = (
        count(&diags, qproc_core::Severity::Error),
        count(&diags, qproc_core::Severity::Warning),
    );
    let text = format!("{}: {errors} error(s), {warnings} warning(s)\n", file_name(path));
    out.emit(&text, || {
        json!({
            "file": file_name(path),
            "errors": errors,
            "warnings": warnings,
            "diagnostics": diags.iter().map(|d| loaded.diag_json(d)).collect::<Vec<_>>(),
        })
    })?;
    Ok(errors > 0)
}

fn resolve(model: &QualityModel, name: &str, kinds: &[EntityKind]) -> Result<qproc_core::EntityId, Failure> {
    let what = kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(" or ");
    match model.find_conforming(name, kinds).as_slice() {
        [id] => Ok(*id),
        [] => Err(Failure(format!("no {what} named `{name}`"))),
        _ => Err(Failure(format!("`{name}` names more than one {what}"))),
    }
}

fn guide_text(loaded: &Loaded, g: &GuideReport) -> String {
    let mut t = String::new();
    if let Some(id) = g.scope {
        let _ = writeln!(t, "scope: {}", loaded.model().describe(id));
    }
    for s in &g.steps {
        let status = if s.is_complete() { "complete" } else { "incomplete" };
        let _ = writeln!(t, "step {} {}: {status}", s.step, s.title);
        for d in &s.pending {
            let _ = writeln!(t, "  - {}", loaded.render(d));
        }
    }
    let _ = writeln!(
        t,
        "{} of 7 steps complete",
        g.steps.iter().filter(|s| s.is_complete()).count()
    );
    t
}

fn guide_cmd(out: &Output, path: &Path, process: Option<&str>) -> Outcome {
    let loaded = load_or_return!(path);
    let scope = process
        .map(|name| resolve(loaded.model(), name, &[EntityKind::Process]))
        .transpose()?;
    let g = run_guide(loaded.model(), scope).map_err(|e| Failure(e.to_string()))?;
    out.emit(&guide_text(&loaded, &g), || {
        json!({
            "scope": g.scope.map(|id| loaded.model().describe(id)),
            "steps": g.steps.iter().map(|s| json!({
                "step": s.step,
                "title": s.title,
                "status": s.status,
                "pending": s.pending.iter().map(|d| loaded.diag_json(d)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    })?;
    Ok(false)
}

fn indicators_text(model: &QualityModel, r: &IndicatorReport) -> String {
    let names = |ids: &[qproc_core::EntityId]| ids.iter().map(|id| model.describe(*id)).collect::<Vec<_>>().join(", ");
    let mut t = String::new();
    if let Some(id) = r.scope {
        let _ = writeln!(t, "scope: {}", model.describe(id));
    }
    let c = &r.conformity_pct;
    let _ = writeln!(
        t,
        "conformity: {c} ({} of {} characteristics checked with proof)",
        c.hits, c.total
    );
    let k = &r.cause_pct;
    let _ = writeln!(
        t,
        "cause: {k} ({} of {} nonconformities linked to a cause)",
        k.hits, k.total
    );
    if !r.unchecked.is_empty() {
        let _ = writeln!(t, "unchecked: {}", names(&r.unchecked));
    }
    if !r.unexplained.is_empty() {
        let _ = writeln!(t, "unexplained: {}", names(&r.unexplained));
    }
    t
}

fn indicators_json(loaded: &Loaded, r: &IndicatorReport) -> Value {
    let m = loaded.model();
    let evidence = |pairs: &[(qproc_core::EntityId, Vec<qproc_core::EntityId>)]| {
        pairs
            .iter()
            .map(|(id, ev)| {
                json!({"entity": m.describe(*id), "evidence": ev.iter().map(|e| m.describe(*e)).collect::<Vec<_>>()})
            })
            .collect::<Vec<_>>()
    };
    let names = |ids: &[qproc_core::EntityId]| ids.iter().map(|id| m.describe(*id)).collect::<Vec<_>>();
    json!({
        "scope": r.scope.map(|id| m.describe(id)),
        "conformity_pct": r.conformity_pct,
        "cause_pct": r.cause_pct,
        "checked": evidence(&r.checked),
        "unchecked": names(&r.unchecked),
        "explained": evidence(&r.explained),
        "unexplained": names(&r.unexplained),
        "notices": r.notices.iter().map(|d| loaded.diag_json(d)).collect::<Vec<_>>(),
    })
}

fn indicators_cmd(out: &Output, path: &Path, scope: Option<&str>) -> Outcome {
    let loaded = load_or_return!(path);
    let scope = match scope {
        Some(name) => Scope::Entity(resolve(
            loaded.model(),
            name,
            &[EntityKind::Process, EntityKind::Product],
        )?),
        None => Scope::Model,
    };
    let r = indicators(loaded.model(), scope).map_err(|e| Failure(e.to_string()))?;
    loaded.report(&r.notices);
    out.emit(&indicators_text(loaded.model(), &r), || indicators_json(&loaded, &r))?;
    Ok(false)
}

fn input_error(file: &Path, message: impl std::fmt::Display) -> Diagnostic {
    rules::X_INPUT.diag(Subject::Model, format!("{}: {message}", file_name(file)))
}

fn fmea_text(entries: &[FmeaEntry]) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "rank  RPN   S  O  D  failure mode");
    for (i, e) in entries.iter().enumerate() {
        let _ = writeln!(
            t,
            "{:>4}  {:>4}  {:>2} {:>2} {:>2}  {}",
            i + 1,
            e.rpn,
            e.severity,
            e.occurrence,
            e.detection,
            e.failure_mode
        );
    }
    t
}

fn fmea_cmd(out: &Output, path: &Path, doc_path: &Path) -> Outcome {
    let mut loaded = load_or_return!(path);
    let text = read(doc_path)?;
    let doc = match parse_fmea(&text, &file_name(doc_path)) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("{}", loaded.render(&input_error(doc_path, e)));
            return Ok(true);
        }
    };
    let before = qproc_core::indicator_report(loaded.model()).cause_pct;
    let diags = match attach_fmea(&mut loaded.parse.model, &doc) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{}", loaded.render(&input_error(doc_path, e)));
            return Ok(true);
        }
    };
    loaded.report(&diags);
    let after = qproc_core::indicator_report(loaded.model()).cause_pct;
    let ranked = rank_entries(&doc);
    let added = diags.iter().filter(|d| d.code == rules::F_LINKED.code).count();
    let mut t = fmea_text(&ranked);
    let _ = writeln!(t, "links added: {added}");
    let _ = writeln!(t, "cause indicator: {before} -> {after}");
    out.emit(&t, || {
        json!({
            "process": doc.process,
            "entries": ranked,
            "links_added": added,
            "cause_pct_before": before,
            "cause_pct_after": after,
            "diagnostics": diags.iter().map(|d| loaded.diag_json(d)).collect::<Vec<_>>(),
        })
    })?;
    Ok(has_errors(&diags))
}

/// Charts one series. Problems with the data become error diagnostics.
fn chart_series(path: &Path, limits: Option<(f64, f64)>) -> Result<Result<SpcSummary, Diagnostic>, Failure> {
    let text = read(path)?;
    let label = file_name(path);
    let data_error = |e: qproc_core::tools::SpcError| rules::S_DATA.diag(Subject::Model, format!("{label}: {e}"));
    let series = match parse_series(&text) {
        Ok(s) => s,
        Err(e) => return Ok(Err(data_error(e))),
    };
    let charts = match build_charts(&series) {
        Ok(c) => c,
        Err(e) => return Ok(Err(data_error(e))),
    };
    let capability = match limits {
        Some((usl, lsl)) => match capability(&series, usl, lsl) {
            Ok(c) => Some(c),
            Err(e) => return Ok(Err(rules::S_CAPABILITY.diag(Subject::Model, format!("{label}: {e}")))),
        },
        None => None,
    };
    Ok(Ok(SpcSummary {
        label: label.clone(),
        subgroups: series.len(),
        violations: detect_violations(&charts, &series),
        charts,
        capability,
    }))
}

fn spc_cmd(out: &Output, path: &Path, limits: Option<(f64, f64)>) -> Outcome {
    let s = match chart_series(path, limits)? {
        Ok(s) => s,
        Err(d) => {
            eprintln!("{}", d.render(None, |_| None));
            return Ok(true);
        }
    };
    for v in &s.violations {
        eprintln!("{}", v.to_diagnostic().render(None, |_| None));
    }
    let (x, r) = (&s.charts.xbar, &s.charts.range);
    let c = &x.constants;
    let mut t = String::new();
    let _ = writeln!(t, "{}: {} subgroups of {}", s.label, s.subgroups, c.n);
    let _ = writeln!(
        t,
        "constants: d2 {:.4} A2 {:.4} D3 {:.4} D4 {:.4}",
        c.d2, c.A2, c.D3, c.D4
    );
    let _ = writeln!(t, "x-bar: center {:.6} LCL {:.6} UCL {:.6}", x.center, x.lcl, x.ucl);
    let _ = writeln!(t, "range: center {:.6} LCL {:.6} UCL {:.6}", r.center, r.lcl, r.ucl);
    if let Some(cap) = &s.capability {
        let _ = writeln!(t, "sigma {:.6} Cp {:.3} Cpk {:.3}", cap.sigma_hat, cap.cp, cap.cpk);
    }
    let _ = writeln!(t, "violations: {}", s.violations.len());
    out.emit(&t, || {
        json!({
            "label": s.label,
            "subgroups": s.subgroups,
            "charts": s.charts,
            "violations": s.violations,
            "capability": s.capability,
        })
    })?;
    Ok(false)
}

fn export_schema_cmd(out: &Output) -> Outcome {
    let schema = derive_schema(&MetaCatalog::standard());
    let ddl = emit_ddl(&schema);
    for d in &ddl.diagnostics {
        eprintln!("{}", d.render(None, |_| None));
    }
    out.emit(&ddl.text, || json!(schema))?;
    Ok(has_errors(&ddl.diagnostics))
}

fn export_data_cmd(out: &Output, path: &Path) -> Outcome {
    let loaded = load_or_return!(path);
    let schema = derive_schema(&MetaCatalog::standard());
    match export_instances(loaded.model(), &schema) {
        Ok(sql) => {
            let rows = loaded.model().entity_count() + junction_link_count(loaded.model(), &schema);
            out.emit(&sql, || json!({"rows": rows, "sql": sql}))?;
            Ok(false)
        }
        Err(e @ ExportError::RefusedDirtyModel { .. }) => {
            let diags: Vec<_> = qproc_core::validate(loaded.model())
                .into_iter()
                .filter(Diagnostic::is_error)
                .collect();
            loaded.report(&diags);
            eprintln!("qproc: {e}");
            Ok(true)
        }
        Err(e) => Err(Failure(e.to_string())),
    }
}

fn report_cmd(out: &Output, path: &Path, doc: Option<&Path>, series: &[std::path::PathBuf]) -> Outcome {
    let mut loaded = load_or_return!(path);
    let mut errors = false;
    let mut fmea = None;
    if let Some(doc_path) = doc {
        let text = read(doc_path)?;
        let attached = parse_fmea(&text, &file_name(doc_path))
            .and_then(|doc| attach_fmea(&mut loaded.parse.model, &doc).map(|diags| (doc, diags)));
        match attached {
            Ok((doc, diags)) => {
                loaded.report(&diags);
                errors |= has_errors(&diags);
                fmea = Some(rank_entries(&doc));
            }
            Err(e) => {
                eprintln!("{}", loaded.render(&input_error(doc_path, e)));
                errors = true;
            }
        }
    }
    let mut analyses = Analyses::of(loaded.model());
    analyses.fmea = fmea;
    for p in series {
        match chart_series(p, None)? {
            Ok(s) => analyses.spc.push(s),
            Err(d) => {
                eprintln!("{}", d.render(None, |_| None));
                errors = true;
            }
        }
    }
    loaded.report(&analyses.validation);
    errors |= has_errors(&analyses.validation);
    let doc = render_report(loaded.model(), &analyses);
    if out.json() {
        out.emit("", || doc.json.clone())?;
    } else {
        out.emit(&doc.text, Value::default)?;
    }
    Ok(errors)
}

fn rules_cmd(out: &Output) -> Outcome {
    let all = rules::catalog();
    let mut t = String::new();
    for r in &all {
        let step = r.step.map(|s| format!("step {s}")).unwrap_or_default();
        let _ = writeln!(
            t,
            "{:<11} {:<8} {:<7} {}",
            r.code,
            r.severity.to_string(),
            step,
            r.description
        );
    }
    out.emit(&t, || json!(all))?;
    Ok(false)
}
