//! End-to-end acceptance checks. Runs without the libtest harness so the
//! verdict lines are always printed; exits non-zero when any check fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use qproc_core::analysis::{indicators, run_guide, Scope, StepStatus};
use qproc_core::export::{
    derive_schema, emit_ddl, export_instances, from_json, junction_link_count, load, save, to_json,
};
use qproc_core::tools::{attach_fmea, build_charts, compute_rpn, parse_fmea, spc_constants, SubgroupSeries};
use qproc_core::{
    indicator_report, parse, serialize, validate, Attributes, EntityKind as K, MetaCatalog, QualityModel,
    RelationKind as R,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use support::{oracle_cause, oracle_conformity, random_model, OracleScope};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

/// `(hits, total)` as a percentage, compared exactly through cross
/// multiplication.
fn pct_diff_is(before: (u64, u64), after: (u64, u64), n: u64) -> bool {
    // before - after == 100 / n  <=>  n·100·(hb·ta − ha·tb) == 100·tb·ta
    let (hb, tb) = (before.0 as i128, before.1 as i128);
    let (ha, ta) = (after.0 as i128, after.1 as i128);
    n as i128 * 100 * (hb * ta - ha * tb) == 100 * tb * ta
}

fn indicator_boundary() -> Result<String, String> {
    let base = support::lathe();
    let r = indicator_report(&base);
    ensure!(r.conformity_pct.as_f64() == 100.0, "conformity is {}", r.conformity_pct);
    ensure!(r.cause_pct.as_f64() == 100.0, "cause is {}", r.cause_pct);
    let n = base.entities_of(K::QualityCharacteristic).count() as u64;
    let checks: Vec<_> = base
        .links()
        .filter(|l| l.relation == R::CheckedBy)
        .map(|l| l.id)
        .collect();
    ensure!(
        checks.len() as u64 == n,
        "fixture should check each characteristic once"
    );
    for id in &checks {
        let mut m = base.clone();
        m.remove_link(*id).unwrap();
        let after = indicator_report(&m).conformity_pct;
        let before = &r.conformity_pct;
        ensure!(
            pct_diff_is((before.hits, before.total), (after.hits, after.total), n),
            "dropping {id} moved conformity from {before} to {after}, not by 100/{n}"
        );
    }
    Ok(format!("both 100%; each of {n} removals drops exactly 100/{n}"))
}

fn indicator_oracle() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x1d1c_0500);
    let mut scopes_checked = 0;
    for i in 0..500 {
        let m = random_model(&mut rng, 30);
        let mut scopes = vec![(Scope::Model, OracleScope::Model)];
        for e in m.entities().filter(|e| matches!(e.kind, K::Process | K::Product)) {
            scopes.push((Scope::Entity(e.id), OracleScope::Entity(e.id)));
        }
        for (scope, oracle) in scopes {
            let r = indicators(&m, scope).map_err(|e| e.to_string())?;
            let got = (r.conformity_pct.hits as usize, r.conformity_pct.total as usize);
            ensure!(
                got == oracle_conformity(&m, oracle),
                "model {i} {scope:?}: conformity {got:?}"
            );
            let got = (r.cause_pct.hits as usize, r.cause_pct.total as usize);
            ensure!(got == oracle_cause(&m, oracle), "model {i} {scope:?}: cause {got:?}");
            scopes_checked += 1;
        }
    }
    Ok(format!("500 models, {scopes_checked} scopes, all exact"))
}

fn guide_monotonicity() -> Result<String, String> {
    let target = support::lathe();
    let mut m = QualityModel::new(target.name()).unwrap();
    let status = |m: &QualityModel| run_guide(m, None).unwrap().statuses();
    let mut prev = status(&m);
    let mut ops = 0;
    for (phase, batch) in support::guide_script(&target).into_iter().enumerate() {
        for op in batch {
            op.apply(&mut m);
            ops += 1;
            let now = status(&m);
            for k in 0..7 {
                ensure!(
                    !(prev[k] == StepStatus::Complete && now[k] == StepStatus::Incomplete),
                    "step {} regressed after {op:?}",
                    k + 1
                );
            }
            prev = now;
        }
        for (k, s) in prev.iter().enumerate() {
            let want = if k <= phase {
                StepStatus::Complete
            } else {
                StepStatus::Incomplete
            };
            ensure!(*s == want, "after phase {} step {} is {s:?}", phase + 1, k + 1);
        }
    }
    ensure!(m.is_isomorphic(&target), "script did not rebuild the fixture");
    Ok(format!("{ops} operations, steps completed in order 1..7"))
}

fn r_sys_rule() -> Result<String, String> {
    let text = support::fixture_text("shape_only.qml");
    let mut m = parse(&text, "shape_only.qml").model;
    let sys = |m: &QualityModel| validate(m).iter().filter(|d| d.code == "R-SYS-001").count();
    ensure!(sys(&m) == 1, "shape-only output gives {} R-SYS diagnostics", sys(&m));
    let shaft = m.find(K::Product, "Shaft").unwrap();
    let time = m.add_entity(K::TimeRequirement, "Cycle", Attributes::new()).unwrap();
    m.add_link(R::HasRequirement, shaft, time).unwrap();
    ensure!(sys(&m) == 0, "time requirement did not clear R-SYS");
    let extended = format!("{text}\nrequirement time Cycle on Shaft {{ characteristic MachiningTime = 90 }}\n");
    let m = parse(&extended, "shape_time.qml").model;
    ensure!(validate(&m).is_empty(), "shape + time model: {:?}", validate(&m));
    Ok("shape only: 1 R-SYS; shape + time: clean".into())
}

fn monte_carlo_range(n: usize, samples: usize, rng: &mut StdRng) -> (f64, f64) {
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            lo = lo.min(z);
            hi = hi.max(z);
        }
        sum += hi - lo;
        sum_sq += (hi - lo) * (hi - lo);
    }
    let mean = sum / samples as f64;
    (mean, (sum_sq / samples as f64 - mean * mean).sqrt())
}

fn spc_constants_check() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0xd2d3);
    let mut worst: f64 = 0.0;
    for n in 2..=10 {
        let c = spc_constants(n).map_err(|e| e.to_string())?;
        let (d2, d3) = monte_carlo_range(n, 1_000_000, &mut rng);
        let oracle = [
            ("d2", c.d2, d2),
            ("A2", c.A2, 3.0 / (d2 * (n as f64).sqrt())),
            ("D3", c.D3, (1.0 - 3.0 * d3 / d2).max(0.0)),
            ("D4", c.D4, 1.0 + 3.0 * d3 / d2),
        ];
        for (name, got, want) in oracle {
            worst = worst.max((got - want).abs());
            ensure!(
                (got - want).abs() <= 0.01,
                "n={n}: {name} = {got:.5}, simulation {want:.5}"
            );
        }
        let product = c.A2 * (c.d2 * (n as f64).sqrt());
        ensure!(product == 3.0, "n={n}: A2·(d2·√n) = {product:e}");
    }
    Ok(format!(
        "n=2..10, 10^6 samples each, max deviation {worst:.4}; A2·(d2·√n) == 3"
    ))
}

fn chart_sanity() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x0027_0015);
    let groups: Vec<Vec<f64>> = (0..10_000)
        .map(|_| (0..5).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let series = SubgroupSeries::new(groups).map_err(|e| e.to_string())?;
    let charts = build_charts(&series).map_err(|e| e.to_string())?;
    let beyond = series
        .means()
        .iter()
        .filter(|m| **m > charts.xbar.ucl || **m < charts.xbar.lcl)
        .count();
    let pct = 100.0 * beyond as f64 / series.len() as f64;
    ensure!(
        (pct - 0.27).abs() <= 0.15,
        "{beyond} of 10000 means beyond limits ({pct:.2}%)"
    );
    Ok(format!("{beyond} of 10000 means beyond limits ({pct:.2}%)"))
}

fn fmea_check() -> Result<String, String> {
    for s in 1..=10 {
        for o in 1..=10 {
            for d in 1..=10 {
                let rpn = compute_rpn(s, o, d).map_err(|e| e.to_string())?;
                ensure!(rpn == s * o * d, "rpn({s},{o},{d}) = {rpn}");
            }
        }
    }
    let mut m = support::lathe();
    let doc = parse_fmea(&support::fixture_text("lathe.fmea"), "lathe.fmea").map_err(|e| e.to_string())?;
    attach_fmea(&mut m, &doc).map_err(|e| e.to_string())?;
    let once = m.canonical_form();
    attach_fmea(&mut m, &doc).map_err(|e| e.to_string())?;
    ensure!(m.canonical_form() == once, "second attach changed the model");
    Ok("1000 triples exact; second attach leaves the model unchanged".into())
}

fn round_trips() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x9e37_0500);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.json");
    for i in 0..500 {
        let m = random_model(&mut rng, 30);
        let back = parse(&serialize(&m), "rt.qml");
        ensure!(!back.failed(), "model {i}: serialized QML does not parse");
        ensure!(
            back.model.is_isomorphic(&m),
            "model {i}: QML round trip changed the model"
        );
        save(&m, &path).map_err(|e| e.to_string())?;
        let loaded = load(&path).map_err(|e| e.to_string())?;
        ensure!(loaded.is_isomorphic(&m), "model {i}: save/load changed the model");
        ensure!(from_json(&to_json(&m)).is_ok(), "model {i}: JSON text does not reload");
    }
    let schema = derive_schema(&MetaCatalog::standard());
    let ddl = emit_ddl(&schema).text;
    let stmts = sqlparser::parser::Parser::parse_sql(&sqlparser::dialect::AnsiDialect {}, &ddl)
        .map_err(|e| format!("sqlparser rejects the DDL: {e}"))?;
    ensure!(
        stmts.len() == schema.tables.len(),
        "{} statements for {} tables",
        stmts.len(),
        schema.tables.len()
    );
    let lathe = support::lathe();
    let data = export_instances(&lathe, &schema).map_err(|e| e.to_string())?;
    let rows = sqlparser::parser::Parser::parse_sql(&sqlparser::dialect::AnsiDialect {}, &data)
        .map_err(|e| format!("sqlparser rejects the INSERTs: {e}"))?
        .len();
    let want = lathe.entity_count() + junction_link_count(&lathe, &schema);
    ensure!(rows == want, "{rows} INSERT rows, expected {want}");
    Ok(format!(
        "500 models x 2 formats; {} tables parsed; {rows} rows = {} entities + {} junction links",
        stmts.len(),
        lathe.entity_count(),
        want - lathe.entity_count()
    ))
}

fn cli_contract() -> Result<String, String> {
    let exe = env!("CARGO_BIN_EXE_qproc");
    let cases: [(&[&str], i32); 4] = [
        (&["validate", "lathe.qml"], 0),
        (&["validate", "bad_mult.qml"], 1),
        (&["validate", "syntax_error.qml"], 1),
        (&["frobnicate"], 2),
    ];
    for (args, want) in cases {
        let out = Command::new(exe)
            .args(args)
            .current_dir(support::fixture(""))
            .output()
            .map_err(|e| e.to_string())?;
        let got = out.status.code().unwrap_or(-1);
        ensure!(got == want, "qproc {}: exit {got}, expected {want}", args.join(" "));
        if args == ["validate", "bad_mult.qml"] {
            let err = String::from_utf8_lossy(&out.stderr);
            let lines: Vec<_> = err.lines().collect();
            ensure!(lines.len() == 1 && lines[0].contains("R-MULT"), "stderr: {err}");
        }
    }
    Ok("clean 0, erroneous 1, malformed invocation 2".into())
}

fn main() {
    let criteria: [(&str, Check, Duration); 9] = [
        (
            "indicator boundary fidelity",
            indicator_boundary,
            Duration::from_secs(1),
        ),
        (
            "indicator oracle equivalence",
            indicator_oracle,
            Duration::from_secs(30),
        ),
        (
            "seven-step guide monotonicity",
            guide_monotonicity,
            Duration::from_secs(1),
        ),
        ("R-SYS rule", r_sys_rule, Duration::from_secs(1)),
        ("SPC constants", spc_constants_check, Duration::from_secs(60)),
        ("chart sanity", chart_sanity, Duration::from_secs(30)),
        ("FMEA", fmea_check, Duration::from_secs(5)),
        ("round-trips", round_trips, Duration::from_secs(60)),
        ("CLI contract", cli_contract, Duration::from_secs(5)),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > limit => Err(format!("took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        let (verdict, detail) = match &result {
            Ok(d) => ("PASS", d.as_str()),
            Err(e) => ("FAIL", e.as_str()),
        };
        println!("{verdict} [{}] {name} ({took:.2?}): {detail}", i + 1);
        failed += usize::from(result.is_err());
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
