use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qproc_bench::{synthetic_plant, synthetic_series};
use qproc_core::export::{derive_schema, emit_ddl, export_instances, from_json, to_json};
use qproc_core::tools::{build_charts, detect_violations, spc_constants, SubgroupSeries};
use qproc_core::{indicator_report, parse, run_guide, serialize, validate, MetaCatalog};

fn model_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("model");
    for cells in [10, 100] {
        let model = synthetic_plant(cells);
        let qml = serialize(&model);
        let json = to_json(&model);
        group.bench_with_input(BenchmarkId::new("parse", cells), &qml, |b, t| {
            b.iter(|| parse(black_box(t), "plant.qml"))
        });
        group.bench_with_input(BenchmarkId::new("serialize", cells), &model, |b, m| {
            b.iter(|| serialize(black_box(m)))
        });
        group.bench_with_input(BenchmarkId::new("load_json", cells), &json, |b, t| {
            b.iter(|| from_json(black_box(t)))
        });
        group.bench_with_input(BenchmarkId::new("validate", cells), &model, |b, m| {
            b.iter(|| validate(black_box(m)))
        });
        group.bench_with_input(BenchmarkId::new("guide", cells), &model, |b, m| {
            b.iter(|| run_guide(black_box(m), None))
        });
        group.bench_with_input(BenchmarkId::new("indicators", cells), &model, |b, m| {
            b.iter(|| indicator_report(black_box(m)))
        });
    }
    group.finish();
}

fn export(c: &mut Criterion) {
    let catalog = MetaCatalog::standard();
    c.bench_function("export/schema_ddl", |b| {
        b.iter(|| emit_ddl(&derive_schema(black_box(&catalog))))
    });
    let schema = derive_schema(&catalog);
    let model = synthetic_plant(100);
    c.bench_function("export/instances_100", |b| {
        b.iter(|| export_instances(black_box(&model), &schema))
    });
}

fn spc(c: &mut Criterion) {
    c.bench_function("spc/constants_n5", |b| b.iter(|| spc_constants(black_box(5))));
    let series = SubgroupSeries::new(synthetic_series(1000, 5)).unwrap();
    c.bench_function("spc/charts_and_rules_1000", |b| {
        b.iter(|| {
            let charts = build_charts(black_box(&series)).unwrap();
            detect_violations(&charts, &series)
        })
    });
}

criterion_group!(benches, model_pipeline, export, spc);
criterion_main!(benches);
