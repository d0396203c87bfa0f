mod support;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::sample::subsequence;
use qproc_core::export::{
    derive_schema, emit_ddl, export_instances, junction_link_count, ExportError, RelationalSchema,
};
use qproc_core::{validate, EntityKind as K, MetaCatalog, QualityModel, RelationKind as R};
use rand::rngs::StdRng;
use rand::SeedableRng;
use sqlparser::ast::{SetExpr, Statement, TableConstraint, TableObject};
use sqlparser::dialect::AnsiDialect;
use sqlparser::parser::Parser;
use support::random_model;

/// Tables as sqlparser sees them: name -> (columns, foreign keys as
/// (column, referenced table)).
type ParsedTables = BTreeMap<String, (Vec<String>, Vec<(String, String)>)>;

fn parse_sql(sql: &str) -> Vec<Statement> {
    Parser::parse_sql(&AnsiDialect {}, sql).unwrap_or_else(|e| panic!("{e}\n{sql}"))
}

fn parse_ddl(sql: &str) -> (ParsedTables, Vec<String>) {
    let mut tables = ParsedTables::new();
    let mut order = Vec::new();
    for st in parse_sql(sql) {
        let Statement::CreateTable(ct) = st else {
            panic!("unexpected statement {st}");
        };
        let name = ct.name.to_string();
        let cols = ct.columns.iter().map(|c| c.name.value.clone()).collect();
        let fks = ct
            .constraints
            .iter()
            .filter_map(|c| match c {
                TableConstraint::ForeignKey {
                    columns, foreign_table, ..
                } => Some((columns[0].value.clone(), foreign_table.to_string())),
                _ => None,
            })
            .collect();
        order.push(name.clone());
        assert!(tables.insert(name, (cols, fks)).is_none(), "duplicate table");
    }
    (tables, order)
}

fn check_schema_against_catalog(catalog: &MetaCatalog, schema: &RelationalSchema) {
    let sql = emit_ddl(schema).text;
    let (tables, order) = parse_ddl(&sql);
    assert_eq!(tables.len(), schema.tables.len());
    for k in catalog.kinds() {
        let (cols, _) = &tables[&k.table_name()];
        for want in ["ID", "NAME"] {
            assert!(cols.iter().any(|c| c == want), "{k} lacks {want}");
        }
        for a in k.attributes() {
            let col = qproc_core::catalog::upper_snake(a.key);
            assert!(cols.contains(&col), "{k} lacks attribute column {col}");
        }
    }
    for r in catalog.relations() {
        assert!(schema.placements.contains_key(r), "{r} has no placement");
    }
    // Every foreign key names a real table and column, and points backwards
    // in creation order.
    let position: BTreeMap<&String, usize> = order.iter().enumerate().map(|(i, t)| (t, i)).collect();
    for (name, (cols, fks)) in &tables {
        for (col, target) in fks {
            assert!(cols.contains(col), "{name}.{col}");
            assert!(tables.contains_key(target), "{name} references missing {target}");
            assert!(position[target] <= position[name], "{name} created before {target}");
        }
    }
}

/// Parses the INSERT script and checks each foreign key value against
/// rows inserted earlier. Returns the number of rows.
fn check_instances(sql: &str, tables: &ParsedTables) -> usize {
    let mut ids: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut rows = 0;
    for st in parse_sql(sql) {
        let Statement::Insert(ins) = st else {
            panic!("unexpected statement {st}");
        };
        let TableObject::TableName(name) = &ins.table else {
            panic!("insert into a function");
        };
        let table = name.to_string();
        let (_, fks) = &tables[&table];
        let SetExpr::Values(values) = ins.source.as_ref().unwrap().body.as_ref() else {
            panic!("insert without VALUES");
        };
        for row in &values.rows {
            rows += 1;
            let cells: BTreeMap<String, String> = ins
                .columns
                .iter()
                .map(|c| c.value.clone())
                .zip(row.iter().map(|e| e.to_string()))
                .collect();
            for (col, target) in fks {
                if let Some(v) = cells.get(col).filter(|v| *v != "NULL") {
                    assert!(
                        ids.get(target).is_some_and(|s| s.contains(v)),
                        "{table}.{col} = {v} has no row in {target}"
                    );
                }
            }
            ids.entry(table.clone()).or_default().insert(cells["ID"].clone());
        }
    }
    rows
}

#[test]
fn standard_schema_is_valid_sql() {
    let catalog = MetaCatalog::standard();
    let schema = derive_schema(&catalog);
    check_schema_against_catalog(&catalog, &schema);
    let ddl = emit_ddl(&schema);
    assert!(ddl.text.starts_with("-- qproc relational schema (SQL-92)\n"));
    assert!(ddl.diagnostics.is_empty());
}

#[test]
fn fixture_exports_one_row_per_entity_and_junction_link() {
    let m = support::lathe();
    let schema = derive_schema(&MetaCatalog::standard());
    let (tables, _) = parse_ddl(&emit_ddl(&schema).text);
    let sql = export_instances(&m, &schema).unwrap();
    let rows = check_instances(&sql, &tables);
    let junction = junction_link_count(&m, &schema);
    assert_eq!(rows, m.entity_count() + junction);
    // results_from is stored on PRODUCT, so not every link has a row.
    assert!(junction < m.link_count());
    assert_eq!(
        sql.matches("INSERT INTO PRODUCT ").count(),
        m.entities_of(K::Product).count()
    );
}

#[test]
fn dirty_models_are_refused() {
    let r = qproc_core::parse(&support::fixture_text("bad_mult.qml"), "bad_mult.qml");
    let schema = derive_schema(&MetaCatalog::standard());
    let errors = validate(&r.model).iter().filter(|d| d.is_error()).count();
    assert!(errors > 0);
    assert_eq!(
        export_instances(&r.model, &schema),
        Err(ExportError::RefusedDirtyModel { errors })
    );
    assert_eq!(export_instances(&QualityModel::new("E").unwrap(), &schema).unwrap(), "");
}

#[test]
fn random_models_export_or_refuse() {
    let schema = derive_schema(&MetaCatalog::standard());
    let (tables, _) = parse_ddl(&emit_ddl(&schema).text);
    let mut rng = StdRng::seed_from_u64(0xdd1);
    let mut exported = 0;
    for _ in 0..300 {
        let m = random_model(&mut rng, 12);
        let dirty = validate(&m).iter().any(|d| d.is_error());
        match export_instances(&m, &schema) {
            Ok(sql) => {
                assert!(!dirty);
                assert_eq!(
                    check_instances(&sql, &tables),
                    m.entity_count() + junction_link_count(&m, &schema)
                );
                exported += 1;
            }
            Err(ExportError::RefusedDirtyModel { .. }) => assert!(dirty),
            Err(e) => panic!("{e}"),
        }
    }
    assert!(exported > 0, "generator never produced a clean model");
}

proptest! {
    #[test]
    fn every_sub_catalog_gives_valid_sql(
        kinds in subsequence(K::ALL.to_vec(), 0..=K::ALL.len()),
        relations in subsequence(R::ALL.to_vec(), 0..=R::ALL.len()),
    ) {
        let catalog = MetaCatalog::subset(&kinds, &relations);
        let schema = derive_schema(&catalog);
        let ddl = emit_ddl(&schema);
        if schema.tables.is_empty() {
            prop_assert!(parse_sql(&ddl.text).is_empty());
        } else {
            check_schema_against_catalog(&catalog, &schema);
        }
        prop_assert_eq!(emit_ddl(&derive_schema(&catalog)), ddl);
    }
}
