//! INSERT statements for the instances of a model.

use std::fmt::Write;

use thiserror::Error;

use crate::analysis::validate;
use crate::diagnostic::has_errors;
use crate::model::{Entity, EntityId, QualityModel, Scalar};

use super::ddl::dependency_order;
use super::schema::{EndColumns, Placement, RelationalSchema, TableOrigin};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("model has {errors} error diagnostic(s); fix them before exporting")]
    RefusedDirtyModel { errors: usize },
    #[error("schema has no table for {0}")]
    MissingTable(String),
}

fn text_literal(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn literal(v: &Scalar) -> String {
    match v {
        Scalar::Bool(b) => u8::from(*b).to_string(),
        Scalar::Number(n) => n.to_string(),
        Scalar::Text(s) => text_literal(s),
    }
}

/// Values for the column group matching `entity`, NULL for the others.
fn end_values(groups: &[EndColumns], entity: &Entity, row: &mut Vec<(String, String)>) {
    for g in groups {
        let hit = entity.kind.is_a(g.kind);
        let id = if hit { entity.id.0.to_string() } else { "NULL".into() };
        row.push((g.id_column.clone(), id));
        if let Some(kc) = &g.kind_column {
            let kind = if hit {
                text_literal(entity.kind.name())
            } else {
                "NULL".into()
            };
            row.push((kc.clone(), kind));
        }
    }
}

fn insert(out: &mut String, table: &str, row: &[(String, String)]) {
    let cols: Vec<&str> = row.iter().map(|(c, _)| c.as_str()).collect();
    let vals: Vec<&str> = row.iter().map(|(_, v)| v.as_str()).collect();
    let _ = writeln!(
        out,
        "INSERT INTO {table} ({}) VALUES ({});",
        cols.join(", "),
        vals.join(", ")
    );
}

/// One INSERT per entity (into the table of its kind) and one per link
/// stored in a junction table. Links stored as source-table columns fill
/// those columns instead. Tables are filled in DDL order so that every
/// referenced row exists first.
pub fn export_instances(model: &QualityModel, schema: &RelationalSchema) -> Result<String, ExportError> {
    let diagnostics = validate(model);
    if has_errors(&diagnostics) {
        let errors = diagnostics.iter().filter(|d| d.is_error()).count();
        return Err(ExportError::RefusedDirtyModel { errors });
    }
    for e in model.entities() {
        if schema.entity_table(e.kind).is_none() {
            return Err(ExportError::MissingTable(e.kind.to_string()));
        }
    }
    for l in model.links() {
        if !schema.placements.contains_key(&l.relation) {
            return Err(ExportError::MissingTable(l.relation.to_string()));
        }
    }
    let entity = |id: EntityId| model.entity(id).expect("links reference live entities");

    let mut out = String::new();
    let (order, _) = dependency_order(schema);
    for i in order {
        let table = &schema.tables[i];
        match table.origin {
            TableOrigin::Entity(kind) => {
                for e in model.entities().filter(|e| e.kind == kind) {
                    let mut row = vec![
                        ("ID".to_string(), e.id.0.to_string()),
                        ("NAME".into(), text_literal(&e.name)),
                    ];
                    for c in &table.columns {
                        if let Some(key) = c.attribute {
                            let v = e.attributes.get(key).map_or_else(|| "NULL".into(), literal);
                            row.push((c.name.clone(), v));
                        }
                    }
                    for (rel, placement) in &schema.placements {
                        if let Placement::SourceColumn { table: t, target } = placement {
                            if *t != table.name {
                                continue;
                            }
                            match model.outgoing(e.id, *rel).next() {
                                Some(link) => end_values(target, entity(link.target), &mut row),
                                None => {
                                    for g in target {
                                        row.push((g.id_column.clone(), "NULL".into()));
                                        if let Some(kc) = &g.kind_column {
                                            row.push((kc.clone(), "NULL".into()));
                                        }
                                    }
                                }
                            }
                        }
                    }
                    insert(&mut out, &table.name, &row);
                }
            }
            TableOrigin::Relation(rel) => {
                let Some(Placement::Junction { source, target, .. }) = schema.placements.get(&rel) else {
                    continue;
                };
                for l in model.links().filter(|l| l.relation == rel) {
                    let mut row = vec![("ID".to_string(), l.id.0.to_string())];
                    end_values(source, entity(l.source), &mut row);
                    end_values(target, entity(l.target), &mut row);
                    insert(&mut out, &table.name, &row);
                }
            }
        }
    }
    Ok(out)
}

/// Number of links a schema stores in junction tables.
pub fn junction_link_count(model: &QualityModel, schema: &RelationalSchema) -> usize {
    model
        .links()
        .filter(|l| matches!(schema.placements.get(&l.relation), Some(Placement::Junction { .. })))
        .count()
}
