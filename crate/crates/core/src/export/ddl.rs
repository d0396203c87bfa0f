//! SQL-92 DDL for a derived schema.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::diagnostic::{Diagnostic, Subject};
use crate::rules;

use super::schema::{ForeignKey, RelationalSchema, Table};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ddl {
    pub text: String,
    pub diagnostics: Vec<Diagnostic>,
}

const HEADER: &str = "-- qproc relational schema (SQL-92)\n";

/// Orders tables so that referenced tables come first, keeping schema
/// order among independent tables. Returns the order and the foreign keys
/// left unsatisfied because they close a cycle.
pub(crate) fn dependency_order(schema: &RelationalSchema) -> (Vec<usize>, Vec<(usize, ForeignKey)>) {
    let index: HashMap<&str, usize> = schema
        .tables
        .iter()
        .enumerate()
        .map(|(i, t)| (t.name.as_str(), i))
        .collect();
    let deps = |i: usize| -> BTreeSet<usize> {
        schema.tables[i]
            .foreign_keys
            .iter()
            .filter_map(|fk| index.get(fk.table.as_str()).copied())
            .filter(|d| *d != i)
            .collect()
    };
    let mut placed = vec![false; schema.tables.len()];
    let mut order = Vec::with_capacity(schema.tables.len());
    let mut deferred = Vec::new();
    while order.len() < schema.tables.len() {
        let ready = (0..schema.tables.len()).find(|&i| !placed[i] && deps(i).iter().all(|d| placed[*d]));
        let next = match ready {
            Some(i) => i,
            None => {
                // Break the cycle at the first remaining table; its keys to
                // unplaced tables are added after all tables exist.
                let i = (0..schema.tables.len()).find(|&i| !placed[i]).expect("tables remain");
                for fk in &schema.tables[i].foreign_keys {
                    if let Some(&d) = index.get(fk.table.as_str()) {
                        if d != i && !placed[d] {
                            deferred.push((i, fk.clone()));
                        }
                    }
                }
                i
            }
        };
        placed[next] = true;
        order.push(next);
    }
    (order, deferred)
}

fn create_table(out: &mut String, table: &Table, skip: &[&ForeignKey]) {
    let mut lines: Vec<String> = table
        .columns
        .iter()
        .map(|c| {
            let null = if c.nullable { "" } else { " NOT NULL" };
            format!("  {} {}{null}", c.name, c.ty.sql())
        })
        .collect();
    lines.push(format!("  PRIMARY KEY ({})", table.primary_key));
    for fk in &table.foreign_keys {
        if !skip.contains(&fk) {
            lines.push(format!(
                "  FOREIGN KEY ({}) REFERENCES {} ({})",
                fk.column, fk.table, fk.referenced
            ));
        }
    }
    let _ = writeln!(out, "\nCREATE TABLE {} (\n{}\n);", table.name, lines.join(",\n"));
}

/// CREATE TABLE statements in dependency order. Foreign keys that would
/// close a cycle are left out of the statements, listed as comments at the
/// end, and reported as D-CYC-001 warnings.
pub fn emit_ddl(schema: &RelationalSchema) -> Ddl {
    let (order, deferred) = dependency_order(schema);
    let mut text = String::from(HEADER);
    for i in order {
        let skip: Vec<&ForeignKey> = deferred.iter().filter(|(t, _)| *t == i).map(|(_, fk)| fk).collect();
        create_table(&mut text, &schema.tables[i], &skip);
    }
    let mut diagnostics = Vec::new();
    if !deferred.is_empty() {
        text.push_str("\n-- deferred foreign keys (cycle):\n");
        for (i, fk) in &deferred {
            let table = &schema.tables[*i].name;
            let _ = writeln!(
                text,
                "-- ALTER TABLE {table} ADD FOREIGN KEY ({}) REFERENCES {} ({});",
                fk.column, fk.table, fk.referenced
            );
            diagnostics.push(rules::D_FK_CYCLE.diag(
                Subject::Model,
                format!(
                    "{table}.{} references {} inside a cycle; constraint deferred",
                    fk.column, fk.table
                ),
            ));
        }
    }
    Ddl { text, diagnostics }
}
