//! Relational schema derived from the meta-model catalog.
//!
//! Every entity kind gets its own table holding `ID`, `NAME` and the
//! registry attributes of the kind (inherited ones included), so an
//! instance is stored as exactly one row in the table of its own kind.
//!
//! A relation end is stored as one column group per accepted kind. A kind
//! without subtypes in the catalog is referenced by a foreign key
//! `<KIND>_ID`. A kind with subtypes is stored as the pair `<KIND>_ID`,
//! `<KIND>_KIND`: the second column names the concrete kind, and with it
//! the table holding the row, so no single foreign key can cover it.
//!
//! A relation whose source is one subtype-free kind and whose target
//! multiplicity is at most one is stored as a nullable column group on the
//! source table. Every other relation gets a junction table
//! `REL_<RELATION>` keyed by the link id.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::catalog::{upper_snake, AttributeType, EntityKind, MetaCatalog, RelationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Integer,
    Text,
    Numeric,
    Boolean,
}

impl ColumnType {
    pub fn sql(self) -> &'static str {
        match self {
            ColumnType::Integer => "INTEGER",
            ColumnType::Text => "VARCHAR(1024)",
            ColumnType::Numeric => "DOUBLE PRECISION",
            ColumnType::Boolean => "SMALLINT",
        }
    }
}

impl From<AttributeType> for ColumnType {
    fn from(t: AttributeType) -> Self {
        match t {
            AttributeType::Text => ColumnType::Text,
            AttributeType::Numeric => ColumnType::Numeric,
            AttributeType::Boolean => ColumnType::Boolean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
    pub nullable: bool,
    /// Registry key when the column stores an entity attribute.
    #[serde(skip)]
    pub attribute: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForeignKey {
    pub column: String,
    pub table: String,
    pub referenced: String,
}

/// Columns that store one accepted kind of a relation end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndColumns {
    pub kind: EntityKind,
    pub id_column: String,
    /// Present when `kind` has subtypes.
    pub kind_column: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "of", rename_all = "lowercase")]
pub enum TableOrigin {
    Entity(EntityKind),
    Relation(RelationKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: String,
    pub origin: TableOrigin,
    pub columns: Vec<Column>,
    pub primary_key: String,
    pub foreign_keys: Vec<ForeignKey>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn is_junction(&self) -> bool {
        matches!(self.origin, TableOrigin::Relation(_))
    }
}

/// Where a relation's links are stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Placement {
    /// Columns on the source kind's table.
    SourceColumn { table: String, target: Vec<EndColumns> },
    Junction {
        table: String,
        source: Vec<EndColumns>,
        target: Vec<EndColumns>,
    },
}

impl Placement {
    pub fn table(&self) -> &str {
        match self {
            Placement::SourceColumn { table, .. } | Placement::Junction { table, .. } => table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RelationalSchema {
    /// Entity tables in catalog order, then junction tables in relation
    /// order.
    pub tables: Vec<Table>,
    pub placements: BTreeMap<RelationKind, Placement>,
}

impl RelationalSchema {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn entity_table(&self, kind: EntityKind) -> Option<&Table> {
        self.tables.iter().find(|t| t.origin == TableOrigin::Entity(kind))
    }

    pub fn junction_tables(&self) -> impl Iterator<Item = &Table> {
        self.tables.iter().filter(|t| t.is_junction())
    }
}

fn has_subtypes(catalog: &MetaCatalog, kind: EntityKind) -> bool {
    catalog.kinds().iter().any(|k| *k != kind && k.is_a(kind))
}

fn end_columns(catalog: &MetaCatalog, kinds: &[EntityKind], prefix: &str) -> Vec<EndColumns> {
    kinds
        .iter()
        .map(|k| {
            let base = format!("{prefix}{}", k.table_name());
            EndColumns {
                kind: *k,
                id_column: format!("{base}_ID"),
                kind_column: has_subtypes(catalog, *k).then(|| format!("{base}_KIND")),
            }
        })
        .collect()
}

fn push_end(catalog: &MetaCatalog, table: &mut Table, groups: &[EndColumns], nullable: bool) {
    for g in groups {
        table.columns.push(Column {
            name: g.id_column.clone(),
            ty: ColumnType::Integer,
            nullable,
            attribute: None,
        });
        if let Some(kc) = &g.kind_column {
            table.columns.push(Column {
                name: kc.clone(),
                ty: ColumnType::Text,
                nullable,
                attribute: None,
            });
        } else if catalog.contains_kind(g.kind) {
            table.foreign_keys.push(ForeignKey {
                column: g.id_column.clone(),
                table: g.kind.table_name(),
                referenced: "ID".into(),
            });
        }
    }
}

fn entity_table(kind: EntityKind) -> Table {
    let mut columns = vec![
        Column {
            name: "ID".into(),
            ty: ColumnType::Integer,
            nullable: false,
            attribute: None,
        },
        Column {
            name: "NAME".into(),
            ty: ColumnType::Text,
            nullable: false,
            attribute: None,
        },
    ];
    for a in kind.attributes() {
        columns.push(Column {
            name: upper_snake(a.key),
            ty: a.ty.into(),
            nullable: true,
            attribute: Some(a.key),
        });
    }
    Table {
        name: kind.table_name(),
        origin: TableOrigin::Entity(kind),
        columns,
        primary_key: "ID".into(),
        foreign_keys: Vec::new(),
    }
}

fn stored_on_source(catalog: &MetaCatalog, rel: RelationKind) -> bool {
    matches!(rel.source_kinds(), [k] if !has_subtypes(catalog, *k)) && rel.target_mult().is_single_valued()
}

pub fn derive_schema(catalog: &MetaCatalog) -> RelationalSchema {
    let mut tables: Vec<Table> = catalog.kinds().iter().map(|k| entity_table(*k)).collect();
    let mut placements = BTreeMap::new();
    let mut junctions = Vec::new();

    for rel in catalog.relations().iter().copied() {
        if stored_on_source(catalog, rel) {
            let source = rel.source_kinds()[0];
            let table = tables
                .iter_mut()
                .find(|t| t.origin == TableOrigin::Entity(source))
                .expect("catalog subsets keep relation ends");
            let mut target = end_columns(catalog, rel.target_kinds(), "");
            let clashes = target.iter().any(|g| {
                table.column(&g.id_column).is_some()
                    || g.kind_column.as_ref().is_some_and(|c| table.column(c).is_some())
            });
            if clashes {
                target = end_columns(catalog, rel.target_kinds(), &format!("{}_", upper_snake(rel.name())));
            }
            push_end(catalog, table, &target, true);
            placements.insert(
                rel,
                Placement::SourceColumn {
                    table: table.name.clone(),
                    target,
                },
            );
            continue;
        }

        let name = format!("REL_{}", upper_snake(rel.name()));
        let mut source = end_columns(catalog, rel.source_kinds(), "");
        let mut target = end_columns(catalog, rel.target_kinds(), "");
        let names = |gs: &[EndColumns]| -> Vec<String> {
            gs.iter()
                .flat_map(|g| std::iter::once(g.id_column.clone()).chain(g.kind_column.clone()))
                .collect()
        };
        let (sn, tn) = (names(&source), names(&target));
        if sn.iter().any(|n| tn.contains(n)) {
            source = end_columns(catalog, rel.source_kinds(), "SOURCE_");
            target = end_columns(catalog, rel.target_kinds(), "TARGET_");
        }
        let mut table = Table {
            name: name.clone(),
            origin: TableOrigin::Relation(rel),
            columns: vec![Column {
                name: "ID".into(),
                ty: ColumnType::Integer,
                nullable: false,
                attribute: None,
            }],
            primary_key: "ID".into(),
            foreign_keys: Vec::new(),
        };
        push_end(catalog, &mut table, &source, source.len() > 1);
        push_end(catalog, &mut table, &target, target.len() > 1);
        placements.insert(
            rel,
            Placement::Junction {
                table: name,
                source,
                target,
            },
        );
        junctions.push(table);
    }
    tables.extend(junctions);
    RelationalSchema { tables, placements }
}
