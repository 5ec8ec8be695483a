//! The meta-data tier.
//!
//! The catalog stores table definitions and single-column constraints. It is
//! exposed to readers through relational views shaped like the SQL-92
//! `INFORMATION_SCHEMA` (`tables`, `columns`, `table_constraints`,
//! `key_column_usage`, `referential_constraints`) and through the two joined
//! views the dialog layer is built on: [`info_columns_joined`] and
//! [`info_relations`].
//!
//! Schema changes are applied inside a write transaction and are atomic: a
//! change that fails leaves both the catalog and the row data untouched.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compare_values, ConstraintKind, DataType, Value};
use crate::storage::{Database, Snapshot, TableRows};

/// Words of the filter/order language; a column with one of these names could
/// never be referenced from a filter, so they are refused as column names.
pub const RESERVED_COLUMN_NAMES: &[&str] = &[
    "and", "or", "not", "is", "null", "like", "true", "false", "datetime", "asc", "desc",
];

const MAX_IDENTIFIER_LEN: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnDef {
    pub name: String,
    /// 1-based, contiguous within a table.
    pub ordinal_position: u32,
    pub data_type: DataType,
    /// Only for varchar: -1 (unlimited) or a positive bound.
    pub character_maximum_length: Option<i64>,
    pub is_nullable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintDef {
    pub constraint_name: String,
    pub constraint_type: ConstraintKind,
    pub table_name: String,
    pub column_name: String,
    /// For foreign keys: the PRIMARY KEY or UNIQUE constraint being referenced.
    pub referenced_constraint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<ColumnDef>,
}

impl TableDef {
    pub fn column(&self, name: &str) -> Option<&ColumnDef> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}

/// Schema definitions of every table plus the database-wide constraint set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    pub(crate) tables: BTreeMap<String, TableDef>,
    pub(crate) constraints: BTreeMap<String, ConstraintDef>,
}

impl Catalog {
    pub fn table(&self, name: &str) -> Option<&TableDef> {
        self.tables.get(name)
    }

    /// Tables in name order.
    pub fn tables(&self) -> impl Iterator<Item = &TableDef> {
        self.tables.values()
    }

    /// Constraints in name order.
    pub fn constraints(&self) -> impl Iterator<Item = &ConstraintDef> {
        self.constraints.values()
    }

    pub fn constraint(&self, name: &str) -> Option<&ConstraintDef> {
        self.constraints.get(name)
    }

    pub fn constraints_on<'a>(
        &'a self,
        table: &'a str,
        column: &'a str,
    ) -> impl Iterator<Item = &'a ConstraintDef> + 'a {
        self.constraints
            .values()
            .filter(move |c| c.table_name == table && c.column_name == column)
    }

    pub fn primary_key(&self, table: &str) -> Option<&ConstraintDef> {
        self.constraints
            .values()
            .find(|c| c.table_name == table && c.constraint_type == ConstraintKind::PrimaryKey)
    }

    /// The (table, column) a foreign key constraint points at.
    pub fn fk_target(&self, fk: &ConstraintDef) -> Option<(&str, &str)> {
        let target = self.constraints.get(fk.referenced_constraint.as_deref()?)?;
        Some((&target.table_name, &target.column_name))
    }

    /// Foreign keys whose referenced constraint is `key`.
    pub fn referencing(&self, key: &str) -> impl Iterator<Item = &ConstraintDef> + '_ {
        let key = key.to_owned();
        self.constraints
            .values()
            .filter(move |c| c.referenced_constraint.as_deref() == Some(key.as_str()))
    }
}

/// Target of a foreign key in a schema change document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyRef {
    pub table: String,
    pub column: String,
}

/// Column definition inside a schema change document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub data_type: DataType,
    /// varchar only; -1 or absent means unlimited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_length: Option<i64>,
    #[serde(default = "default_true")]
    pub nullable: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub primary_key: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub unique: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub check: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub references: Option<KeyRef>,
}

fn default_true() -> bool {
    true
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, data_type: DataType) -> Self {
        ColumnSpec {
            name: name.into(),
            data_type,
            max_length: None,
            nullable: true,
            primary_key: false,
            unique: false,
            check: false,
            references: None,
        }
    }

    pub fn max_length(mut self, n: i64) -> Self {
        self.max_length = Some(n);
        self
    }

    pub fn not_null(mut self) -> Self {
        self.nullable = false;
        self
    }

    pub fn primary_key(mut self) -> Self {
        self.primary_key = true;
        self.nullable = false;
        self
    }

    pub fn unique(mut self) -> Self {
        self.unique = true;
        self
    }

    pub fn check(mut self) -> Self {
        self.check = true;
        self
    }

    pub fn references(mut self, table: impl Into<String>, column: impl Into<String>) -> Self {
        self.references = Some(KeyRef {
            table: table.into(),
            column: column.into(),
        });
        self
    }
}

/// A runtime DDL statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SchemaChange {
    CreateTable {
        table: String,
        columns: Vec<ColumnSpec>,
    },
    DropTable {
        table: String,
    },
    AddColumn {
        table: String,
        column: ColumnSpec,
    },
    DropColumn {
        table: String,
        column: String,
    },
    AddForeignKey {
        table: String,
        column: String,
        references: KeyRef,
    },
    DropConstraint {
        constraint: String,
    },
}

/// The customer/order reference schema used by fixtures and the sample seed:
///
/// ```text
/// customer(id int PRIMARY KEY, name varchar(100) NOT NULL)
/// order(id int PRIMARY KEY, customer_id int NOT NULL -> customer.id,
///       amount real, note varchar unlimited)
/// ```
pub fn reference_schema() -> Vec<SchemaChange> {
    vec![
        SchemaChange::CreateTable {
            table: "customer".into(),
            columns: vec![
                ColumnSpec::new("id", DataType::Int).primary_key(),
                ColumnSpec::new("name", DataType::Varchar)
                    .max_length(100)
                    .not_null(),
            ],
        },
        SchemaChange::CreateTable {
            table: "order".into(),
            columns: vec![
                ColumnSpec::new("id", DataType::Int).primary_key(),
                ColumnSpec::new("customer_id", DataType::Int)
                    .not_null()
                    .references("customer", "id"),
                ColumnSpec::new("amount", DataType::Real),
                ColumnSpec::new("note", DataType::Varchar),
            ],
        },
    ]
}

pub fn primary_key_name(table: &str) -> String {
    format!("pk_{table}")
}

pub fn foreign_key_name(table: &str, column: &str) -> String {
    format!("fk_{table}_{column}")
}

pub fn unique_name(table: &str, column: &str) -> String {
    format!("uq_{table}_{column}")
}

pub fn check_name(table: &str, column: &str) -> String {
    format!("ck_{table}_{column}")
}

pub fn validate_identifier(name: &str) -> Result<()> {
    let mut chars = name.chars();
    let ok = name.len() <= MAX_IDENTIFIER_LEN
        && chars
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidIdentifier(name.to_owned()))
    }
}

fn validate_column_name(name: &str) -> Result<()> {
    validate_identifier(name)?;
    if RESERVED_COLUMN_NAMES
        .iter()
        .any(|w| w.eq_ignore_ascii_case(name))
    {
        return Err(Error::InvalidIdentifier(name.to_owned()));
    }
    Ok(())
}

/// Applies a schema change atomically: on error `db` is left exactly as it was.
pub(crate) fn apply(db: &mut Database, change: &SchemaChange) -> Result<()> {
    let backup = db.clone();
    let result = apply_inner(db, change);
    if result.is_err() {
        *db = backup;
    }
    result
}

fn apply_inner(db: &mut Database, change: &SchemaChange) -> Result<()> {
    match change {
        SchemaChange::CreateTable { table, columns } => create_table(db, table, columns),
        SchemaChange::DropTable { table } => drop_table(db, table),
        SchemaChange::AddColumn { table, column } => add_column(db, table, column),
        SchemaChange::DropColumn { table, column } => drop_column(db, table, column),
        SchemaChange::AddForeignKey {
            table,
            column,
            references,
        } => add_foreign_key(db, table, column, references),
        SchemaChange::DropConstraint { constraint } => drop_constraint(db, constraint),
    }
}

fn column_def(spec: &ColumnSpec, ordinal: u32) -> Result<ColumnDef> {
    validate_column_name(&spec.name)?;
    let character_maximum_length = match (spec.data_type, spec.max_length) {
        (DataType::Varchar, None) => Some(-1),
        (DataType::Varchar, Some(n)) if n == -1 || n >= 1 => Some(n),
        (DataType::Varchar, Some(n)) => {
            return Err(Error::InvalidSchema(format!(
                "max_length of '{}' must be -1 or positive, got {n}",
                spec.name
            )))
        }
        (_, None) => None,
        (t, Some(_)) => {
            return Err(Error::InvalidSchema(format!(
                "max_length is only valid for varchar, '{}' is {t}",
                spec.name
            )))
        }
    };
    Ok(ColumnDef {
        name: spec.name.clone(),
        ordinal_position: ordinal,
        data_type: spec.data_type,
        character_maximum_length,
        is_nullable: spec.nullable && !spec.primary_key,
    })
}

fn insert_constraint(db: &mut Database, def: ConstraintDef) -> Result<()> {
    if db.catalog.constraints.contains_key(&def.constraint_name) {
        return Err(Error::DuplicateConstraint(def.constraint_name));
    }
    db.catalog
        .constraints
        .insert(def.constraint_name.clone(), def);
    Ok(())
}

/// PRIMARY KEY / UNIQUE / CHECK constraints declared inline on a column.
fn add_inline_constraints(db: &mut Database, table: &str, spec: &ColumnSpec) -> Result<()> {
    if spec.primary_key {
        if db.catalog.primary_key(table).is_some() {
            return Err(Error::DuplicatePrimaryKey {
                table: table.to_owned(),
            });
        }
        insert_constraint(
            db,
            ConstraintDef {
                constraint_name: primary_key_name(table),
                constraint_type: ConstraintKind::PrimaryKey,
                table_name: table.to_owned(),
                column_name: spec.name.clone(),
                referenced_constraint: None,
            },
        )?;
    }
    for (flag, kind, name) in [
        (
            spec.unique,
            ConstraintKind::Unique,
            unique_name(table, &spec.name),
        ),
        (
            spec.check,
            ConstraintKind::Check,
            check_name(table, &spec.name),
        ),
    ] {
        if flag {
            insert_constraint(
                db,
                ConstraintDef {
                    constraint_name: name,
                    constraint_type: kind,
                    table_name: table.to_owned(),
                    column_name: spec.name.clone(),
                    referenced_constraint: None,
                },
            )?;
        }
    }
    Ok(())
}

fn create_table(db: &mut Database, table: &str, columns: &[ColumnSpec]) -> Result<()> {
    validate_identifier(table)?;
    if db.catalog.tables.contains_key(table) {
        return Err(Error::DuplicateTable(table.to_owned()));
    }
    if columns.is_empty() {
        return Err(Error::InvalidSchema(format!(
            "table '{table}' needs at least one column"
        )));
    }
    let mut defs: Vec<ColumnDef> = Vec::with_capacity(columns.len());
    for (i, spec) in columns.iter().enumerate() {
        if defs.iter().any(|d| d.name == spec.name) {
            return Err(Error::DuplicateColumn {
                table: table.to_owned(),
                column: spec.name.clone(),
            });
        }
        defs.push(column_def(spec, i as u32 + 1)?);
    }
    db.catalog.tables.insert(
        table.to_owned(),
        TableDef {
            name: table.to_owned(),
            columns: defs,
        },
    );
    db.tables
        .insert(table.to_owned(), Arc::new(TableRows::new()));
    for spec in columns {
        add_inline_constraints(db, table, spec)?;
    }
    // Foreign keys last so that a table may reference its own key.
    for spec in columns {
        if let Some(target) = &spec.references {
            add_foreign_key(db, table, &spec.name, target)?;
        }
    }
    Ok(())
}

fn drop_table(db: &mut Database, table: &str) -> Result<()> {
    if !db.catalog.tables.contains_key(table) {
        return Err(Error::UnknownTable(table.to_owned()));
    }
    let own_keys: Vec<String> = db
        .catalog
        .constraints()
        .filter(|c| c.table_name == table && c.constraint_type.is_key())
        .map(|c| c.constraint_name.clone())
        .collect();
    for key in &own_keys {
        if let Some(fk) = db
            .catalog
            .referencing(key)
            .find(|fk| fk.table_name != table)
        {
            return Err(Error::TableReferenced {
                table: table.to_owned(),
                constraint: fk.constraint_name.clone(),
            });
        }
    }
    db.catalog.constraints.retain(|_, c| c.table_name != table);
    db.catalog.tables.remove(table);
    db.tables.remove(table);
    Ok(())
}

fn add_column(db: &mut Database, table: &str, spec: &ColumnSpec) -> Result<()> {
    let def = db
        .catalog
        .tables
        .get(table)
        .ok_or_else(|| Error::UnknownTable(table.to_owned()))?;
    if def.column(&spec.name).is_some() {
        return Err(Error::DuplicateColumn {
            table: table.to_owned(),
            column: spec.name.clone(),
        });
    }
    let column = column_def(spec, def.columns.len() as u32 + 1)?;
    let populated = !db.tables[table].rows.is_empty();
    if populated && !column.is_nullable {
        return Err(Error::NotNullOnPopulated {
            table: table.to_owned(),
            column: spec.name.clone(),
        });
    }
    db.catalog
        .tables
        .get_mut(table)
        .expect("checked above")
        .columns
        .push(column);
    if populated {
        let rows = Arc::make_mut(
            db.tables
                .get_mut(table)
                .expect("rows exist for every table"),
        );
        for row in &mut rows.rows {
            row.values.push(Value::Null);
        }
    }
    add_inline_constraints(db, table, spec)?;
    if let Some(target) = &spec.references {
        add_foreign_key(db, table, &spec.name, target)?;
    }
    Ok(())
}

fn drop_column(db: &mut Database, table: &str, column: &str) -> Result<()> {
    let def = db
        .catalog
        .tables
        .get(table)
        .ok_or_else(|| Error::UnknownTable(table.to_owned()))?;
    let index = def
        .column_index(column)
        .ok_or_else(|| Error::UnknownColumn {
            table: table.to_owned(),
            column: column.to_owned(),
        })?;
    if let Some(c) = db.catalog.constraints_on(table, column).next() {
        return Err(Error::ConstraintInUse {
            constraint: c.constraint_name.clone(),
            reason: format!("drop it before dropping column '{table}.{column}'"),
        });
    }
    if def.columns.len() == 1 {
        return Err(Error::InvalidSchema(format!(
            "cannot drop the only column of '{table}'"
        )));
    }
    let def = db.catalog.tables.get_mut(table).expect("checked above");
    def.columns.remove(index);
    for (i, c) in def.columns.iter_mut().enumerate() {
        c.ordinal_position = i as u32 + 1;
    }
    let rows = Arc::make_mut(
        db.tables
            .get_mut(table)
            .expect("rows exist for every table"),
    );
    for row in &mut rows.rows {
        row.values.remove(index);
    }
    Ok(())
}

fn add_foreign_key(db: &mut Database, table: &str, column: &str, target: &KeyRef) -> Result<()> {
    let def = db
        .catalog
        .table(table)
        .ok_or_else(|| Error::UnknownTable(table.to_owned()))?;
    let index = def
        .column_index(column)
        .ok_or_else(|| Error::UnknownColumn {
            table: table.to_owned(),
            column: column.to_owned(),
        })?;
    let fk_type = def.columns[index].data_type;
    let target_def = db
        .catalog
        .table(&target.table)
        .ok_or_else(|| Error::UnknownTable(target.table.clone()))?;
    let target_index =
        target_def
            .column_index(&target.column)
            .ok_or_else(|| Error::UnknownColumn {
                table: target.table.clone(),
                column: target.column.clone(),
            })?;
    let pk_type = target_def.columns[target_index].data_type;
    // Prefer the primary key when a column is both PRIMARY KEY and UNIQUE.
    let key = db
        .catalog
        .constraints_on(&target.table, &target.column)
        .filter(|c| c.constraint_type.is_key())
        .min_by_key(|c| c.constraint_type)
        .ok_or_else(|| Error::TargetNotKey {
            table: target.table.clone(),
            column: target.column.clone(),
        })?
        .constraint_name
        .clone();
    if fk_type != pk_type {
        return Err(Error::TypeMismatchFk { fk_type, pk_type });
    }
    let name = foreign_key_name(table, column);
    if db.catalog.constraints.contains_key(&name) {
        return Err(Error::DuplicateConstraint(name));
    }
    // Existing data must already satisfy the new reference.
    let referenced = &db.tables[&target.table].rows;
    for row in &db.tables[table].rows {
        let v = &row.values[index];
        if v.is_null() {
            continue;
        }
        let found = referenced
            .iter()
            .any(|r| compare_values(&r.values[target_index], v) == Some(std::cmp::Ordering::Equal));
        if !found {
            return Err(Error::ForeignKeyViolation {
                table: table.to_owned(),
                column: column.to_owned(),
                value: v.to_string(),
            });
        }
    }
    insert_constraint(
        db,
        ConstraintDef {
            constraint_name: name,
            constraint_type: ConstraintKind::ForeignKey,
            table_name: table.to_owned(),
            column_name: column.to_owned(),
            referenced_constraint: Some(key),
        },
    )
}

fn drop_constraint(db: &mut Database, name: &str) -> Result<()> {
    if !db.catalog.constraints.contains_key(name) {
        return Err(Error::UnknownConstraint(name.to_owned()));
    }
    if let Some(fk) = db.catalog.referencing(name).next() {
        return Err(Error::ConstraintInUse {
            constraint: name.to_owned(),
            reason: format!("referenced by foreign key '{}'", fk.constraint_name),
        });
    }
    db.catalog.constraints.remove(name);
    Ok(())
}

// ---------------------------------------------------------------------------
// INFORMATION_SCHEMA-shaped views

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TablesRow {
    pub table_name: String,
    pub table_type: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnsRow {
    pub table_name: String,
    pub column_name: String,
    pub ordinal_position: u32,
    pub data_type: DataType,
    pub is_nullable: &'static str,
    pub character_maximum_length: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableConstraintsRow {
    pub constraint_name: String,
    pub table_name: String,
    pub constraint_type: ConstraintKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeyColumnUsageRow {
    pub constraint_name: String,
    pub table_name: String,
    pub column_name: String,
    pub ordinal_position: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferentialConstraintsRow {
    pub constraint_name: String,
    pub unique_constraint_name: String,
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "YES"
    } else {
        "NO"
    }
}

impl Catalog {
    pub fn tables_view(&self) -> Vec<TablesRow> {
        self.tables
            .keys()
            .map(|name| TablesRow {
                table_name: name.clone(),
                table_type: "BASE TABLE",
            })
            .collect()
    }

    pub fn columns_view(&self) -> Vec<ColumnsRow> {
        self.tables
            .values()
            .flat_map(|t| {
                t.columns.iter().map(move |c| ColumnsRow {
                    table_name: t.name.clone(),
                    column_name: c.name.clone(),
                    ordinal_position: c.ordinal_position,
                    data_type: c.data_type,
                    is_nullable: yes_no(c.is_nullable),
                    character_maximum_length: c.character_maximum_length,
                })
            })
            .collect()
    }

    pub fn table_constraints_view(&self) -> Vec<TableConstraintsRow> {
        self.constraints
            .values()
            .map(|c| TableConstraintsRow {
                constraint_name: c.constraint_name.clone(),
                table_name: c.table_name.clone(),
                constraint_type: c.constraint_type,
            })
            .collect()
    }

    /// Every constraint is single-column, so `ordinal_position` is always 1.
    pub fn key_column_usage_view(&self) -> Vec<KeyColumnUsageRow> {
        self.constraints
            .values()
            .map(|c| KeyColumnUsageRow {
                constraint_name: c.constraint_name.clone(),
                table_name: c.table_name.clone(),
                column_name: c.column_name.clone(),
                ordinal_position: 1,
            })
            .collect()
    }

    pub fn referential_constraints_view(&self) -> Vec<ReferentialConstraintsRow> {
        self.constraints
            .values()
            .filter_map(|c| {
                Some(ReferentialConstraintsRow {
                    constraint_name: c.constraint_name.clone(),
                    unique_constraint_name: c.referenced_constraint.clone()?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfoTableRow {
    pub table_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfoColumnRow {
    pub column_name: String,
    pub table_name: String,
    pub data_type: DataType,
    pub is_nullable: &'static str,
    pub character_maximum_length: Option<i64>,
    pub constraint_type: Option<ConstraintKind>,
    pub pk_table_name: Option<String>,
    pub pk_column_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfoRelationRow {
    pub fk_table_name: String,
    pub fk_column_name: String,
    pub pk_column_name: String,
}

/// Base tables, name-ascending.
pub fn info_tables(snapshot: &Snapshot) -> Vec<InfoTableRow> {
    snapshot
        .catalog()
        .tables_view()
        .into_iter()
        .filter(|t| t.table_type == "BASE TABLE")
        .map(|t| InfoTableRow {
            table_name: t.table_name,
        })
        .collect()
}

/// `columns LEFT JOIN key_column_usage LEFT JOIN table_constraints`, one row per
/// (column, constraint) pair in ordinal order. For foreign keys the referenced
/// table and column are resolved through `referential_constraints`.
pub fn info_columns_joined(snapshot: &Snapshot, table: &str) -> Vec<InfoColumnRow> {
    let catalog = snapshot.catalog();
    let mut columns: Vec<ColumnsRow> = catalog
        .columns_view()
        .into_iter()
        .filter(|c| c.table_name == table)
        .collect();
    columns.sort_by_key(|c| c.ordinal_position);
    let usage = catalog.key_column_usage_view();
    let constraints = catalog.table_constraints_view();
    let referential = catalog.referential_constraints_view();

    let mut out = Vec::new();
    for col in columns {
        let mut matched: Vec<(&KeyColumnUsageRow, Option<&TableConstraintsRow>)> = usage
            .iter()
            .filter(|k| k.column_name == col.column_name && k.table_name == col.table_name)
            .map(|k| {
                let tc = constraints
                    .iter()
                    .find(|tc| tc.constraint_name == k.constraint_name);
                (k, tc)
            })
            .collect();
        matched.sort_by(|a, b| {
            let kind = |x: &(&KeyColumnUsageRow, Option<&TableConstraintsRow>)| {
                x.1.map(|tc| tc.constraint_type)
            };
            kind(a)
                .cmp(&kind(b))
                .then_with(|| a.0.constraint_name.cmp(&b.0.constraint_name))
        });
        let base = |constraint_type, pk_table_name, pk_column_name| InfoColumnRow {
            column_name: col.column_name.clone(),
            table_name: col.table_name.clone(),
            data_type: col.data_type,
            is_nullable: col.is_nullable,
            character_maximum_length: col.character_maximum_length,
            constraint_type,
            pk_table_name,
            pk_column_name,
        };
        if matched.is_empty() {
            out.push(base(None, None, None));
            continue;
        }
        for (k, tc) in matched {
            let target = referential
                .iter()
                .find(|r| r.constraint_name == k.constraint_name)
                .and_then(|r| {
                    usage
                        .iter()
                        .find(|u| u.constraint_name == r.unique_constraint_name)
                });
            out.push(base(
                tc.map(|tc| tc.constraint_type),
                target.map(|u| u.table_name.clone()),
                target.map(|u| u.column_name.clone()),
            ));
        }
    }
    out
}

/// Foreign keys referencing `table`, following the join chain
/// `key_column_usage → table_constraints → referential_constraints →
/// table_constraints → key_column_usage`, ordered by referencing table then column.
pub fn info_relations(snapshot: &Snapshot, table: &str) -> Vec<InfoRelationRow> {
    let catalog = snapshot.catalog();
    let usage = catalog.key_column_usage_view();
    let constraints = catalog.table_constraints_view();
    let referential = catalog.referential_constraints_view();

    let mut out = Vec::new();
    for foreign_key in &usage {
        let is_fk = constraints.iter().any(|tc| {
            tc.constraint_name == foreign_key.constraint_name
                && tc.constraint_type == ConstraintKind::ForeignKey
        });
        if !is_fk {
            continue;
        }
        for rc in referential
            .iter()
            .filter(|rc| rc.constraint_name == foreign_key.constraint_name)
        {
            for private in constraints
                .iter()
                .filter(|tc| tc.constraint_name == rc.unique_constraint_name)
            {
                if private.table_name != table {
                    continue;
                }
                for private_key in usage.iter().filter(|u| {
                    u.constraint_name == private.constraint_name
                        && u.ordinal_position == foreign_key.ordinal_position
                }) {
                    out.push(InfoRelationRow {
                        fk_table_name: foreign_key.table_name.clone(),
                        fk_column_name: foreign_key.column_name.clone(),
                        pk_column_name: private_key.column_name.clone(),
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.fk_table_name
            .cmp(&b.fk_table_name)
            .then_with(|| a.fk_column_name.cmp(&b.fk_column_name))
    });
    out
}

/// Applies `change` inside `txn`; see [`crate::storage::WriteTxn::apply_schema_change`].
pub fn apply_schema_change(
    txn: &mut crate::storage::WriteTxn<'_>,
    change: SchemaChange,
) -> Result<()> {
    txn.apply_schema_change(change)
}
