use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::catalog::{Catalog, ColumnDef, TableDef};
use crate::error::{Error, Result};
use crate::model::{compare_values, value_to_string, ConstraintKind, DataType, Value};

/// Surrogate row identifier; monotonically increasing and never reused within a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub u64);

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: RowId,
    pub values: Vec<Value>,
}

/// Rows of one table, kept in RowId order.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRows {
    pub(crate) next_row_id: u64,
    pub(crate) rows: Vec<Row>,
}

impl Default for TableRows {
    fn default() -> Self {
        Self::new()
    }
}

impl TableRows {
    pub fn new() -> Self {
        TableRows {
            next_row_id: 1,
            rows: Vec::new(),
        }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn next_row_id(&self) -> u64 {
        self.next_row_id
    }

    fn position(&self, id: RowId) -> Option<usize> {
        self.rows.binary_search_by_key(&id, |r| r.id).ok()
    }
}

/// The complete committed state: catalog plus every table's rows.
///
/// Cloning is cheap; row vectors are shared until a writer touches them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Database {
    pub(crate) epoch: u64,
    pub(crate) catalog: Catalog,
    pub(crate) tables: BTreeMap<String, Arc<TableRows>>,
}

fn same(a: &Value, b: &Value) -> bool {
    compare_values(a, b) == Some(Ordering::Equal)
}

impl Database {
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn table_rows(&self, table: &str) -> Option<&TableRows> {
        self.tables.get(table).map(|t| &**t)
    }

    pub fn scan(&self, table: &str) -> Result<&[Row]> {
        self.table_rows(table)
            .map(TableRows::rows)
            .ok_or_else(|| Error::UnknownTable(table.to_owned()))
    }

    fn table_def(&self, table: &str) -> Result<&TableDef> {
        self.catalog
            .table(table)
            .ok_or_else(|| Error::UnknownTable(table.to_owned()))
    }

    pub(crate) fn insert(&mut self, table: &str, values: Vec<Value>) -> Result<RowId> {
        let def = self.table_def(table)?;
        let id = RowId(self.tables[table].next_row_id);
        self.check_row(def, &values, None)?;
        let rows = Arc::make_mut(
            self.tables
                .get_mut(table)
                .expect("rows exist for every table"),
        );
        rows.next_row_id += 1;
        rows.rows.push(Row { id, values });
        Ok(id)
    }

    pub(crate) fn update(&mut self, table: &str, id: RowId, values: Vec<Value>) -> Result<()> {
        let def = self.table_def(table)?;
        let pos = self.tables[table]
            .position(id)
            .ok_or_else(|| Error::UnknownRow {
                table: table.to_owned(),
                row: id.0,
            })?;
        self.check_row(def, &values, Some(id))?;
        let old = &self.tables[table].rows[pos].values;
        self.check_restrict(table, id, old, Some(&values))?;
        let rows = Arc::make_mut(
            self.tables
                .get_mut(table)
                .expect("rows exist for every table"),
        );
        rows.rows[pos].values = values;
        Ok(())
    }

    pub(crate) fn delete(&mut self, table: &str, id: RowId) -> Result<()> {
        self.table_def(table)?;
        let pos = self.tables[table]
            .position(id)
            .ok_or_else(|| Error::UnknownRow {
                table: table.to_owned(),
                row: id.0,
            })?;
        let old = &self.tables[table].rows[pos].values;
        self.check_restrict(table, id, old, None)?;
        let rows = Arc::make_mut(
            self.tables
                .get_mut(table)
                .expect("rows exist for every table"),
        );
        rows.rows.remove(pos);
        Ok(())
    }

    /// Per-column domain checks plus key and reference checks for a row that
    /// would be written to `def`, optionally replacing the row `replacing`.
    fn check_row(&self, def: &TableDef, values: &[Value], replacing: Option<RowId>) -> Result<()> {
        if values.len() != def.columns.len() {
            return Err(Error::ArityMismatch {
                expected: def.columns.len(),
                actual: values.len(),
            });
        }
        for (column, value) in def.columns.iter().zip(values) {
            check_cell(column, value)?;
        }
        let rows = &self.tables[&def.name].rows;
        for (index, column) in def.columns.iter().enumerate() {
            let value = &values[index];
            if value.is_null() {
                continue;
            }
            for constraint in self.catalog.constraints_on(&def.name, &column.name) {
                match constraint.constraint_type {
                    ConstraintKind::PrimaryKey | ConstraintKind::Unique => {
                        let clash = rows
                            .iter()
                            .any(|r| Some(r.id) != replacing && same(&r.values[index], value));
                        if clash {
                            return Err(Error::UniqueViolation {
                                table: def.name.clone(),
                                column: column.name.clone(),
                                value: value.to_string(),
                            });
                        }
                    }
                    ConstraintKind::ForeignKey => {
                        let (target_table, target_column) = self
                            .catalog
                            .fk_target(constraint)
                            .expect("foreign keys reference an existing key");
                        let target_def = self.table_def(target_table)?;
                        let target_index = target_def
                            .column_index(target_column)
                            .expect("key columns exist");
                        let mut found = self.tables[target_table].rows.iter().any(|r| {
                            (target_table != def.name || Some(r.id) != replacing)
                                && same(&r.values[target_index], value)
                        });
                        // A row may reference itself.
                        if !found && target_table == def.name {
                            found = same(&values[target_index], value);
                        }
                        if !found {
                            return Err(Error::ForeignKeyViolation {
                                table: def.name.clone(),
                                column: column.name.clone(),
                                value: value.to_string(),
                            });
                        }
                    }
                    ConstraintKind::Check => {}
                }
            }
        }
        Ok(())
    }

    /// RESTRICT semantics: a referenced key value may not disappear while some
    /// row still points at it. `replacement` holds the new values of row `id`
    /// for updates and is `None` for deletes.
    fn check_restrict(
        &self,
        table: &str,
        id: RowId,
        old: &[Value],
        replacement: Option<&[Value]>,
    ) -> Result<()> {
        let def = self.table_def(table)?;
        for key in self
            .catalog
            .constraints()
            .filter(|c| c.table_name == table && c.constraint_type.is_key())
        {
            let key_index = def
                .column_index(&key.column_name)
                .expect("key columns exist");
            let old_value = &old[key_index];
            if old_value.is_null()
                || replacement.is_some_and(|new| same(&new[key_index], old_value))
            {
                continue;
            }
            for fk in self.catalog.referencing(&key.constraint_name) {
                let fk_def = self.table_def(&fk.table_name)?;
                let fk_index = fk_def
                    .column_index(&fk.column_name)
                    .expect("fk columns exist");
                let self_ref = fk.table_name == table;
                // Post-change view of each referencing cell.
                let still_used = self.tables[&fk.table_name].rows.iter().any(|r| {
                    let cell = if self_ref && r.id == id {
                        match replacement {
                            Some(new) => &new[fk_index],
                            None => return false,
                        }
                    } else {
                        &r.values[fk_index]
                    };
                    same(cell, old_value)
                });
                if still_used {
                    return Err(Error::RestrictViolation {
                        table: table.to_owned(),
                        column: key.column_name.clone(),
                        referencing_table: fk.table_name.clone(),
                        referencing_column: fk.column_name.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Re-verifies every storage and catalog invariant; used after commits in
    /// debug builds and by tests.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let names: Vec<&String> = self.catalog.tables.keys().collect();
        let stored: Vec<&String> = self.tables.keys().collect();
        if names != stored {
            return Err(format!(
                "catalog tables {names:?} != stored tables {stored:?}"
            ));
        }
        for def in self.catalog.tables() {
            for (i, c) in def.columns.iter().enumerate() {
                if c.ordinal_position != i as u32 + 1 {
                    return Err(format!(
                        "{}.{} has ordinal {}",
                        def.name, c.name, c.ordinal_position
                    ));
                }
                let len_ok = match c.data_type {
                    DataType::Varchar => {
                        matches!(c.character_maximum_length, Some(n) if n == -1 || n >= 1)
                    }
                    _ => c.character_maximum_length.is_none(),
                };
                if !len_ok {
                    return Err(format!("{}.{} has bad max length", def.name, c.name));
                }
            }
            let table = &self.tables[&def.name];
            let mut last = 0;
            for row in &table.rows {
                if row.id.0 <= last || row.id.0 >= table.next_row_id {
                    return Err(format!("{} row ids out of order at {}", def.name, row.id));
                }
                last = row.id.0;
                if row.values.len() != def.columns.len() {
                    return Err(format!("{} row {} has wrong arity", def.name, row.id));
                }
                for (c, v) in def.columns.iter().zip(&row.values) {
                    check_cell(c, v).map_err(|e| format!("{} row {}: {e}", def.name, row.id))?;
                }
            }
        }
        let mut primary = HashSet::new();
        for c in self.catalog.constraints() {
            let def = self
                .catalog
                .table(&c.table_name)
                .ok_or_else(|| format!("{} on missing table", c.constraint_name))?;
            let index = def
                .column_index(&c.column_name)
                .ok_or_else(|| format!("{} on missing column", c.constraint_name))?;
            let values = self.tables[&c.table_name]
                .rows
                .iter()
                .map(|r| &r.values[index]);
            match c.constraint_type {
                ConstraintKind::PrimaryKey | ConstraintKind::Unique => {
                    if c.constraint_type == ConstraintKind::PrimaryKey {
                        if !primary.insert(&c.table_name) {
                            return Err(format!("{} has two primary keys", c.table_name));
                        }
                        if def.columns[index].is_nullable {
                            return Err(format!("{} is on a nullable column", c.constraint_name));
                        }
                    }
                    let mut seen = HashSet::new();
                    for v in values.filter(|v| !v.is_null()) {
                        if !seen.insert(value_to_string(v)) {
                            return Err(format!("{} violated by {v}", c.constraint_name));
                        }
                    }
                    if c.referenced_constraint.is_some() {
                        return Err(format!("{} must not reference anything", c.constraint_name));
                    }
                }
                ConstraintKind::ForeignKey => {
                    let (tt, tc) = self
                        .catalog
                        .fk_target(c)
                        .ok_or_else(|| format!("{} references a missing key", c.constraint_name))?;
                    let target =
                        &self.catalog.constraints[c.referenced_constraint.as_ref().unwrap()];
                    if !target.constraint_type.is_key() {
                        return Err(format!("{} references a non-key", c.constraint_name));
                    }
                    let tdef = self.catalog.table(tt).expect("checked with the target");
                    let tindex = tdef.column_index(tc).expect("checked with the target");
                    if tdef.columns[tindex].data_type != def.columns[index].data_type {
                        return Err(format!("{} type mismatch", c.constraint_name));
                    }
                    let keys: HashSet<Option<String>> = self.tables[tt]
                        .rows
                        .iter()
                        .map(|r| value_to_string(&r.values[tindex]))
                        .collect();
                    for v in values.filter(|v| !v.is_null()) {
                        if !keys.contains(&value_to_string(v)) {
                            return Err(format!("{} dangling value {v}", c.constraint_name));
                        }
                    }
                }
                ConstraintKind::Check => {
                    if c.referenced_constraint.is_some() {
                        return Err(format!("{} must not reference anything", c.constraint_name));
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_cell(column: &ColumnDef, value: &Value) -> Result<()> {
    match value.data_type() {
        None => {
            if !column.is_nullable {
                return Err(Error::NullViolation {
                    column: column.name.clone(),
                });
            }
        }
        Some(t) if t != column.data_type || !value.is_well_formed() => {
            return Err(Error::TypeMismatch {
                column: column.name.clone(),
                expected: column.data_type,
                actual: value.type_name().to_owned(),
            });
        }
        Some(_) => {}
    }
    if let (Value::Varchar(s), Some(max)) = (value, column.character_maximum_length) {
        let len = s.chars().count();
        if max >= 1 && len as i64 > max {
            return Err(Error::LengthViolation {
                column: column.name.clone(),
                max,
                actual: len,
            });
        }
    }
    Ok(())
}
