//! The dialog interface: read operations over one snapshot, the aggregate
//! `read_table`, and one-transaction write handlers.

use crate::catalog::{info_columns_joined, info_relations, info_tables, SchemaChange};
use crate::error::{Error, Result};
use crate::expression::{bind_filter, bind_order, evaluate, parse_filter, parse_order, sort_rows};
use crate::model::{
    string_to_value, value_to_string, Cell, ConstraintKind, FieldDescriptor, RelationDescriptor,
    TableHeader, TablePayload, Value,
};
use crate::storage::{Database, Engine, Row, RowId, Snapshot};

pub const DEFAULT_MAX_TAKE: u64 = 1000;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReadItemsRequest {
    pub table: String,
    /// 0-based index of the first item.
    pub skip: u64,
    pub take: u64,
    pub order: String,
    pub filter: String,
}

impl ReadItemsRequest {
    pub fn new(table: impl Into<String>, skip: u64, take: u64) -> Self {
        ReadItemsRequest {
            table: table.into(),
            skip,
            take,
            ..Self::default()
        }
    }

    pub fn order(mut self, order: impl Into<String>) -> Self {
        self.order = order.into();
        self
    }

    pub fn filter(mut self, filter: impl Into<String>) -> Self {
        self.filter = filter.into();
        self
    }
}

/// One page of items together with the RowIds of its rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ItemPage {
    pub items: Vec<Vec<Cell>>,
    pub row_ids: Vec<u64>,
}

pub fn read_table_headers(snapshot: &Snapshot) -> Vec<TableHeader> {
    info_tables(snapshot)
        .into_iter()
        .map(|t| TableHeader {
            table_name: t.table_name,
        })
        .collect()
}

fn require_table(snapshot: &Snapshot, table: &str) -> Result<()> {
    match snapshot.catalog().table(table) {
        Some(_) => Ok(()),
        None => Err(Error::UnknownTable(table.to_owned())),
    }
}

fn precedence(kind: Option<ConstraintKind>) -> u8 {
    match kind {
        Some(ConstraintKind::ForeignKey) => 4,
        Some(ConstraintKind::PrimaryKey) => 3,
        Some(ConstraintKind::Unique) => 2,
        Some(ConstraintKind::Check) => 1,
        None => 0,
    }
}

/// Fields in ordinal order. A column with several constraints reports the
/// strongest one, ranked FOREIGN KEY > PRIMARY KEY > UNIQUE > CHECK.
pub fn read_fields(snapshot: &Snapshot, table: &str) -> Result<Vec<FieldDescriptor>> {
    require_table(snapshot, table)?;
    let mut fields: Vec<FieldDescriptor> = Vec::new();
    for row in info_columns_joined(snapshot, table) {
        let candidate = FieldDescriptor {
            name: row.column_name,
            table: row.table_name,
            data_type: row.data_type,
            max_length: row.character_maximum_length,
            is_nullable: row.is_nullable == "YES",
            constraint: row.constraint_type,
            pk_table_name: row.pk_table_name,
            pk_field_name: row.pk_column_name,
        };
        match fields.last_mut() {
            Some(last) if last.name == candidate.name => {
                if precedence(candidate.constraint) > precedence(last.constraint) {
                    *last = candidate;
                }
            }
            _ => fields.push(candidate),
        }
    }
    Ok(fields)
}

/// Referencing fields of `table`, ordered by referencing table then field.
pub fn read_relations(snapshot: &Snapshot, table: &str) -> Result<Vec<RelationDescriptor>> {
    require_table(snapshot, table)?;
    Ok(info_relations(snapshot, table)
        .into_iter()
        .map(|r| RelationDescriptor {
            fk_table_name: r.fk_table_name,
            fk_field_name: r.fk_column_name,
            pk_table_name: table.to_owned(),
            pk_field_name: r.pk_column_name,
        })
        .collect())
}

fn matching_rows<'s>(
    db: &'s Database,
    fields: &[FieldDescriptor],
    table: &str,
    filter: &str,
) -> Result<Vec<&'s Row>> {
    let filter = bind_filter(&parse_filter(filter)?, fields)?;
    Ok(db
        .scan(table)?
        .iter()
        .filter(|row| evaluate(&filter, &row.values))
        .collect())
}

fn page_with_fields(
    snapshot: &Snapshot,
    fields: &[FieldDescriptor],
    req: &ReadItemsRequest,
    max_take: u64,
) -> Result<(ItemPage, u64)> {
    if req.take > max_take {
        return Err(Error::PageTooLarge {
            take: req.take,
            max: max_take,
        });
    }
    let mut rows = matching_rows(snapshot, fields, &req.table, &req.filter)?;
    let order = bind_order(&parse_order(&req.order)?, fields)?;
    sort_rows(&order, &mut rows);
    let total = rows.len() as u64;
    let start = usize::try_from(req.skip)
        .unwrap_or(usize::MAX)
        .min(rows.len());
    let end = start
        .saturating_add(usize::try_from(req.take).unwrap_or(usize::MAX))
        .min(rows.len());
    let page = &rows[start..end];
    Ok((
        ItemPage {
            items: page
                .iter()
                .map(|row| row.values.iter().map(value_to_string).collect())
                .collect(),
            row_ids: page.iter().map(|row| row.id.0).collect(),
        },
        total,
    ))
}

/// scan, filter, sort, then the `[skip, skip + take)` slice, rendered as strings.
pub fn read_item_page(
    snapshot: &Snapshot,
    req: &ReadItemsRequest,
    max_take: u64,
) -> Result<ItemPage> {
    let fields = read_fields(snapshot, &req.table)?;
    Ok(page_with_fields(snapshot, &fields, req, max_take)?.0)
}

pub fn read_items(
    snapshot: &Snapshot,
    req: &ReadItemsRequest,
    max_take: u64,
) -> Result<Vec<Vec<Cell>>> {
    Ok(read_item_page(snapshot, req, max_take)?.items)
}

/// Number of rows passing `filter`, ignoring paging.
pub fn read_total(snapshot: &Snapshot, table: &str, filter: &str) -> Result<u64> {
    let fields = read_fields(snapshot, table)?;
    Ok(matching_rows(snapshot, &fields, table, filter)?.len() as u64)
}

/// Fields, relations, items and total computed against the one given snapshot.
pub fn read_table_at(
    snapshot: &Snapshot,
    req: &ReadItemsRequest,
    max_take: u64,
) -> Result<TablePayload> {
    let fields = read_fields(snapshot, &req.table)?;
    let relations = read_relations(snapshot, &req.table)?;
    let (page, total) = page_with_fields(snapshot, &fields, req, max_take)?;
    Ok(TablePayload {
        fields,
        relations,
        items: page.items,
        total,
        row_ids: page.row_ids,
    })
}

/// Converts wire cells to values of the table's column types.
fn convert_cells(db: &Database, table: &str, cells: &[Cell]) -> Result<Vec<Value>> {
    let def = db
        .catalog()
        .table(table)
        .ok_or_else(|| Error::UnknownTable(table.to_owned()))?;
    if cells.len() != def.columns.len() {
        return Err(Error::ArityMismatch {
            expected: def.columns.len(),
            actual: cells.len(),
        });
    }
    def.columns
        .iter()
        .zip(cells)
        .map(|(col, cell)| string_to_value(cell.as_deref(), col.data_type))
        .collect()
}

/// Dialog service bound to an engine. Reads take one snapshot each; every
/// write message runs in its own transaction and returns the committed epoch.
#[derive(Debug, Clone)]
pub struct Dialog {
    engine: Engine,
    max_take: u64,
}

impl Dialog {
    pub fn new(engine: Engine, max_take: u64) -> Self {
        Dialog { engine, max_take }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn max_take(&self) -> u64 {
        self.max_take
    }

    pub fn snapshot(&self) -> Snapshot {
        self.engine.begin_read()
    }

    pub fn read_table_headers(&self) -> Vec<TableHeader> {
        read_table_headers(&self.snapshot())
    }

    pub fn read_fields(&self, table: &str) -> Result<Vec<FieldDescriptor>> {
        read_fields(&self.snapshot(), table)
    }

    pub fn read_relations(&self, table: &str) -> Result<Vec<RelationDescriptor>> {
        read_relations(&self.snapshot(), table)
    }

    pub fn read_items(&self, req: &ReadItemsRequest) -> Result<Vec<Vec<Cell>>> {
        read_items(&self.snapshot(), req, self.max_take)
    }

    pub fn read_total(&self, table: &str, filter: &str) -> Result<u64> {
        read_total(&self.snapshot(), table, filter)
    }

    pub fn read_table(&self, req: &ReadItemsRequest) -> Result<TablePayload> {
        read_table_at(&self.snapshot(), req, self.max_take)
    }

    pub fn create_item(&self, table: &str, cells: &[Cell]) -> Result<(RowId, u64)> {
        let mut txn = self.engine.begin_write()?;
        let values = convert_cells(txn.view(), table, cells)?;
        let row = txn.insert_row(table, values)?;
        Ok((row, txn.commit()?))
    }

    pub fn update_item(&self, table: &str, row: RowId, cells: &[Cell]) -> Result<u64> {
        let mut txn = self.engine.begin_write()?;
        let values = convert_cells(txn.view(), table, cells)?;
        txn.update_row(table, row, values)?;
        txn.commit()
    }

    pub fn delete_item(&self, table: &str, row: RowId) -> Result<u64> {
        let mut txn = self.engine.begin_write()?;
        txn.delete_row(table, row)?;
        txn.commit()
    }

    pub fn change_schema(&self, change: SchemaChange) -> Result<u64> {
        let mut txn = self.engine.begin_write()?;
        txn.apply_schema_change(change)?;
        txn.commit()
    }
}
