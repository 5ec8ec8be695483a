#![allow(dead_code)]

pub mod injection;
pub mod oracle;
pub mod workload;

use dialogd_core::catalog::{reference_schema, ColumnSpec, SchemaChange};
use dialogd_core::storage::RowId;
use dialogd_core::{DataType, Engine, Value};

pub fn apply_all(engine: &Engine, changes: impl IntoIterator<Item = SchemaChange>) {
    let mut txn = engine.begin_write().unwrap();
    for change in changes {
        txn.apply_schema_change(change).unwrap();
    }
    txn.commit().unwrap();
}

pub fn reference_engine() -> Engine {
    let engine = Engine::in_memory();
    apply_all(&engine, reference_schema());
    engine
}

pub fn insert(engine: &Engine, table: &str, values: Vec<Value>) -> RowId {
    let mut txn = engine.begin_write().unwrap();
    let row = txn.insert_row(table, values).unwrap();
    txn.commit().unwrap();
    row
}

/// Adds `order.billing_customer_id -> customer.id` to the reference schema.
pub fn billing_column() -> SchemaChange {
    SchemaChange::AddColumn {
        table: "order".into(),
        column: ColumnSpec::new("billing_customer_id", DataType::Int).references("customer", "id"),
    }
}
