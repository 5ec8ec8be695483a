//! Random mixed DDL/DML transactions for durability and contention tests.

use dialogd_core::catalog::{ColumnSpec, KeyRef, SchemaChange};
use dialogd_core::model::ConstraintKind;
use dialogd_core::storage::{Database, RowId};
use dialogd_core::{DataType, Engine, Timestamp, Value, WriteTxn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TABLES: [&str; 4] = ["t0", "t1", "t2", "t3"];
const COLUMNS: [&str; 5] = ["a", "b", "c", "d", "e"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_type<R: Rng>(rng: &mut R) -> DataType {
    *DataType::ALL.choose(rng).unwrap()
}

fn random_value<R: Rng>(rng: &mut R, t: DataType) -> Value {
    match t {
        DataType::Int => Value::Int(rng.gen_range(0..40)),
        DataType::Real => Value::Real(rng.gen_range(-40..40) as f64 / 4.0),
        DataType::Varchar => {
            let len = rng.gen_range(0..5);
            Value::Varchar(
                (0..len)
                    .map(|_| *['x', 'y', 'é', '\''].choose(rng).unwrap())
                    .collect(),
            )
        }
        DataType::Bit => Value::Bit(rng.gen()),
        DataType::Datetime => {
            Value::Datetime(Timestamp::from_millis(rng.gen_range(0..1_000_000_000_000)).unwrap())
        }
    }
}

fn random_column<R: Rng>(rng: &mut R, name: &str) -> ColumnSpec {
    let t = random_type(rng);
    let mut spec = ColumnSpec::new(name, t);
    if t == DataType::Varchar && rng.gen() {
        spec = spec.max_length(rng.gen_range(4..10));
    }
    if rng.gen_bool(0.2) {
        spec = spec.unique();
    }
    if rng.gen_bool(0.1) {
        spec = spec.check();
    }
    spec
}

fn random_row<R: Rng>(rng: &mut R, db: &Database, table: &str) -> Vec<Value> {
    let def = db.catalog().table(table).unwrap();
    def.columns
        .iter()
        .map(|col| {
            let fk = db
                .catalog()
                .constraints_on(table, &col.name)
                .find(|c| c.constraint_type == ConstraintKind::ForeignKey);
            if let Some(fk) = fk {
                let (target, target_col) = db.catalog().fk_target(fk).unwrap();
                let idx = db
                    .catalog()
                    .table(target)
                    .unwrap()
                    .column_index(target_col)
                    .unwrap();
                let keys: Vec<Value> = db
                    .scan(target)
                    .unwrap()
                    .iter()
                    .map(|r| r.values[idx].clone())
                    .filter(|v| !v.is_null())
                    .collect();
                if !keys.is_empty() && rng.gen_bool(0.8) {
                    return keys.choose(rng).unwrap().clone();
                }
            }
            if col.is_nullable && rng.gen_bool(0.2) {
                Value::Null
            } else {
                random_value(rng, col.data_type)
            }
        })
        .collect()
}

fn random_row_id<R: Rng>(rng: &mut R, db: &Database, table: &str) -> Option<RowId> {
    db.scan(table).unwrap().choose(rng).map(|r| r.id)
}

/// Tries one random operation; errors are expected and leave `txn` unchanged.
fn random_op<R: Rng>(rng: &mut R, txn: &mut WriteTxn<'_>) -> bool {
    let db = txn.view().clone();
    let existing: Vec<String> = db.catalog().tables().map(|t| t.name.clone()).collect();
    let table = match existing.choose(rng) {
        Some(t) if rng.gen_bool(0.9) => t.clone(),
        _ => TABLES.choose(rng).unwrap().to_string(),
    };
    let known = db.catalog().table(&table).is_some();
    let roll = rng.gen_range(0..100);
    let result = match roll {
        _ if !known || roll < 8 => {
            let mut columns = vec![ColumnSpec::new("id", DataType::Int).primary_key()];
            for name in COLUMNS.iter().take(rng.gen_range(1..4)) {
                columns.push(random_column(rng, name));
            }
            if let Some(target) = existing.choose(rng) {
                if rng.gen() {
                    columns.push(
                        ColumnSpec::new("ref", DataType::Int).references(target.clone(), "id"),
                    );
                }
            }
            txn.apply_schema_change(SchemaChange::CreateTable { table, columns })
        }
        8..=10 => txn.apply_schema_change(SchemaChange::DropTable { table }),
        11..=16 => {
            let name = COLUMNS.choose(rng).unwrap();
            let mut spec = random_column(rng, name);
            if rng.gen_bool(0.1) {
                spec = spec.not_null();
            }
            txn.apply_schema_change(SchemaChange::AddColumn {
                table,
                column: spec,
            })
        }
        17..=20 => txn.apply_schema_change(SchemaChange::DropColumn {
            table,
            column: COLUMNS.choose(rng).unwrap().to_string(),
        }),
        21..=24 => {
            let target = existing.choose(rng).unwrap().clone();
            let column = ["ref", "a", "b"].choose(rng).unwrap().to_string();
            txn.apply_schema_change(SchemaChange::AddForeignKey {
                table,
                column,
                references: KeyRef {
                    table: target,
                    column: "id".into(),
                },
            })
        }
        25..=27 => {
            let keep_pk = rng.gen_bool(0.9);
            let names: Vec<String> = db
                .catalog()
                .constraints()
                .filter(|c| !(keep_pk && c.constraint_type == ConstraintKind::PrimaryKey))
                .map(|c| c.constraint_name.clone())
                .collect();
            match names.choose(rng) {
                Some(c) => txn.apply_schema_change(SchemaChange::DropConstraint {
                    constraint: c.clone(),
                }),
                None => return false,
            }
        }
        28..=69 => {
            let row = random_row(rng, &db, &table);
            txn.insert_row(&table, row).map(|_| ())
        }
        70..=89 => match random_row_id(rng, &db, &table) {
            Some(id) => {
                let row = random_row(rng, &db, &table);
                txn.update_row(&table, id, row)
            }
            None => return false,
        },
        _ => match random_row_id(rng, &db, &table) {
            Some(id) => txn.delete_row(&table, id),
            None => return false,
        },
    };
    result.is_ok()
}

/// Commits exactly one transaction of one to four successful random operations.
pub fn random_txn<R: Rng>(engine: &Engine, rng: &mut R) -> u64 {
    loop {
        let mut txn = engine.begin_write().unwrap();
        let wanted = rng.gen_range(1..=4);
        let mut done = 0;
        for _ in 0..wanted * 4 {
            if random_op(rng, &mut txn) {
                done += 1;
                if done == wanted {
                    break;
                }
            }
        }
        if done > 0 {
            return txn.commit().unwrap();
        }
    }
}
