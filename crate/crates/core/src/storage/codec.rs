//! Length-prefixed, tagged binary encoding shared by `snapshot.v1` and
//! `journal.v1`. All integers are little-endian; strings are a `u32` byte
//! length followed by UTF-8. The byte layout is described in
//! `docs/persistence.md` and pinned by golden-file tests.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::catalog::{
    Catalog, ColumnDef, ColumnSpec, ConstraintDef, KeyRef, SchemaChange, TableDef,
};
use crate::error::{Error, Result};
use crate::model::{ConstraintKind, DataType, Timestamp, Value};

use super::database::{Database, Row, RowId, TableRows};
use super::Op;

const VALUE_NULL: u8 = 0;
const VALUE_INT: u8 = 1;
const VALUE_REAL: u8 = 2;
const VALUE_BIT: u8 = 3;
const VALUE_VARCHAR: u8 = 4;
const VALUE_DATETIME: u8 = 5;

const OP_SCHEMA: u8 = 1;
const OP_INSERT: u8 = 2;
const OP_UPDATE: u8 = 3;
const OP_DELETE: u8 = 4;

const DDL_CREATE_TABLE: u8 = 1;
const DDL_DROP_TABLE: u8 = 2;
const DDL_ADD_COLUMN: u8 = 3;
const DDL_DROP_COLUMN: u8 = 4;
const DDL_ADD_FOREIGN_KEY: u8 = 5;
const DDL_DROP_CONSTRAINT: u8 = 6;

const FLAG_NULLABLE: u8 = 1;
const FLAG_PRIMARY_KEY: u8 = 2;
const FLAG_UNIQUE: u8 = 4;
const FLAG_CHECK: u8 = 8;

#[derive(Default)]
pub(crate) struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("collection fits in u32"));
    }

    pub fn str(&mut self, s: &str) {
        self.len(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn opt_str(&mut self, s: Option<&str>) {
        match s {
            None => self.u8(0),
            Some(s) => {
                self.u8(1);
                self.str(s);
            }
        }
    }

    pub fn opt_i64(&mut self, v: Option<i64>) {
        match v {
            None => self.u8(0),
            Some(v) => {
                self.u8(1);
                self.i64(v);
            }
        }
    }

    pub fn value(&mut self, v: &Value) {
        match v {
            Value::Null => self.u8(VALUE_NULL),
            Value::Int(i) => {
                self.u8(VALUE_INT);
                self.i64(*i);
            }
            Value::Real(x) => {
                self.u8(VALUE_REAL);
                self.u64(x.to_bits());
            }
            Value::Bit(b) => {
                self.u8(VALUE_BIT);
                self.u8(*b as u8);
            }
            Value::Varchar(s) => {
                self.u8(VALUE_VARCHAR);
                self.str(s);
            }
            Value::Datetime(t) => {
                self.u8(VALUE_DATETIME);
                self.i64(t.millis());
            }
        }
    }

    fn values(&mut self, values: &[Value]) {
        self.len(values.len());
        for v in values {
            self.value(v);
        }
    }

    fn data_type(&mut self, t: DataType) {
        self.u8(data_type_tag(t));
    }

    fn column_spec(&mut self, c: &ColumnSpec) {
        self.str(&c.name);
        self.data_type(c.data_type);
        self.opt_i64(c.max_length);
        let mut flags = 0;
        for (on, bit) in [
            (c.nullable, FLAG_NULLABLE),
            (c.primary_key, FLAG_PRIMARY_KEY),
            (c.unique, FLAG_UNIQUE),
            (c.check, FLAG_CHECK),
        ] {
            if on {
                flags |= bit;
            }
        }
        self.u8(flags);
        match &c.references {
            None => self.u8(0),
            Some(r) => {
                self.u8(1);
                self.key_ref(r);
            }
        }
    }

    fn key_ref(&mut self, r: &KeyRef) {
        self.str(&r.table);
        self.str(&r.column);
    }

    pub fn schema_change(&mut self, change: &SchemaChange) {
        match change {
            SchemaChange::CreateTable { table, columns } => {
                self.u8(DDL_CREATE_TABLE);
                self.str(table);
                self.len(columns.len());
                for c in columns {
                    self.column_spec(c);
                }
            }
            SchemaChange::DropTable { table } => {
                self.u8(DDL_DROP_TABLE);
                self.str(table);
            }
            SchemaChange::AddColumn { table, column } => {
                self.u8(DDL_ADD_COLUMN);
                self.str(table);
                self.column_spec(column);
            }
            SchemaChange::DropColumn { table, column } => {
                self.u8(DDL_DROP_COLUMN);
                self.str(table);
                self.str(column);
            }
            SchemaChange::AddForeignKey {
                table,
                column,
                references,
            } => {
                self.u8(DDL_ADD_FOREIGN_KEY);
                self.str(table);
                self.str(column);
                self.key_ref(references);
            }
            SchemaChange::DropConstraint { constraint } => {
                self.u8(DDL_DROP_CONSTRAINT);
                self.str(constraint);
            }
        }
    }

    pub fn op(&mut self, op: &Op) {
        match op {
            Op::Schema(change) => {
                self.u8(OP_SCHEMA);
                self.schema_change(change);
            }
            Op::Insert { table, row, values } => {
                self.u8(OP_INSERT);
                self.str(table);
                self.u64(row.0);
                self.values(values);
            }
            Op::Update { table, row, values } => {
                self.u8(OP_UPDATE);
                self.str(table);
                self.u64(row.0);
                self.values(values);
            }
            Op::Delete { table, row } => {
                self.u8(OP_DELETE);
                self.str(table);
                self.u64(row.0);
            }
        }
    }

    /// Full state: epoch, tables (name order) with columns and rows, then constraints.
    pub fn database(&mut self, db: &Database) {
        self.u64(db.epoch);
        self.len(db.catalog.tables.len());
        for def in db.catalog.tables.values() {
            self.str(&def.name);
            self.len(def.columns.len());
            for c in &def.columns {
                self.str(&c.name);
                self.data_type(c.data_type);
                self.opt_i64(c.character_maximum_length);
                self.u8(c.is_nullable as u8);
            }
            let rows = &db.tables[&def.name];
            self.u64(rows.next_row_id);
            self.u64(rows.rows.len() as u64);
            for row in &rows.rows {
                self.u64(row.id.0);
                for v in &row.values {
                    self.value(v);
                }
            }
        }
        self.len(db.catalog.constraints.len());
        for c in db.catalog.constraints.values() {
            self.str(&c.constraint_name);
            self.u8(constraint_tag(c.constraint_type));
            self.str(&c.table_name);
            self.str(&c.column_name);
            self.opt_str(c.referenced_constraint.as_deref());
        }
    }
}

fn data_type_tag(t: DataType) -> u8 {
    match t {
        DataType::Int => 1,
        DataType::Varchar => 2,
        DataType::Bit => 3,
        DataType::Real => 4,
        DataType::Datetime => 5,
    }
}

fn constraint_tag(k: ConstraintKind) -> u8 {
    match k {
        ConstraintKind::PrimaryKey => 1,
        ConstraintKind::ForeignKey => 2,
        ConstraintKind::Unique => 3,
        ConstraintKind::Check => 4,
    }
}

fn corrupt(what: impl Into<String>) -> Error {
    Error::StorageCorrupt(what.into())
}

pub(crate) struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Decoder { buf, pos: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.pos == self.buf.len()
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.buf.len())
            .ok_or_else(|| corrupt(format!("unexpected end of data at byte {}", self.pos)))?;
        let bytes = &self.buf[self.pos..end];
        self.pos = end;
        Ok(bytes)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }

    pub fn str(&mut self) -> Result<String> {
        let n = self.len()?;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| corrupt("invalid UTF-8 string"))
    }

    fn flag(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            t => Err(corrupt(format!("invalid presence byte {t}"))),
        }
    }

    fn opt_str(&mut self) -> Result<Option<String>> {
        Ok(if self.flag()? {
            Some(self.str()?)
        } else {
            None
        })
    }

    fn opt_i64(&mut self) -> Result<Option<i64>> {
        Ok(if self.flag()? {
            Some(self.i64()?)
        } else {
            None
        })
    }

    pub fn value(&mut self) -> Result<Value> {
        Ok(match self.u8()? {
            VALUE_NULL => Value::Null,
            VALUE_INT => Value::Int(self.i64()?),
            VALUE_REAL => Value::real(f64::from_bits(self.u64()?))
                .ok_or_else(|| corrupt("non-finite real"))?,
            VALUE_BIT => Value::Bit(self.flag()?),
            VALUE_VARCHAR => Value::Varchar(self.str()?),
            VALUE_DATETIME => Value::Datetime(
                Timestamp::from_millis(self.i64()?)
                    .ok_or_else(|| corrupt("datetime out of range"))?,
            ),
            t => return Err(corrupt(format!("unknown value tag {t}"))),
        })
    }

    fn values(&mut self) -> Result<Vec<Value>> {
        let n = self.len()?;
        (0..n).map(|_| self.value()).collect()
    }

    fn data_type(&mut self) -> Result<DataType> {
        let tag = self.u8()?;
        DataType::ALL
            .into_iter()
            .find(|t| data_type_tag(*t) == tag)
            .ok_or_else(|| corrupt(format!("unknown data type tag {tag}")))
    }

    fn constraint_kind(&mut self) -> Result<ConstraintKind> {
        let tag = self.u8()?;
        [
            ConstraintKind::PrimaryKey,
            ConstraintKind::ForeignKey,
            ConstraintKind::Unique,
            ConstraintKind::Check,
        ]
        .into_iter()
        .find(|k| constraint_tag(*k) == tag)
        .ok_or_else(|| corrupt(format!("unknown constraint tag {tag}")))
    }

    fn key_ref(&mut self) -> Result<KeyRef> {
        Ok(KeyRef {
            table: self.str()?,
            column: self.str()?,
        })
    }

    fn column_spec(&mut self) -> Result<ColumnSpec> {
        let name = self.str()?;
        let data_type = self.data_type()?;
        let max_length = self.opt_i64()?;
        let flags = self.u8()?;
        let references = if self.flag()? {
            Some(self.key_ref()?)
        } else {
            None
        };
        Ok(ColumnSpec {
            name,
            data_type,
            max_length,
            nullable: flags & FLAG_NULLABLE != 0,
            primary_key: flags & FLAG_PRIMARY_KEY != 0,
            unique: flags & FLAG_UNIQUE != 0,
            check: flags & FLAG_CHECK != 0,
            references,
        })
    }

    pub fn schema_change(&mut self) -> Result<SchemaChange> {
        Ok(match self.u8()? {
            DDL_CREATE_TABLE => {
                let table = self.str()?;
                let n = self.len()?;
                let columns = (0..n).map(|_| self.column_spec()).collect::<Result<_>>()?;
                SchemaChange::CreateTable { table, columns }
            }
            DDL_DROP_TABLE => SchemaChange::DropTable { table: self.str()? },
            DDL_ADD_COLUMN => SchemaChange::AddColumn {
                table: self.str()?,
                column: self.column_spec()?,
            },
            DDL_DROP_COLUMN => SchemaChange::DropColumn {
                table: self.str()?,
                column: self.str()?,
            },
            DDL_ADD_FOREIGN_KEY => SchemaChange::AddForeignKey {
                table: self.str()?,
                column: self.str()?,
                references: self.key_ref()?,
            },
            DDL_DROP_CONSTRAINT => SchemaChange::DropConstraint {
                constraint: self.str()?,
            },
            t => return Err(corrupt(format!("unknown schema change tag {t}"))),
        })
    }

    pub fn op(&mut self) -> Result<Op> {
        Ok(match self.u8()? {
            OP_SCHEMA => Op::Schema(self.schema_change()?),
            OP_INSERT => Op::Insert {
                table: self.str()?,
                row: RowId(self.u64()?),
                values: self.values()?,
            },
            OP_UPDATE => Op::Update {
                table: self.str()?,
                row: RowId(self.u64()?),
                values: self.values()?,
            },
            OP_DELETE => Op::Delete {
                table: self.str()?,
                row: RowId(self.u64()?),
            },
            t => return Err(corrupt(format!("unknown op tag {t}"))),
        })
    }

    pub fn database(&mut self) -> Result<Database> {
        let epoch = self.u64()?;
        let mut catalog = Catalog::default();
        let mut tables = BTreeMap::new();
        let table_count = self.len()?;
        for _ in 0..table_count {
            let name = self.str()?;
            let column_count = self.len()?;
            let mut columns = Vec::with_capacity(column_count);
            for i in 0..column_count {
                columns.push(ColumnDef {
                    name: self.str()?,
                    ordinal_position: i as u32 + 1,
                    data_type: self.data_type()?,
                    character_maximum_length: self.opt_i64()?,
                    is_nullable: self.flag()?,
                });
            }
            let next_row_id = self.u64()?;
            let row_count = self.u64()?;
            let mut rows = Vec::new();
            for _ in 0..row_count {
                let id = RowId(self.u64()?);
                let values = (0..column_count)
                    .map(|_| self.value())
                    .collect::<Result<_>>()?;
                rows.push(Row { id, values });
            }
            tables.insert(name.clone(), Arc::new(TableRows { next_row_id, rows }));
            catalog
                .tables
                .insert(name.clone(), TableDef { name, columns });
        }
        let constraint_count = self.len()?;
        for _ in 0..constraint_count {
            let def = ConstraintDef {
                constraint_name: self.str()?,
                constraint_type: self.constraint_kind()?,
                table_name: self.str()?,
                column_name: self.str()?,
                referenced_constraint: self.opt_str()?,
            };
            catalog.constraints.insert(def.constraint_name.clone(), def);
        }
        let db = Database {
            epoch,
            catalog,
            tables,
        };
        db.check_invariants().map_err(corrupt)?;
        Ok(db)
    }
}
