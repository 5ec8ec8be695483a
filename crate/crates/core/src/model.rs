//! Typed cell values, the data-type vocabulary and the dialog message records.
//!
//! Every cell crosses the wire as a string (or the null marker). The functions
//! [`value_to_string`] and [`string_to_value`] define that canonical form and
//! are mutually inverse for every non-null value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The closed set of column types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    Int,
    Varchar,
    Bit,
    Real,
    Datetime,
}

impl DataType {
    pub const ALL: [DataType; 5] = [
        DataType::Int,
        DataType::Varchar,
        DataType::Bit,
        DataType::Real,
        DataType::Datetime,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DataType::Int => "int",
            DataType::Varchar => "varchar",
            DataType::Bit => "bit",
            DataType::Real => "real",
            DataType::Datetime => "datetime",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, DataType::Int | DataType::Real)
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DataType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DataType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidSchema(format!("unknown data type {s:?}")))
    }
}

/// UTC instant with millisecond precision, restricted to four-digit years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Timestamp(i64);

impl Timestamp {
    /// 0000-01-01T00:00:00.000Z
    pub const MIN_MILLIS: i64 = -62_167_219_200_000;
    /// 9999-12-31T23:59:59.999Z
    pub const MAX_MILLIS: i64 = 253_402_300_799_999;

    pub fn from_millis(millis: i64) -> Option<Self> {
        (Self::MIN_MILLIS..=Self::MAX_MILLIS)
            .contains(&millis)
            .then_some(Timestamp(millis))
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    /// Accepts RFC 3339 with any offset; the instant is normalized to UTC.
    /// Sub-millisecond precision is rejected rather than silently truncated.
    pub fn parse(s: &str) -> Option<Self> {
        let parsed = DateTime::parse_from_rfc3339(s).ok()?;
        if parsed.timestamp_subsec_nanos() % 1_000_000 != 0 {
            return None;
        }
        Self::from_millis(parsed.timestamp_millis())
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dt = DateTime::<Utc>::from_timestamp_millis(self.0).expect("timestamp in range");
        f.write_str(&dt.to_rfc3339_opts(SecondsFormat::Millis, true))
    }
}

/// One typed cell datum.
///
/// `Real` payloads are finite and never negative zero; use [`Value::real`]
/// to construct them from arbitrary floats.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Int(i64),
    Real(f64),
    Bit(bool),
    Varchar(String),
    Datetime(Timestamp),
}

impl Value {
    pub fn real(x: f64) -> Option<Value> {
        if !x.is_finite() {
            return None;
        }
        // -0.0 and 0.0 compare equal; keep a single representation.
        Some(Value::Real(if x == 0.0 { 0.0 } else { x }))
    }

    pub fn varchar(s: impl Into<String>) -> Value {
        Value::Varchar(s.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// `None` for null.
    pub fn data_type(&self) -> Option<DataType> {
        match self {
            Value::Null => None,
            Value::Int(_) => Some(DataType::Int),
            Value::Real(_) => Some(DataType::Real),
            Value::Bit(_) => Some(DataType::Bit),
            Value::Varchar(_) => Some(DataType::Varchar),
            Value::Datetime(_) => Some(DataType::Datetime),
        }
    }

    /// False for reals that bypassed [`Value::real`] with a NaN, infinity or -0.0.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Value::Real(x) => x.is_finite() && (*x != 0.0 || x.is_sign_positive()),
            _ => true,
        }
    }

    pub fn type_name(&self) -> &'static str {
        self.data_type().map_or("null", DataType::as_str)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match value_to_string(self) {
            Some(s) if matches!(self, Value::Varchar(_)) => write!(f, "{s:?}"),
            Some(s) => f.write_str(&s),
            None => f.write_str("NULL"),
        }
    }
}

/// Canonical wire rendering. `None` is the null marker.
pub fn value_to_string(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::Int(i) => Some(i.to_string()),
        // Debug formatting is the shortest representation that parses back exactly.
        Value::Real(x) => Some(format!("{x:?}")),
        Value::Bit(b) => Some(if *b { "1" } else { "0" }.to_owned()),
        Value::Varchar(s) => Some(s.clone()),
        Value::Datetime(t) => Some(t.to_string()),
    }
}

/// Parses a wire cell under the given column type.
pub fn string_to_value(s: Option<&str>, data_type: DataType) -> Result<Value> {
    let Some(s) = s else {
        return Ok(Value::Null);
    };
    let parsed = match data_type {
        DataType::Int => s.parse::<i64>().ok().map(Value::Int),
        DataType::Real => s.parse::<f64>().ok().and_then(Value::real),
        DataType::Bit => match s {
            "0" => Some(Value::Bit(false)),
            "1" => Some(Value::Bit(true)),
            _ => None,
        },
        DataType::Varchar => Some(Value::Varchar(s.to_owned())),
        DataType::Datetime => Timestamp::parse(s).map(Value::Datetime),
    };
    parsed.ok_or_else(|| Error::Conversion {
        value: s.to_owned(),
        data_type,
    })
}

/// Natural ordering of two values; `None` when they are incomparable
/// (null on either side, or a cross-type pair other than int/real).
pub fn compare_values(a: &Value, b: &Value) -> Option<Ordering> {
    use Value::*;
    match (a, b) {
        (Int(x), Int(y)) => Some(x.cmp(y)),
        (Real(x), Real(y)) => x.partial_cmp(y),
        (Int(x), Real(y)) => cmp_int_real(*x, *y),
        (Real(x), Int(y)) => cmp_int_real(*y, *x).map(Ordering::reverse),
        (Bit(x), Bit(y)) => Some(x.cmp(y)),
        (Varchar(x), Varchar(y)) => Some(x.cmp(y)),
        (Datetime(x), Datetime(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

/// Exact comparison without rounding the integer through f64.
fn cmp_int_real(i: i64, r: f64) -> Option<Ordering> {
    if r.is_nan() {
        return None;
    }
    // 2^63 is exactly representable; i64 covers [-2^63, 2^63).
    const TWO_63: f64 = 9_223_372_036_854_775_808.0;
    if r >= TWO_63 {
        return Some(Ordering::Less);
    }
    if r < -TWO_63 {
        return Some(Ordering::Greater);
    }
    let whole = r.trunc();
    match i.cmp(&(whole as i64)) {
        Ordering::Equal => Some(if r > whole {
            Ordering::Less
        } else if r < whole {
            Ordering::Greater
        } else {
            Ordering::Equal
        }),
        other => Some(other),
    }
}

/// Kind of a single-column constraint, rendered with its SQL keyword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintKind {
    #[serde(rename = "PRIMARY KEY")]
    PrimaryKey,
    #[serde(rename = "FOREIGN KEY")]
    ForeignKey,
    #[serde(rename = "UNIQUE")]
    Unique,
    #[serde(rename = "CHECK")]
    Check,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::PrimaryKey => "PRIMARY KEY",
            ConstraintKind::ForeignKey => "FOREIGN KEY",
            ConstraintKind::Unique => "UNIQUE",
            ConstraintKind::Check => "CHECK",
        }
    }

    /// PRIMARY KEY and UNIQUE columns may be the target of a foreign key.
    pub fn is_key(self) -> bool {
        matches!(self, ConstraintKind::PrimaryKey | ConstraintKind::Unique)
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableHeader {
    #[serde(rename = "TableName")]
    pub table_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    #[serde(rename = "Name")]
    pub name: String,
    #[serde(rename = "Table")]
    pub table: String,
    #[serde(rename = "DataType")]
    pub data_type: DataType,
    /// Absent for non-text fields, -1 for unlimited text.
    #[serde(rename = "MaxLength")]
    pub max_length: Option<i64>,
    #[serde(rename = "IsNullable")]
    pub is_nullable: bool,
    #[serde(rename = "Constraint")]
    pub constraint: Option<ConstraintKind>,
    #[serde(rename = "PK_TableName")]
    pub pk_table_name: Option<String>,
    #[serde(rename = "PK_FieldName")]
    pub pk_field_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDescriptor {
    #[serde(rename = "FK_TableName")]
    pub fk_table_name: String,
    #[serde(rename = "FK_FieldName")]
    pub fk_field_name: String,
    #[serde(rename = "PK_TableName")]
    pub pk_table_name: String,
    #[serde(rename = "PK_FieldName")]
    pub pk_field_name: String,
}

/// One string-or-null cell of an item grid.
pub type Cell = Option<String>;

/// Aggregate answer to a single-snapshot table read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TablePayload {
    #[serde(rename = "Fields")]
    pub fields: Vec<FieldDescriptor>,
    #[serde(rename = "Relations")]
    pub relations: Vec<RelationDescriptor>,
    #[serde(rename = "Items")]
    pub items: Vec<Vec<Cell>>,
    #[serde(rename = "Total")]
    pub total: u64,
    /// Row identifiers aligned with `items`, needed to address updates and deletes.
    #[serde(rename = "RowIds")]
    pub row_ids: Vec<u64>,
}
