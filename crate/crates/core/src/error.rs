use std::fmt;

use crate::model::DataType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Position-annotated failure from the filter/order lexer or parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based character offset of the offending token.
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at offset {}: expected {}, found {}",
            self.offset, self.expected, self.found
        )
    }
}

impl std::error::Error for ParseError {}

/// Every failure the engine, catalog, expression language and dialog layer can report.
///
/// Each variant maps to a stable protocol code through [`Error::code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot convert {value:?} to {data_type}")]
    Conversion { value: String, data_type: DataType },

    #[error("unknown table '{0}'")]
    UnknownTable(String),
    #[error("unknown column '{column}' in table '{table}'")]
    UnknownColumn { table: String, column: String },
    #[error("unknown row {row} in table '{table}'")]
    UnknownRow { table: String, row: u64 },
    #[error("unknown constraint '{0}'")]
    UnknownConstraint(String),

    #[error("expected {expected} values, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },
    #[error("column '{column}' expects {expected}, got {actual}")]
    TypeMismatch {
        column: String,
        expected: DataType,
        actual: String,
    },
    #[error("column '{column}' does not accept null")]
    NullViolation { column: String },
    #[error("value of length {actual} exceeds max length {max} of column '{column}'")]
    LengthViolation {
        column: String,
        max: i64,
        actual: usize,
    },
    #[error("duplicate value {value} in unique column '{table}.{column}'")]
    UniqueViolation {
        table: String,
        column: String,
        value: String,
    },
    #[error("value {value} of '{table}.{column}' has no match in the referenced column")]
    ForeignKeyViolation {
        table: String,
        column: String,
        value: String,
    },
    #[error(
        "'{table}.{column}' is still referenced by '{referencing_table}.{referencing_column}'"
    )]
    RestrictViolation {
        table: String,
        column: String,
        referencing_table: String,
        referencing_column: String,
    },

    #[error("table '{0}' already exists")]
    DuplicateTable(String),
    #[error("column '{column}' already exists in table '{table}'")]
    DuplicateColumn { table: String, column: String },
    #[error("constraint '{0}' already exists")]
    DuplicateConstraint(String),
    #[error("table '{table}' already has a primary key")]
    DuplicatePrimaryKey { table: String },
    #[error("table '{table}' is referenced by foreign key '{constraint}'")]
    TableReferenced { table: String, constraint: String },
    #[error("cannot add non-nullable column '{column}' to non-empty table '{table}'")]
    NotNullOnPopulated { table: String, column: String },
    #[error("foreign key type {fk_type} does not match referenced type {pk_type}")]
    TypeMismatchFk {
        fk_type: DataType,
        pk_type: DataType,
    },
    #[error("'{table}.{column}' is neither a primary key nor unique")]
    TargetNotKey { table: String, column: String },
    #[error("constraint '{constraint}' is in use: {reason}")]
    ConstraintInUse { constraint: String, reason: String },
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("invalid schema change: {0}")]
    InvalidSchema(String),

    #[error("parse error {0}")]
    Parse(#[from] ParseError),
    #[error("unknown field '{0}'")]
    UnknownField(String),
    #[error("operator {op} cannot compare field '{field}' with a {literal} literal")]
    TypeError {
        field: String,
        op: String,
        literal: String,
    },
    #[error("LIKE requires a varchar field, '{0}' is not one")]
    LikeOnNonText(String),
    #[error("field '{0}' appears more than once in the order expression")]
    DuplicateOrderField(String),
    #[error("take {take} exceeds the maximum page size {max}")]
    PageTooLarge { take: u64, max: u64 },

    #[error("engine is closed")]
    EngineClosed,
    #[error("storage corrupt: {0}")]
    StorageCorrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse grouping used by transports to pick a status code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed request: parse, semantic or conversion failure.
    Invalid,
    /// The addressed table, row, column or constraint does not exist.
    NotFound,
    /// The request conflicts with a constraint or with the current schema.
    Conflict,
    /// Storage fault or closed engine.
    Internal,
}

impl Error {
    /// Stable protocol error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Conversion { .. } => "ConversionError",
            Error::UnknownTable(_) => "UnknownTable",
            Error::UnknownColumn { .. } => "UnknownColumn",
            Error::UnknownRow { .. } => "UnknownRow",
            Error::UnknownConstraint(_) => "UnknownConstraint",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::TypeMismatch { .. } => "TypeMismatch",
            Error::NullViolation { .. } => "NullViolation",
            Error::LengthViolation { .. } => "LengthViolation",
            Error::UniqueViolation { .. } => "UniqueViolation",
            Error::ForeignKeyViolation { .. } => "ForeignKeyViolation",
            Error::RestrictViolation { .. } => "RestrictViolation",
            Error::DuplicateTable(_) => "DuplicateTable",
            Error::DuplicateColumn { .. } => "DuplicateColumn",
            Error::DuplicateConstraint(_) => "DuplicateConstraint",
            Error::DuplicatePrimaryKey { .. } => "DuplicatePrimaryKey",
            Error::TableReferenced { .. } => "TableReferenced",
            Error::NotNullOnPopulated { .. } => "NotNullOnPopulated",
            Error::TypeMismatchFk { .. } => "TypeMismatchFK",
            Error::TargetNotKey { .. } => "TargetNotKey",
            Error::ConstraintInUse { .. } => "ConstraintInUse",
            Error::InvalidIdentifier(_) => "InvalidIdentifier",
            Error::InvalidSchema(_) => "InvalidSchema",
            Error::Parse(_) => "ParseError",
            Error::UnknownField(_) => "UnknownField",
            Error::TypeError { .. } => "TypeError",
            Error::LikeOnNonText(_) => "LikeOnNonText",
            Error::DuplicateOrderField(_) => "DuplicateOrderField",
            Error::PageTooLarge { .. } => "PageTooLarge",
            Error::EngineClosed => "EngineClosed",
            Error::StorageCorrupt(_) => "StorageCorrupt",
            Error::Io(_) => "IoError",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Conversion { .. }
            | Error::ArityMismatch { .. }
            | Error::TypeMismatch { .. }
            | Error::InvalidIdentifier(_)
            | Error::InvalidSchema(_)
            | Error::Parse(_)
            | Error::UnknownField(_)
            | Error::TypeError { .. }
            | Error::LikeOnNonText(_)
            | Error::DuplicateOrderField(_)
            | Error::PageTooLarge { .. } => ErrorClass::Invalid,
            Error::UnknownTable(_)
            | Error::UnknownColumn { .. }
            | Error::UnknownRow { .. }
            | Error::UnknownConstraint(_) => ErrorClass::NotFound,
            Error::NullViolation { .. }
            | Error::LengthViolation { .. }
            | Error::UniqueViolation { .. }
            | Error::ForeignKeyViolation { .. }
            | Error::RestrictViolation { .. }
            | Error::DuplicateTable(_)
            | Error::DuplicateColumn { .. }
            | Error::DuplicateConstraint(_)
            | Error::DuplicatePrimaryKey { .. }
            | Error::TableReferenced { .. }
            | Error::NotNullOnPopulated { .. }
            | Error::TypeMismatchFk { .. }
            | Error::TargetNotKey { .. }
            | Error::ConstraintInUse { .. } => ErrorClass::Conflict,
            Error::EngineClosed | Error::StorageCorrupt(_) | Error::Io(_) => ErrorClass::Internal,
        }
    }

    /// Character offset for parse failures, used by clients to anchor messages.
    pub fn offset(&self) -> Option<usize> {
        match self {
            Error::Parse(e) => Some(e.offset),
            _ => None,
        }
    }
}
