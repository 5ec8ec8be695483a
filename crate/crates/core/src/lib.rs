//! Storage, catalog, expression and dialog layers of the dialogd server.

pub mod catalog;
pub mod dialog;
pub mod error;
pub mod expression;
pub mod model;
pub mod storage;

pub use error::{Error, ErrorClass, ParseError, Result};
pub use model::{DataType, Timestamp, Value};
pub use storage::{Engine, EngineOptions, Snapshot, WriteTxn};
