//! Filter and order language: lexing, parsing, binding against a table's
//! fields, and evaluation over rows.

mod bind;
mod eval;
mod lexer;
mod parser;

pub use bind::{bind_filter, bind_order, BoundFilter, BoundOrder};
pub use eval::{evaluate, like, sort_rows};
pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use parser::{
    parse_filter, parse_order, CompareOp, Direction, FilterExpr, Literal, OrderItem, OrderSpec,
};
