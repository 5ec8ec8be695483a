use std::fmt;

use crate::error::ParseError;
use crate::model::Timestamp;

use super::lexer::{tokenize, Keyword, Token, TokenKind};

/// Deeper nesting than this is refused instead of recursing further.
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    Like,
}

impl CompareOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::NotEq => "<>",
            CompareOp::Lt => "<",
            CompareOp::LtEq => "<=",
            CompareOp::Gt => ">",
            CompareOp::GtEq => ">=",
            CompareOp::Like => "like",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Decimal(f64),
    Text(String),
    Bool(bool),
    Datetime(Timestamp),
}

impl Literal {
    pub fn type_name(&self) -> &'static str {
        match self {
            Literal::Int(_) => "integer",
            Literal::Decimal(_) => "decimal",
            Literal::Text(_) => "string",
            Literal::Bool(_) => "boolean",
            Literal::Datetime(_) => "datetime",
        }
    }
}

/// Unbound filter tree; field references are still names.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterExpr {
    /// The empty filter.
    True,
    Or(Vec<FilterExpr>),
    And(Vec<FilterExpr>),
    Not(Box<FilterExpr>),
    Compare {
        field: String,
        op: CompareOp,
        literal: Literal,
    },
    IsNull {
        field: String,
        negated: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderItem {
    pub field: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrderSpec {
    pub items: Vec<OrderItem>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::End {
            self.pos += 1;
        }
        t
    }

    fn at_keyword(&self, k: Keyword) -> bool {
        self.peek().kind == TokenKind::Keyword(k)
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError {
            offset: t.offset,
            expected: expected.to_owned(),
            found: t.kind.describe(),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.peek().kind == TokenKind::End {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn descend(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("shallower nesting"));
        }
        Ok(())
    }

    fn or(&mut self) -> Result<FilterExpr, ParseError> {
        let mut items = vec![self.and()?];
        while self.at_keyword(Keyword::Or) {
            self.next();
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            FilterExpr::Or(items)
        })
    }

    fn and(&mut self) -> Result<FilterExpr, ParseError> {
        let mut items = vec![self.unary()?];
        while self.at_keyword(Keyword::And) {
            self.next();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            FilterExpr::And(items)
        })
    }

    fn unary(&mut self) -> Result<FilterExpr, ParseError> {
        if self.at_keyword(Keyword::Not) {
            self.next();
            self.descend()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(FilterExpr::Not(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<FilterExpr, ParseError> {
        match self.peek().kind.clone() {
            TokenKind::LParen => {
                self.next();
                self.descend()?;
                let inner = self.or()?;
                self.depth -= 1;
                if self.peek().kind != TokenKind::RParen {
                    return Err(self.error("')'"));
                }
                self.next();
                Ok(inner)
            }
            TokenKind::Ident(field) => {
                self.next();
                if self.at_keyword(Keyword::Is) {
                    self.next();
                    let negated = self.at_keyword(Keyword::Not);
                    if negated {
                        self.next();
                    }
                    if !self.at_keyword(Keyword::Null) {
                        return Err(self.error("null"));
                    }
                    self.next();
                    return Ok(FilterExpr::IsNull { field, negated });
                }
                let op = match self.peek().kind {
                    TokenKind::Eq => CompareOp::Eq,
                    TokenKind::NotEq => CompareOp::NotEq,
                    TokenKind::Lt => CompareOp::Lt,
                    TokenKind::LtEq => CompareOp::LtEq,
                    TokenKind::Gt => CompareOp::Gt,
                    TokenKind::GtEq => CompareOp::GtEq,
                    TokenKind::Keyword(Keyword::Like) => CompareOp::Like,
                    _ => return Err(self.error("comparison operator or 'is'")),
                };
                self.next();
                let literal = self.literal()?;
                Ok(FilterExpr::Compare { field, op, literal })
            }
            _ => Err(self.error("field name, 'not' or '('")),
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let literal = match self.peek().kind.clone() {
            TokenKind::Integer(i) => Literal::Int(i),
            TokenKind::Decimal(x) => Literal::Decimal(x),
            TokenKind::Text(s) => Literal::Text(s),
            TokenKind::Keyword(Keyword::True) => Literal::Bool(true),
            TokenKind::Keyword(Keyword::False) => Literal::Bool(false),
            TokenKind::Keyword(Keyword::Datetime) => {
                self.next();
                let TokenKind::Text(s) = self.peek().kind.clone() else {
                    return Err(self.error("quoted ISO-8601 timestamp"));
                };
                let ts = Timestamp::parse(&s).ok_or_else(|| {
                    self.error("ISO-8601 timestamp with at most millisecond precision")
                })?;
                Literal::Datetime(ts)
            }
            _ => return Err(self.error("literal")),
        };
        self.next();
        Ok(literal)
    }

    fn order(&mut self) -> Result<OrderSpec, ParseError> {
        let mut items = Vec::new();
        if self.peek().kind == TokenKind::End {
            return Ok(OrderSpec { items });
        }
        loop {
            let TokenKind::Ident(field) = self.peek().kind.clone() else {
                return Err(self.error("field name"));
            };
            self.next();
            let direction = if self.at_keyword(Keyword::Desc) {
                self.next();
                Direction::Desc
            } else {
                if self.at_keyword(Keyword::Asc) {
                    self.next();
                }
                Direction::Asc
            };
            items.push(OrderItem { field, direction });
            if self.peek().kind != TokenKind::Comma {
                break;
            }
            self.next();
        }
        Ok(OrderSpec { items })
    }
}

fn parser(text: &str) -> Result<Parser, ParseError> {
    Ok(Parser {
        tokens: tokenize(text)?,
        pos: 0,
        depth: 0,
    })
}

/// Parses a filter expression. Empty or blank input is [`FilterExpr::True`].
pub fn parse_filter(text: &str) -> Result<FilterExpr, ParseError> {
    let mut p = parser(text)?;
    if p.peek().kind == TokenKind::End {
        return Ok(FilterExpr::True);
    }
    let expr = p.or()?;
    p.expect_end()?;
    Ok(expr)
}

/// Parses `field [asc|desc] ("," field [asc|desc])*`; empty input orders nothing.
pub fn parse_order(text: &str) -> Result<OrderSpec, ParseError> {
    let mut p = parser(text)?;
    let spec = p.order()?;
    p.expect_end()?;
    Ok(spec)
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(i) => write!(f, "{i}"),
            // Debug keeps a '.' or exponent, so the text lexes back as a decimal.
            Literal::Decimal(x) => write!(f, "{x:?}"),
            Literal::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Datetime(t) => write!(f, "datetime'{t}'"),
        }
    }
}

impl FilterExpr {
    fn fmt_nested(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterExpr::Or(_) | FilterExpr::And(_) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, items: &[FilterExpr], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        item.fmt_nested(f)?;
    }
    Ok(())
}

/// Renders text that parses back to the same tree.
impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterExpr::True => Ok(()),
            FilterExpr::Or(items) => join(f, items, " or "),
            FilterExpr::And(items) => join(f, items, " and "),
            FilterExpr::Not(inner) => {
                f.write_str("not ")?;
                inner.fmt_nested(f)
            }
            FilterExpr::Compare { field, op, literal } => {
                write!(f, "{field} {} {literal}", op.as_str())
            }
            FilterExpr::IsNull { field, negated } => {
                write!(f, "{field} is {}null", if *negated { "not " } else { "" })
            }
        }
    }
}

impl fmt::Display for OrderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let dir = match item.direction {
                Direction::Asc => "asc",
                Direction::Desc => "desc",
            };
            write!(f, "{} {dir}", item.field)?;
        }
        Ok(())
    }
}
