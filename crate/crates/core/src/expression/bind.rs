use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{DataType, FieldDescriptor, Value};

use super::parser::{CompareOp, Direction, FilterExpr, Literal, OrderSpec};

/// Filter with every field resolved to a column position and every literal
/// converted to a value comparable with its column.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundFilter {
    pub(crate) root: Node,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    True,
    Or(Vec<Node>),
    And(Vec<Node>),
    Not(Box<Node>),
    Compare {
        index: usize,
        op: CompareOp,
        value: Value,
    },
    Like {
        index: usize,
        pattern: Vec<char>,
    },
    IsNull {
        index: usize,
        negated: bool,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundOrder {
    pub(crate) keys: Vec<(usize, Direction)>,
}

impl BoundOrder {
    pub fn keys(&self) -> &[(usize, Direction)] {
        &self.keys
    }
}

fn resolve(fields: &[FieldDescriptor], name: &str) -> Result<usize> {
    fields
        .iter()
        .position(|f| f.name == name)
        .ok_or_else(|| Error::UnknownField(name.to_owned()))
}

fn literal_value(data_type: DataType, literal: &Literal) -> Option<Value> {
    match (data_type, literal) {
        (DataType::Int | DataType::Real, Literal::Int(i)) => Some(Value::Int(*i)),
        (DataType::Int | DataType::Real, Literal::Decimal(x)) => Value::real(*x),
        (DataType::Varchar, Literal::Text(s)) => Some(Value::Varchar(s.clone())),
        (DataType::Bit, Literal::Bool(b)) => Some(Value::Bit(*b)),
        // bit cells render as 0/1, so accept those as literals too
        (DataType::Bit, Literal::Int(0)) => Some(Value::Bit(false)),
        (DataType::Bit, Literal::Int(1)) => Some(Value::Bit(true)),
        (DataType::Datetime, Literal::Datetime(t)) => Some(Value::Datetime(*t)),
        _ => None,
    }
}

fn bind_node(expr: &FilterExpr, fields: &[FieldDescriptor]) -> Result<Node> {
    Ok(match expr {
        FilterExpr::True => Node::True,
        FilterExpr::Or(items) => Node::Or(
            items
                .iter()
                .map(|e| bind_node(e, fields))
                .collect::<Result<_>>()?,
        ),
        FilterExpr::And(items) => Node::And(
            items
                .iter()
                .map(|e| bind_node(e, fields))
                .collect::<Result<_>>()?,
        ),
        FilterExpr::Not(inner) => Node::Not(Box::new(bind_node(inner, fields)?)),
        FilterExpr::IsNull { field, negated } => Node::IsNull {
            index: resolve(fields, field)?,
            negated: *negated,
        },
        FilterExpr::Compare { field, op, literal } => {
            let index = resolve(fields, field)?;
            let data_type = fields[index].data_type;
            let type_error = || Error::TypeError {
                field: field.clone(),
                op: op.as_str().to_owned(),
                literal: literal.type_name().to_owned(),
            };
            if *op == CompareOp::Like {
                if data_type != DataType::Varchar {
                    return Err(Error::LikeOnNonText(field.clone()));
                }
                let Literal::Text(pattern) = literal else {
                    return Err(type_error());
                };
                Node::Like {
                    index,
                    pattern: pattern.chars().collect(),
                }
            } else {
                Node::Compare {
                    index,
                    op: *op,
                    value: literal_value(data_type, literal).ok_or_else(type_error)?,
                }
            }
        }
    })
}

/// Resolves field references against `fields` and checks literal types.
pub fn bind_filter(expr: &FilterExpr, fields: &[FieldDescriptor]) -> Result<BoundFilter> {
    Ok(BoundFilter {
        root: bind_node(expr, fields)?,
    })
}

/// Resolves order keys; each field may appear once.
pub fn bind_order(spec: &OrderSpec, fields: &[FieldDescriptor]) -> Result<BoundOrder> {
    let mut seen = HashSet::new();
    let mut keys = Vec::with_capacity(spec.items.len());
    for item in &spec.items {
        if !seen.insert(item.field.as_str()) {
            return Err(Error::DuplicateOrderField(item.field.clone()));
        }
        keys.push((resolve(fields, &item.field)?, item.direction));
    }
    Ok(BoundOrder { keys })
}
