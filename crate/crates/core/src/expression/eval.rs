use std::cmp::Ordering;

use crate::model::{compare_values, Value};
use crate::storage::Row;

use super::bind::{BoundFilter, BoundOrder, Node};
use super::parser::{CompareOp, Direction};

/// SQL three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

fn eval(node: &Node, row: &[Value]) -> Truth {
    match node {
        Node::True => Truth::True,
        Node::Or(items) => {
            let mut acc = Truth::False;
            for item in items {
                match eval(item, row) {
                    Truth::True => return Truth::True,
                    Truth::Unknown => acc = Truth::Unknown,
                    Truth::False => {}
                }
            }
            acc
        }
        Node::And(items) => {
            let mut acc = Truth::True;
            for item in items {
                match eval(item, row) {
                    Truth::False => return Truth::False,
                    Truth::Unknown => acc = Truth::Unknown,
                    Truth::True => {}
                }
            }
            acc
        }
        Node::Not(inner) => eval(inner, row).not(),
        Node::IsNull { index, negated } => Truth::from_bool(row[*index].is_null() != *negated),
        Node::Compare { index, op, value } => match compare_values(&row[*index], value) {
            None => Truth::Unknown,
            Some(ord) => Truth::from_bool(match op {
                CompareOp::Eq => ord == Ordering::Equal,
                CompareOp::NotEq => ord != Ordering::Equal,
                CompareOp::Lt => ord == Ordering::Less,
                CompareOp::LtEq => ord != Ordering::Greater,
                CompareOp::Gt => ord == Ordering::Greater,
                CompareOp::GtEq => ord != Ordering::Less,
                CompareOp::Like => unreachable!("LIKE is bound to its own node"),
            }),
        },
        Node::Like { index, pattern } => match &row[*index] {
            Value::Varchar(s) => {
                Truth::from_bool(like_chars(&s.chars().collect::<Vec<_>>(), pattern))
            }
            _ => Truth::Unknown,
        },
    }
}

/// True iff the filter evaluates to TRUE; unknown at the root rejects the row.
pub fn evaluate(filter: &BoundFilter, row: &[Value]) -> bool {
    eval(&filter.root, row) == Truth::True
}

/// SQL LIKE: `%` matches any run of characters, `_` exactly one.
pub fn like(text: &str, pattern: &str) -> bool {
    let text: Vec<char> = text.chars().collect();
    let pattern: Vec<char> = pattern.chars().collect();
    like_chars(&text, &pattern)
}

fn like_chars(text: &[char], pattern: &[char]) -> bool {
    let (mut t, mut p) = (0, 0);
    // Position of the last '%' seen and the text index it was tried against.
    let mut star: Option<(usize, usize)> = None;
    while t < text.len() {
        match pattern.get(p) {
            Some('%') => {
                star = Some((p, t));
                p += 1;
            }
            Some('_') => {
                t += 1;
                p += 1;
            }
            Some(c) if *c == text[t] => {
                t += 1;
                p += 1;
            }
            _ => match star {
                Some((sp, st)) => {
                    p = sp + 1;
                    t = st + 1;
                    star = Some((sp, st + 1));
                }
                None => return false,
            },
        }
    }
    pattern[p..].iter().all(|c| *c == '%')
}

/// Null-aware key comparison: ascending puts nulls first, descending last.
fn compare_key(a: &Value, b: &Value, direction: Direction) -> Ordering {
    let ord = match (a.is_null(), b.is_null()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        // Values of one column share a type, so they always compare.
        (false, false) => compare_values(a, b).unwrap_or(Ordering::Equal),
    };
    match direction {
        Direction::Asc => ord,
        Direction::Desc => ord.reverse(),
    }
}

/// Orders rows by the bound keys, breaking ties by ascending RowId.
pub fn sort_rows(order: &BoundOrder, rows: &mut [&Row]) {
    rows.sort_by(|a, b| {
        order
            .keys
            .iter()
            .map(|&(index, dir)| compare_key(&a.values[index], &b.values[index], dir))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then(a.id.cmp(&b.id))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expression::{bind_filter, bind_order, parse_filter, parse_order};
    use crate::model::{DataType, FieldDescriptor};
    use crate::storage::RowId;

    fn field(name: &str, data_type: DataType) -> FieldDescriptor {
        FieldDescriptor {
            name: name.into(),
            table: "t".into(),
            data_type,
            max_length: None,
            is_nullable: true,
            constraint: None,
            pk_table_name: None,
            pk_field_name: None,
        }
    }

    fn fields() -> Vec<FieldDescriptor> {
        vec![
            field("name", DataType::Varchar),
            field("amount", DataType::Real),
            field("note", DataType::Varchar),
        ]
    }

    fn passes(filter: &str, row: &[Value]) -> bool {
        evaluate(
            &bind_filter(&parse_filter(filter).unwrap(), &fields()).unwrap(),
            row,
        )
    }

    #[test]
    fn null_semantics() {
        let row = [Value::varchar("a"), Value::Null, Value::Null];
        assert!(!passes("note = 'x'", &row));
        assert!(!passes("note <> 'x'", &row));
        assert!(!passes("not (amount < 50)", &row));
        assert!(!passes("amount < 50", &row));
        assert!(passes("amount is null", &row));
        assert!(!passes("amount is not null", &row));
        // unknown or true = true; unknown and false = false
        assert!(passes("amount < 50 or name = 'a'", &row));
        assert!(passes(
            "not (amount < 50 and name = 'b')",
            &[Value::varchar("a"), Value::Null, Value::Null][..]
        ));
        assert!(passes("", &row));
    }

    #[test]
    fn like_patterns() {
        assert!(like("hello", "h%o"));
        assert!(like("hello", "h_llo"));
        assert!(like("", "%"));
        assert!(!like("", "_"));
        assert!(like("abcabc", "%abc"));
        assert!(like("aaa", "%a%a%a%"));
        assert!(!like("aa", "%a%a%a%"));
        assert!(!like("Hello", "h%"));
        assert!(like("100%", "100%"));
        assert!(like("žluť", "_lu_"));
        assert!(!like("abc", "ab"));
        assert!(like("mississippi", "m%iss%ppi"));
    }

    fn rows(data: &[(u64, &str, Option<f64>)]) -> Vec<Row> {
        data.iter()
            .map(|(id, name, amount)| Row {
                id: RowId(*id),
                values: vec![
                    Value::varchar(*name),
                    amount.map_or(Value::Null, |a| Value::real(a).unwrap()),
                    Value::Null,
                ],
            })
            .collect()
    }

    fn sorted_ids(order: &str, rows: &[Row]) -> Vec<u64> {
        let order = bind_order(&parse_order(order).unwrap(), &fields()).unwrap();
        let mut refs: Vec<&Row> = rows.iter().collect();
        sort_rows(&order, &mut refs);
        refs.iter().map(|r| r.id.0).collect()
    }

    #[test]
    fn sorting_rules() {
        let data = rows(&[
            (1, "b", Some(10.0)),
            (2, "a", None),
            (3, "b", Some(30.0)),
            (4, "a", Some(5.0)),
            (5, "b", Some(10.0)),
        ]);
        assert_eq!(sorted_ids("", &data), vec![1, 2, 3, 4, 5]);
        assert_eq!(sorted_ids("amount desc", &data), vec![3, 1, 5, 4, 2]);
        assert_eq!(sorted_ids("amount", &data), vec![2, 4, 1, 5, 3]);
        // hand-sorted: a-rows (5.0, null) then b-rows (30, 10, 10 by RowId)
        assert_eq!(
            sorted_ids("name asc, amount desc", &data),
            vec![4, 2, 3, 1, 5]
        );
    }
}
