//! Brute-force reference for filtering, ordering and paging.
//!
//! Expressions are generated in a private tree type, rendered to text by a
//! printer of their own, and evaluated directly from the stated semantics:
//! SQL three-valued logic, numeric int/real comparison, `%`/`_` LIKE through a
//! regex, nulls first ascending and last descending, RowId as final tie-break.
//! Nothing here goes through the engine's parser or evaluator.

use std::cmp::Ordering;

use dialogd_core::catalog::ColumnSpec;
use dialogd_core::{DataType, Timestamp, Value};
use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;

pub const COLUMNS: [(&str, DataType); 6] = [
    ("n", DataType::Int),
    ("m", DataType::Int),
    ("r", DataType::Real),
    ("s", DataType::Varchar),
    ("b", DataType::Bit),
    ("d", DataType::Datetime),
];

const ALPHABET: [char; 6] = ['a', 'b', 'C', '%', '_', '\''];
const DAY: i64 = 86_400_000;
const BASE_MILLIS: i64 = 1_700_000_000_000;

pub fn column_specs() -> Vec<ColumnSpec> {
    COLUMNS
        .iter()
        .map(|(name, t)| ColumnSpec::new(*name, *t))
        .collect()
}

fn random_text<R: Rng>(rng: &mut R) -> String {
    let len = rng.gen_range(0..4);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

fn random_real<R: Rng>(rng: &mut R) -> f64 {
    // quarters are exact in binary, so f64 comparison below is exact
    rng.gen_range(-80i32..=80) as f64 / 4.0
}

fn random_millis<R: Rng>(rng: &mut R) -> i64 {
    BASE_MILLIS + rng.gen_range(-5i64..=5) * DAY
}

fn random_value<R: Rng>(rng: &mut R, t: DataType) -> Value {
    if rng.gen_bool(0.15) {
        return Value::Null;
    }
    match t {
        DataType::Int => Value::Int(rng.gen_range(-20..=20)),
        DataType::Real => Value::Real(random_real(rng)),
        DataType::Varchar => Value::Varchar(random_text(rng)),
        DataType::Bit => Value::Bit(rng.gen()),
        DataType::Datetime => Value::Datetime(Timestamp::from_millis(random_millis(rng)).unwrap()),
    }
}

pub fn random_rows<R: Rng>(rng: &mut R, count: usize) -> Vec<Vec<Value>> {
    (0..count)
        .map(|_| COLUMNS.iter().map(|(_, t)| random_value(rng, *t)).collect())
        .collect()
}

#[derive(Debug, Clone)]
pub enum Lit {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
    Millis(i64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Cmp(usize, Op, Lit),
    Like(usize, String),
    Null(usize, bool),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

fn random_literal<R: Rng>(rng: &mut R, t: DataType) -> Lit {
    match t {
        DataType::Int | DataType::Real => {
            if rng.gen() {
                Lit::Int(rng.gen_range(-22..=22))
            } else {
                Lit::Real(random_real(rng))
            }
        }
        DataType::Varchar => Lit::Text(random_text(rng)),
        DataType::Bit => Lit::Bool(rng.gen()),
        DataType::Datetime => Lit::Millis(random_millis(rng)),
    }
}

pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.35) {
        let col = rng.gen_range(0..COLUMNS.len());
        let t = COLUMNS[col].1;
        return match rng.gen_range(0..10) {
            0 => Expr::Null(col, rng.gen()),
            1 | 2 if t == DataType::Varchar => Expr::Like(col, random_text(rng)),
            _ => {
                let op = *[Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge]
                    .choose(rng)
                    .unwrap();
                Expr::Cmp(col, op, random_literal(rng, t))
            }
        };
    }
    match rng.gen_range(0..3) {
        0 => Expr::Not(Box::new(random_expr(rng, depth - 1))),
        1 => Expr::And(
            Box::new(random_expr(rng, depth - 1)),
            Box::new(random_expr(rng, depth - 1)),
        ),
        _ => Expr::Or(
            Box::new(random_expr(rng, depth - 1)),
            Box::new(random_expr(rng, depth - 1)),
        ),
    }
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn render_millis(ms: i64) -> String {
    chrono::DateTime::from_timestamp_millis(ms)
        .unwrap()
        .format("%Y-%m-%dT%H:%M:%S%.3fZ")
        .to_string()
}

impl Expr {
    pub fn render(&self) -> String {
        match self {
            Expr::Cmp(col, op, lit) => {
                let op = match op {
                    Op::Eq => "=",
                    Op::Ne => "<>",
                    Op::Lt => "<",
                    Op::Le => "<=",
                    Op::Gt => ">",
                    Op::Ge => ">=",
                };
                let lit = match lit {
                    Lit::Int(i) => i.to_string(),
                    Lit::Real(x) => format!("{x:.2}"),
                    Lit::Text(s) => quote(s),
                    Lit::Bool(b) => if *b { "TRUE" } else { "false" }.to_string(),
                    Lit::Millis(ms) => format!("datetime {}", quote(&render_millis(*ms))),
                };
                format!("{} {op} {lit}", COLUMNS[*col].0)
            }
            Expr::Like(col, p) => format!("{} LIKE {}", COLUMNS[*col].0, quote(p)),
            Expr::Null(col, negated) => format!(
                "{} is {}null",
                COLUMNS[*col].0,
                if *negated { "not " } else { "" }
            ),
            Expr::Not(e) => format!("not ({})", e.render()),
            Expr::And(a, b) => format!("({}) and ({})", a.render(), b.render()),
            Expr::Or(a, b) => format!("({}) OR ({})", a.render(), b.render()),
        }
    }

    /// `None` is SQL unknown.
    pub fn eval(&self, row: &[Value]) -> Option<bool> {
        match self {
            Expr::Null(col, negated) => Some(matches!(row[*col], Value::Null) != *negated),
            Expr::Cmp(col, op, lit) => {
                let ord = compare(&row[*col], lit)?;
                Some(match op {
                    Op::Eq => ord == Ordering::Equal,
                    Op::Ne => ord != Ordering::Equal,
                    Op::Lt => ord == Ordering::Less,
                    Op::Le => ord != Ordering::Greater,
                    Op::Gt => ord == Ordering::Greater,
                    Op::Ge => ord != Ordering::Less,
                })
            }
            Expr::Like(col, pattern) => match &row[*col] {
                Value::Varchar(s) => Some(like_regex(pattern).is_match(s)),
                _ => None,
            },
            Expr::Not(e) => e.eval(row).map(|b| !b),
            Expr::And(a, b) => match (a.eval(row), b.eval(row)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Expr::Or(a, b) => match (a.eval(row), b.eval(row)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
        }
    }
}

fn like_regex(pattern: &str) -> Regex {
    let mut re = String::from("(?s)^");
    for c in pattern.chars() {
        match c {
            '%' => re.push_str(".*"),
            '_' => re.push('.'),
            c => re.push_str(&regex::escape(&c.to_string())),
        }
    }
    re.push('$');
    Regex::new(&re).unwrap()
}

fn compare(v: &Value, lit: &Lit) -> Option<Ordering> {
    let num = |v: &Value| match v {
        Value::Int(i) => Some(*i as f64),
        Value::Real(x) => Some(*x),
        _ => None,
    };
    match lit {
        Lit::Int(i) => num(v)?.partial_cmp(&(*i as f64)),
        Lit::Real(x) => num(v)?.partial_cmp(x),
        Lit::Text(s) => match v {
            Value::Varchar(t) => Some(t.as_str().cmp(s.as_str())),
            _ => None,
        },
        Lit::Bool(b) => match v {
            Value::Bit(x) => Some(x.cmp(b)),
            _ => None,
        },
        Lit::Millis(ms) => match v {
            Value::Datetime(t) => Some(t.millis().cmp(ms)),
            _ => None,
        },
    }
}

pub fn random_order<R: Rng>(rng: &mut R) -> Vec<(usize, bool)> {
    let mut cols: Vec<usize> = (0..COLUMNS.len()).collect();
    cols.shuffle(rng);
    let n = rng.gen_range(0..=3);
    cols.into_iter().take(n).map(|c| (c, rng.gen())).collect()
}

pub fn render_order(order: &[(usize, bool)]) -> String {
    order
        .iter()
        .map(|(c, desc)| {
            let name = COLUMNS[*c].0;
            if *desc {
                format!("{name} desc")
            } else {
                name.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn sort_key(v: &Value) -> (u8, f64, String, i64) {
    match v {
        Value::Null => (0, 0.0, String::new(), 0),
        Value::Int(i) => (1, *i as f64, String::new(), 0),
        Value::Real(x) => (1, *x, String::new(), 0),
        Value::Varchar(s) => (1, 0.0, s.clone(), 0),
        Value::Bit(b) => (1, 0.0, String::new(), *b as i64),
        Value::Datetime(t) => (1, 0.0, String::new(), t.millis()),
    }
}

fn key_cmp(a: &Value, b: &Value) -> Ordering {
    let (ka, kb) = (sort_key(a), sort_key(b));
    ka.0.cmp(&kb.0)
        .then(ka.1.partial_cmp(&kb.1).unwrap())
        .then(ka.2.cmp(&kb.2))
        .then(ka.3.cmp(&kb.3))
}

/// RowIds of the requested page and the unpaged match count. Rows carry
/// their RowId and arrive in RowId order.
pub fn page(
    rows: &[(u64, Vec<Value>)],
    filter: Option<&Expr>,
    order: &[(usize, bool)],
    skip: usize,
    take: usize,
) -> (Vec<u64>, u64) {
    let mut hits: Vec<&(u64, Vec<Value>)> = rows
        .iter()
        .filter(|(_, r)| filter.is_none_or(|f| f.eval(r) == Some(true)))
        .collect();
    // Successive stable sorts from the least significant key upward.
    hits.sort_by_key(|(id, _)| *id);
    for &(col, desc) in order.iter().rev() {
        hits.sort_by(|a, b| {
            let o = key_cmp(&a.1[col], &b.1[col]);
            if desc {
                o.reverse()
            } else {
                o
            }
        });
    }
    let total = hits.len() as u64;
    let ids = hits
        .iter()
        .skip(skip)
        .take(take)
        .map(|(id, _)| *id)
        .collect();
    (ids, total)
}

/// Runs `exprs` random filter/order/page requests against each of `tables`
/// random tables of `rows` rows, comparing the engine with [`page`].
/// Returns the number of comparisons, or the first disagreement.
pub fn compare_with_engine(
    seed: u64,
    tables: usize,
    exprs: usize,
    rows: usize,
) -> Result<usize, String> {
    use dialogd_core::catalog::SchemaChange;
    use dialogd_core::dialog::{read_item_page, read_total, ReadItemsRequest};
    use dialogd_core::model::value_to_string;
    use dialogd_core::Engine;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for _ in 0..tables {
        let engine = Engine::in_memory();
        let mut txn = engine.begin_write().unwrap();
        txn.apply_schema_change(SchemaChange::CreateTable {
            table: "t".into(),
            columns: column_specs(),
        })
        .unwrap();
        let mut data = Vec::new();
        for values in random_rows(&mut rng, rows) {
            let id = txn.insert_row("t", values.clone()).unwrap();
            data.push((id.0, values));
        }
        txn.commit().unwrap();
        let snap = engine.begin_read();

        for _ in 0..exprs {
            let expr = random_expr(&mut rng, 4);
            let order = random_order(&mut rng);
            let skip = rng.gen_range(0..rows + 10);
            let take = rng.gen_range(0..rows / 2);
            let req = ReadItemsRequest::new("t", skip as u64, take as u64)
                .filter(expr.render())
                .order(render_order(&order));
            let (want_ids, want_total) = page(&data, Some(&expr), &order, skip, take);
            let got = read_item_page(&snap, &req, u64::MAX)
                .map_err(|e| format!("{req:?}: engine error {e}"))?;
            let total = read_total(&snap, "t", &req.filter)
                .map_err(|e| format!("{req:?}: engine error {e}"))?;
            if got.row_ids != want_ids || total != want_total {
                return Err(format!(
                    "{req:?}: engine {:?}/{total}, oracle {want_ids:?}/{want_total}",
                    got.row_ids
                ));
            }
            let want_items: Vec<Vec<Option<String>>> = want_ids
                .iter()
                .map(|id| {
                    data[(*id - 1) as usize]
                        .1
                        .iter()
                        .map(value_to_string)
                        .collect()
                })
                .collect();
            if got.items != want_items {
                return Err(format!("{req:?}: cells differ"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
