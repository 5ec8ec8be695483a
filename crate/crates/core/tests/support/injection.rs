//! Classic SQL-injection payloads submitted as filter text.

use dialogd_core::dialog::{Dialog, ReadItemsRequest};

pub const CORPUS: &[&str] = &[
    "1=1; drop table customer",
    "name = 'x'; DROP TABLE customer; --",
    "' OR '1'='1",
    "' OR 1=1 --",
    "' OR 1=1#",
    "' OR 1=1/*",
    "name = '' OR '1'='1'",
    "name = 'x'' OR ''1''=''1'",
    "id = 1 OR 1=1",
    "id = 1; DELETE FROM customer",
    "id = 1 UNION SELECT * FROM customer",
    "id = 1 UNION ALL SELECT name, name FROM customer",
    "name = 'a' UNION SELECT table_name FROM information_schema.tables",
    "id = (SELECT max(id) FROM customer)",
    "id IN (1, 2, 3)",
    "id = 1 -- trailing comment",
    "id = 1 /* block */",
    "id = 1 # hash comment",
    "\" OR \"\"=\"",
    "[name] = 'x'",
    "`name` = 'x'",
    "name = 'x' AND 1=CONVERT(int, @@version)",
    "id = 1; EXEC xp_cmdshell('dir')",
    "id = 1; SHUTDOWN",
    "id = 1 WAITFOR DELAY '0:0:5'",
    "id = sleep(5)",
    "id = 1 AND SLEEP(5)",
    "id = BENCHMARK(1000000, MD5(1))",
    "name LIKE '%' OR 'a'='a'",
    "name = CHAR(65)",
    "name = 0x41",
    "name = 'x' || 'y'",
    "id = 1 + 1",
    "id = -1 OR id > 0",
    "admin'--",
    "admin' #",
    "') OR ('1'='1",
    "')) OR (('1'='1",
    "1' ORDER BY 1--",
    "1' GROUP BY id HAVING 1=1--",
    "id = 1; INSERT INTO customer VALUES (99, 'evil')",
    "id = 1; UPDATE customer SET name = 'evil'",
    "id = 1; TRUNCATE TABLE order",
    "id = 1; ALTER TABLE customer DROP COLUMN name",
    "id = 1; CREATE TABLE evil (x int)",
    "name = 'x'\u{0}; DROP TABLE customer",
    "name = 'unterminated",
    "name = 'a'';DROP TABLE customer;--'",
    "id = 1 AND (SELECT COUNT(*) FROM customer) > 0",
    "id = 1 AND EXISTS(SELECT 1)",
    "name = N'x'",
    "id = @id",
    "id = $1",
    "id = ?",
    "name = 'x' COLLATE latin1",
    "name = 'x' ESCAPE '\\'",
    "id = 1e1000",
    "name = 'x' AND id = 99999999999999999999999",
];

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub parse_errors: usize,
    pub bind_errors: usize,
    pub harmless: usize,
}

/// Submits every corpus entry as the filter of a read on `table` and checks
/// that none changes the database. Returns how each was handled.
pub fn run(dialog: &Dialog, table: &str) -> Result<Outcome, String> {
    let before = dialog.snapshot().dump();
    let mut outcome = Outcome::default();
    for text in CORPUS {
        let req = ReadItemsRequest::new(table, 0, 10).filter(*text);
        match dialog.read_table(&req) {
            Err(e) if e.code() == "ParseError" => outcome.parse_errors += 1,
            Err(e) if matches!(e.code(), "UnknownField" | "TypeError" | "LikeOnNonText") => {
                outcome.bind_errors += 1
            }
            Err(e) => return Err(format!("{text:?}: unexpected error {e}")),
            Ok(payload) => {
                if payload
                    .items
                    .iter()
                    .any(|r| r.len() != payload.fields.len())
                {
                    return Err(format!("{text:?}: malformed payload"));
                }
                outcome.harmless += 1;
            }
        }
        if dialog.snapshot().dump() != before {
            return Err(format!("{text:?}: database state changed"));
        }
    }
    Ok(outcome)
}
