//! Embedded row store.
//!
//! Readers take an immutable [`Snapshot`] of the latest committed state and
//! never block. Writers are serialized through a single [`WriteTxn`] at a
//! time; commit publishes a new epoch atomically. A persistent engine keeps a
//! full-state snapshot file plus an append-only journal with one record per
//! committed transaction, see [`journal`].

mod codec;
mod database;
pub mod journal;

use std::ops::Deref;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use arc_swap::ArcSwap;

use crate::catalog::{self, SchemaChange};
use crate::error::{Error, Result};
use crate::model::Value;

pub use database::{Database, Row, RowId, TableRows};
use journal::Journal;

/// One logged mutation inside a committed transaction.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Schema(SchemaChange),
    Insert {
        table: String,
        row: RowId,
        values: Vec<Value>,
    },
    Update {
        table: String,
        row: RowId,
        values: Vec<Value>,
    },
    Delete {
        table: String,
        row: RowId,
    },
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    /// Write a snapshot and truncate the journal after this many commits.
    pub checkpoint_every: Option<u64>,
    /// fsync the journal on every commit.
    pub sync: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            checkpoint_every: Some(100),
            sync: true,
        }
    }
}

/// What recovery found when the engine was opened.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecoveryReport {
    pub snapshot_epoch: u64,
    pub replayed: usize,
    /// Set when the journal ended in a damaged record; recovery stopped at
    /// the last complete record before it.
    pub journal_fault: Option<String>,
}

/// Immutable view of the database at one epoch.
#[derive(Debug, Clone)]
pub struct Snapshot(Arc<Database>);

impl Deref for Snapshot {
    type Target = Database;

    fn deref(&self) -> &Database {
        &self.0
    }
}

impl Snapshot {
    /// Canonical byte image of the full state; equal states give equal bytes.
    pub fn dump(&self) -> Vec<u8> {
        journal::encode_snapshot(&self.0)
    }

    pub fn same_state(&self, other: &Snapshot) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

#[derive(Debug)]
struct Writer {
    journal: Option<Journal>,
    commits_since_checkpoint: u64,
    closed: bool,
}

#[derive(Debug)]
struct Shared {
    current: ArcSwap<Database>,
    writer: Mutex<Writer>,
    dir: Option<PathBuf>,
    options: EngineOptions,
    report: RecoveryReport,
}

/// Handle on the store; cheap to clone and share between threads.
#[derive(Debug, Clone)]
pub struct Engine {
    shared: Arc<Shared>,
}

impl Engine {
    /// Volatile engine with no backing files.
    pub fn in_memory() -> Engine {
        Self::build(
            Database::default(),
            None,
            None,
            EngineOptions::default(),
            RecoveryReport::default(),
        )
    }

    /// Opens (or initializes) a persistent engine in `dir`, replaying the
    /// journal on top of the last snapshot.
    pub fn open(dir: impl AsRef<Path>, options: EngineOptions) -> Result<Engine> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut db = journal::read_snapshot(dir)?.unwrap_or_default();
        let mut report = RecoveryReport {
            snapshot_epoch: db.epoch,
            ..RecoveryReport::default()
        };
        let bytes = match std::fs::read(dir.join(journal::JOURNAL_FILE)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        let scan = journal::scan_journal(&bytes)?;
        for record in scan.records {
            // Records at or below the snapshot epoch were checkpointed already.
            if record.epoch <= db.epoch {
                continue;
            }
            if record.epoch != db.epoch + 1 {
                return Err(Error::StorageCorrupt(format!(
                    "journal jumps from epoch {} to {}",
                    db.epoch, record.epoch
                )));
            }
            for op in &record.ops {
                replay(&mut db, op)?;
            }
            db.epoch = record.epoch;
            report.replayed += 1;
        }
        if let Some(fault) = &scan.fault {
            log::warn!(
                "journal damaged ({fault}); recovered to epoch {} and discarded the tail",
                db.epoch
            );
        }
        report.journal_fault = scan.fault;
        let journal = Journal::open(dir, scan.valid_len, options.sync)?;
        Ok(Self::build(
            db,
            Some(journal),
            Some(dir.to_owned()),
            options,
            report,
        ))
    }

    fn build(
        db: Database,
        journal: Option<Journal>,
        dir: Option<PathBuf>,
        options: EngineOptions,
        report: RecoveryReport,
    ) -> Engine {
        Engine {
            shared: Arc::new(Shared {
                current: ArcSwap::from_pointee(db),
                writer: Mutex::new(Writer {
                    journal,
                    commits_since_checkpoint: 0,
                    closed: false,
                }),
                dir,
                options,
                report,
            }),
        }
    }

    pub fn recovery_report(&self) -> &RecoveryReport {
        &self.shared.report
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.shared.dir.as_deref()
    }

    /// Latest committed state. Never blocks.
    pub fn begin_read(&self) -> Snapshot {
        Snapshot(self.shared.current.load_full())
    }

    /// Waits for exclusive write access, then starts a transaction on the latest epoch.
    pub fn begin_write(&self) -> Result<WriteTxn<'_>> {
        let guard = self.lock_writer();
        if guard.closed {
            return Err(Error::EngineClosed);
        }
        let base = self.shared.current.load_full();
        Ok(WriteTxn {
            shared: &self.shared,
            guard,
            db: (*base).clone(),
            base_epoch: base.epoch,
            ops: Vec::new(),
        })
    }

    fn lock_writer(&self) -> MutexGuard<'_, Writer> {
        // A panic inside a write transaction never leaves partial state
        // published, so a poisoned lock is still usable.
        self.shared
            .writer
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// Writes a full snapshot and truncates the journal. No-op for in-memory engines.
    pub fn checkpoint(&self) -> Result<()> {
        let mut guard = self.lock_writer();
        checkpoint_locked(&self.shared, &mut guard)
    }

    /// Checkpoints and refuses further writes. Readers keep working.
    pub fn close(&self) -> Result<()> {
        let mut guard = self.lock_writer();
        if guard.closed {
            return Ok(());
        }
        checkpoint_locked(&self.shared, &mut guard)?;
        guard.closed = true;
        Ok(())
    }
}

fn checkpoint_locked(shared: &Shared, writer: &mut Writer) -> Result<()> {
    let (Some(dir), Some(journal)) = (&shared.dir, writer.journal.as_mut()) else {
        return Ok(());
    };
    let db = shared.current.load_full();
    journal::write_snapshot(dir, &db, shared.options.sync)?;
    journal.reset()?;
    writer.commits_since_checkpoint = 0;
    Ok(())
}

fn replay(db: &mut Database, op: &Op) -> Result<()> {
    let mismatch = |e: Error| Error::StorageCorrupt(format!("journal replay failed: {e}"));
    match op {
        Op::Schema(change) => catalog::apply(db, change).map_err(mismatch),
        Op::Insert { table, row, values } => {
            let got = db.insert(table, values.clone()).map_err(mismatch)?;
            if got != *row {
                return Err(Error::StorageCorrupt(format!(
                    "journal replay assigned row {got}, log says {row}"
                )));
            }
            Ok(())
        }
        Op::Update { table, row, values } => {
            db.update(table, *row, values.clone()).map_err(mismatch)
        }
        Op::Delete { table, row } => db.delete(table, *row).map_err(mismatch),
    }
}

/// Exclusive write transaction. Dropping it without [`WriteTxn::commit`] aborts.
pub struct WriteTxn<'e> {
    shared: &'e Shared,
    guard: MutexGuard<'e, Writer>,
    db: Database,
    base_epoch: u64,
    ops: Vec<Op>,
}

impl std::fmt::Debug for WriteTxn<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WriteTxn")
            .field("base_epoch", &self.base_epoch)
            .field("ops", &self.ops.len())
            .finish()
    }
}

impl WriteTxn<'_> {
    /// Epoch of the committed state this transaction started from.
    pub fn base_epoch(&self) -> u64 {
        self.base_epoch
    }

    /// The transaction's own view, including its uncommitted writes.
    pub fn view(&self) -> &Database {
        &self.db
    }

    pub fn scan(&self, table: &str) -> Result<&[Row]> {
        self.db.scan(table)
    }

    pub fn insert_row(&mut self, table: &str, values: Vec<Value>) -> Result<RowId> {
        let row = self.db.insert(table, values.clone())?;
        self.ops.push(Op::Insert {
            table: table.to_owned(),
            row,
            values,
        });
        Ok(row)
    }

    /// Replaces the whole row.
    pub fn update_row(&mut self, table: &str, row: RowId, values: Vec<Value>) -> Result<()> {
        self.db.update(table, row, values.clone())?;
        self.ops.push(Op::Update {
            table: table.to_owned(),
            row,
            values,
        });
        Ok(())
    }

    pub fn delete_row(&mut self, table: &str, row: RowId) -> Result<()> {
        self.db.delete(table, row)?;
        self.ops.push(Op::Delete {
            table: table.to_owned(),
            row,
        });
        Ok(())
    }

    /// Applies a DDL change; on error the transaction's state is unchanged.
    pub fn apply_schema_change(&mut self, change: SchemaChange) -> Result<()> {
        catalog::apply(&mut self.db, &change)?;
        self.ops.push(Op::Schema(change));
        Ok(())
    }

    /// Logs and publishes the transaction, returning the new epoch. A
    /// transaction with no operations commits nothing and returns the base epoch.
    pub fn commit(mut self) -> Result<u64> {
        if self.ops.is_empty() {
            return Ok(self.base_epoch);
        }
        let epoch = self.base_epoch + 1;
        self.db.epoch = epoch;
        #[cfg(debug_assertions)]
        if let Err(violation) = self.db.check_invariants() {
            panic!("commit would publish an inconsistent state: {violation}");
        }
        if let Some(journal) = self.guard.journal.as_mut() {
            journal.append(&journal::encode_record(epoch, &self.ops))?;
        }
        let db = std::mem::take(&mut self.db);
        self.shared.current.store(Arc::new(db));
        self.guard.commits_since_checkpoint += 1;
        if let Some(every) = self.shared.options.checkpoint_every {
            if self.guard.commits_since_checkpoint >= every {
                // The commit is already durable in the journal; a failed
                // checkpoint only delays truncation.
                if let Err(e) = checkpoint_locked(self.shared, &mut self.guard) {
                    log::warn!("checkpoint after epoch {epoch} failed: {e}");
                }
            }
        }
        Ok(epoch)
    }

    pub fn abort(self) {}
}
