//! On-disk framing for the snapshot file and the commit journal.
//!
//! ```text
//! snapshot.v1 := "DLGSNAP\0" version:u32 length:u64 crc32:u32 payload[length]
//! journal.v1  := "DLGJRNL\0" version:u32 record*
//! record      := length:u32 crc32:u32 payload[length]
//! payload     := epoch:u64 count:u32 op[count]      (journal records)
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{self, Seek, SeekFrom, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::codec::{Decoder, Encoder};
use super::database::Database;
use super::Op;

pub const SNAPSHOT_FILE: &str = "snapshot.v1";
pub const JOURNAL_FILE: &str = "journal.v1";

pub(crate) const SNAPSHOT_MAGIC: &[u8; 8] = b"DLGSNAP\0";
pub(crate) const JOURNAL_MAGIC: &[u8; 8] = b"DLGJRNL\0";
pub(crate) const FORMAT_VERSION: u32 = 1;

const JOURNAL_HEADER_LEN: u64 = 12;
const RECORD_HEADER_LEN: usize = 8;

pub(crate) fn encode_snapshot(db: &Database) -> Vec<u8> {
    let mut payload = Encoder::new();
    payload.database(db);
    let payload = payload.finish();
    let mut out = Vec::with_capacity(payload.len() + 24);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

pub(crate) fn decode_snapshot(bytes: &[u8]) -> Result<Database> {
    let mut header = Decoder::new(bytes);
    let magic = (0..8).map(|_| header.u8()).collect::<Result<Vec<u8>>>()?;
    if magic != SNAPSHOT_MAGIC {
        return Err(Error::StorageCorrupt("snapshot has wrong magic".into()));
    }
    let version = header.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::StorageCorrupt(format!(
            "unsupported snapshot version {version}"
        )));
    }
    let len = header.u64()? as usize;
    let crc = header.u32()?;
    let payload = bytes
        .get(24..)
        .filter(|p| p.len() == len)
        .ok_or_else(|| Error::StorageCorrupt("snapshot length mismatch".into()))?;
    if crc32fast::hash(payload) != crc {
        return Err(Error::StorageCorrupt("snapshot checksum mismatch".into()));
    }
    let mut decoder = Decoder::new(payload);
    let db = decoder.database()?;
    if !decoder.is_empty() {
        return Err(Error::StorageCorrupt("trailing bytes in snapshot".into()));
    }
    Ok(db)
}

/// Writes the snapshot through a temporary file and an atomic rename.
pub(crate) fn write_snapshot(dir: &Path, db: &Database, sync: bool) -> io::Result<()> {
    let tmp = dir.join(format!("{SNAPSHOT_FILE}.tmp"));
    let mut file = File::create(&tmp)?;
    file.write_all(&encode_snapshot(db))?;
    if sync {
        file.sync_all()?;
    }
    drop(file);
    fs::rename(&tmp, dir.join(SNAPSHOT_FILE))?;
    if sync {
        sync_dir(dir)?;
    }
    Ok(())
}

pub(crate) fn read_snapshot(dir: &Path) -> Result<Option<Database>> {
    match fs::read(dir.join(SNAPSHOT_FILE)) {
        Ok(bytes) => decode_snapshot(&bytes).map(Some),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn sync_dir(dir: &Path) -> io::Result<()> {
    #[cfg(unix)]
    File::open(dir)?.sync_all()?;
    #[cfg(not(unix))]
    let _ = dir;
    Ok(())
}

pub(crate) fn journal_header() -> Vec<u8> {
    let mut out = JOURNAL_MAGIC.to_vec();
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out
}

pub(crate) fn encode_record(epoch: u64, ops: &[Op]) -> Vec<u8> {
    let mut payload = Encoder::new();
    payload.u64(epoch);
    payload.len(ops.len());
    for op in ops {
        payload.op(op);
    }
    let payload = payload.finish();
    let mut out = Vec::with_capacity(payload.len() + RECORD_HEADER_LEN);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct JournalRecord {
    pub epoch: u64,
    pub ops: Vec<Op>,
}

#[derive(Debug)]
pub(crate) struct JournalScan {
    pub records: Vec<JournalRecord>,
    /// Byte length of the intact prefix (header plus complete records).
    pub valid_len: u64,
    /// Why scanning stopped early, if it did.
    pub fault: Option<String>,
}

/// Reads records until the end of the data or the first damaged record.
pub(crate) fn scan_journal(bytes: &[u8]) -> Result<JournalScan> {
    let header = journal_header();
    if bytes.len() < header.len() {
        // A crash while creating the file can leave a partial header.
        if header.starts_with(bytes) {
            return Ok(JournalScan {
                records: Vec::new(),
                valid_len: 0,
                fault: (!bytes.is_empty()).then(|| "journal header truncated".to_owned()),
            });
        }
        return Err(Error::StorageCorrupt("journal has wrong magic".into()));
    }
    if bytes[..8] != JOURNAL_MAGIC[..] {
        return Err(Error::StorageCorrupt("journal has wrong magic".into()));
    }
    if bytes[..header.len()] != header[..] {
        return Err(Error::StorageCorrupt("unsupported journal version".into()));
    }
    let mut pos = header.len();
    let mut records = Vec::new();
    let mut fault = None;
    while pos < bytes.len() {
        let rest = &bytes[pos..];
        if rest.len() < RECORD_HEADER_LEN {
            fault = Some(format!("truncated record header at byte {pos}"));
            break;
        }
        let len = u32::from_le_bytes(rest[0..4].try_into().unwrap()) as usize;
        let crc = u32::from_le_bytes(rest[4..8].try_into().unwrap());
        let Some(payload) = rest.get(RECORD_HEADER_LEN..RECORD_HEADER_LEN + len) else {
            fault = Some(format!("truncated record at byte {pos}"));
            break;
        };
        if crc32fast::hash(payload) != crc {
            fault = Some(format!("checksum mismatch in record at byte {pos}"));
            break;
        }
        let mut decoder = Decoder::new(payload);
        let record = (|| {
            let epoch = decoder.u64()?;
            let count = decoder.u32()?;
            let ops = (0..count)
                .map(|_| decoder.op())
                .collect::<Result<Vec<_>>>()?;
            if !decoder.is_empty() {
                return Err(Error::StorageCorrupt("trailing bytes in record".into()));
            }
            Ok(JournalRecord { epoch, ops })
        })();
        // the checksum matched, so a decode failure is corruption, not a torn write
        records.push(record?);
        pos += RECORD_HEADER_LEN + len;
    }
    Ok(JournalScan {
        records,
        valid_len: pos as u64,
        fault,
    })
}

/// Append handle on `journal.v1`.
#[derive(Debug)]
pub(crate) struct Journal {
    file: File,
    sync: bool,
}

impl Journal {
    /// Opens the journal, cutting it back to `valid_len` bytes (or writing a
    /// fresh header when nothing valid is there).
    pub fn open(dir: &Path, valid_len: u64, sync: bool) -> io::Result<Journal> {
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(dir.join(JOURNAL_FILE))?;
        if valid_len < JOURNAL_HEADER_LEN {
            file.set_len(0)?;
            file.seek(SeekFrom::Start(0))?;
            file.write_all(&journal_header())?;
        } else {
            file.set_len(valid_len)?;
            file.seek(SeekFrom::End(0))?;
        }
        if sync {
            file.sync_all()?;
        }
        Ok(Journal { file, sync })
    }

    pub fn append(&mut self, record: &[u8]) -> io::Result<()> {
        let start = self.file.stream_position()?;
        let written = self.file.write_all(record).and_then(|()| {
            if self.sync {
                self.file.sync_data()
            } else {
                Ok(())
            }
        });
        if written.is_err() {
            // Best effort: do not leave a torn record in front of later appends.
            let _ = self.file.set_len(start);
            let _ = self.file.seek(SeekFrom::Start(start));
        }
        written
    }

    /// Drops every record, keeping only the header.
    pub fn reset(&mut self) -> io::Result<()> {
        self.file.set_len(JOURNAL_HEADER_LEN)?;
        self.file.seek(SeekFrom::End(0))?;
        if self.sync {
            self.file.sync_all()?;
        }
        Ok(())
    }
}
