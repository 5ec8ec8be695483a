use std::net::IpAddr;
use std::path::PathBuf;

use clap::Parser;

/// Dynamic-data-model server.
///
/// Every option can also be set through an environment variable with the
/// `DIALOGD_` prefix, for example `DIALOGD_PORT=8080`.
#[derive(Debug, Clone, Parser)]
#[command(name = "dialogd", version)]
pub struct Config {
    /// TCP port to listen on; 0 picks a free port.
    #[arg(long, env = "DIALOGD_PORT", default_value_t = 8080)]
    pub port: u16,

    /// Address to bind.
    #[arg(long, env = "DIALOGD_HOST", default_value = "127.0.0.1")]
    pub host: IpAddr,

    /// Directory holding the snapshot and journal files; created if missing.
    #[arg(long, env = "DIALOGD_DATA_DIR")]
    pub data_dir: PathBuf,

    /// JSON list of schema changes applied when the database is empty.
    #[arg(long, env = "DIALOGD_SEED")]
    pub seed: Option<PathBuf>,

    /// Largest page size a client may request.
    #[arg(long, env = "DIALOGD_MAX_TAKE", default_value_t = 1000,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub max_take: u64,

    /// Commits between automatic checkpoints.
    #[arg(long, env = "DIALOGD_CHECKPOINT_EVERY", default_value_t = 100,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub checkpoint_every: u64,

    /// Directory with the web UI bundle served at `/`.
    #[arg(long, env = "DIALOGD_UI_DIR")]
    pub ui_dir: Option<PathBuf>,

    /// Skip fsync on commit (faster, loses the latest commits on power failure).
    #[arg(long, env = "DIALOGD_NO_SYNC")]
    pub no_sync: bool,
}

impl Config {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Config {
            port: 0,
            host: IpAddr::from([127, 0, 0, 1]),
            data_dir: data_dir.into(),
            seed: None,
            max_take: dialogd_core::dialog::DEFAULT_MAX_TAKE,
            checkpoint_every: 100,
            ui_dir: None,
            no_sync: false,
        }
    }
}
