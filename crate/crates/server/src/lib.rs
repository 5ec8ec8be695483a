//! HTTP front end for the dialogd engine.

pub mod config;
pub mod error;
pub mod routes;

use std::io::Write;
use std::net::{SocketAddr, TcpListener};

use dialogd_core::catalog::SchemaChange;
use dialogd_core::dialog::Dialog;
use dialogd_core::storage::{Engine, EngineOptions};

pub use config::Config;
pub use error::{ApiError, ErrorBody, StartupError};
pub use routes::{router, AppState};

/// A bound listener plus an opened engine, ready to serve.
pub struct Server {
    listener: TcpListener,
    engine: Engine,
    config: Config,
}

impl Server {
    /// Binds the port, recovers storage and applies the seed schema if the
    /// database has no tables. The port is bound first so a second instance
    /// fails before it touches the data directory.
    pub fn start(config: Config) -> Result<Server, StartupError> {
        let (host, port) = (config.host, config.port);
        let listener = TcpListener::bind(SocketAddr::new(host, port)).map_err(|source| {
            if source.kind() == std::io::ErrorKind::AddrInUse {
                StartupError::PortInUse { host, port }
            } else {
                StartupError::Bind { host, port, source }
            }
        })?;
        listener
            .set_nonblocking(true)
            .map_err(|source| StartupError::Bind { host, port, source })?;

        let engine = Engine::open(
            &config.data_dir,
            EngineOptions {
                checkpoint_every: Some(config.checkpoint_every),
                sync: !config.no_sync,
            },
        )?;
        let report = engine.recovery_report();
        log::info!(
            "recovered epoch {} (snapshot {}, {} journal records)",
            engine.begin_read().epoch(),
            report.snapshot_epoch,
            report.replayed
        );
        if let Some(fault) = &report.journal_fault {
            log::warn!("journal tail discarded: {fault}");
        }
        if let Some(path) = &config.seed {
            apply_seed(&engine, path)?;
        }
        Ok(Server {
            listener,
            engine,
            config,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener
            .local_addr()
            .expect("bound listener has an address")
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// Serves until `shutdown` resolves, then checkpoints and closes the engine.
    pub async fn serve(
        self,
        shutdown: impl std::future::Future<Output = ()> + Send + 'static,
    ) -> Result<(), StartupError> {
        let state = AppState {
            dialog: Dialog::new(self.engine.clone(), self.config.max_take),
        };
        let app = router(state, self.config.ui_dir.clone());
        let listener = tokio::net::TcpListener::from_std(self.listener).map_err(|source| {
            StartupError::Bind {
                host: self.config.host,
                port: self.config.port,
                source,
            }
        })?;
        axum::serve(listener, app)
            .with_graceful_shutdown(shutdown)
            .await
            .map_err(dialogd_core::Error::Io)?;
        self.engine.close()?;
        Ok(())
    }
}

fn apply_seed(engine: &Engine, path: &std::path::Path) -> Result<(), StartupError> {
    let invalid = |reason: String| StartupError::SeedSchemaInvalid {
        path: path.display().to_string(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| invalid(e.to_string()))?;
    let changes: Vec<SchemaChange> =
        serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;
    let mut txn = engine.begin_write()?;
    if txn.view().catalog().tables().next().is_some() {
        log::info!("database not empty, seed schema skipped");
        return Ok(());
    }
    for (i, change) in changes.into_iter().enumerate() {
        txn.apply_schema_change(change)
            .map_err(|e| invalid(format!("change {i}: {e}")))?;
    }
    let epoch = txn.commit()?;
    log::info!("seed schema applied at epoch {epoch}");
    Ok(())
}

/// Prints the listening line that scripts and tests wait for.
pub fn announce(addr: SocketAddr) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "dialogd listening on http://{addr}");
    let _ = out.flush();
}
