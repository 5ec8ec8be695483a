#![cfg(unix)]

mod common;

use std::process::Stdio;

use common::{command, get, request, Daemon};
use serde_json::json;

const SEED: &str = include_str!("../seeds/reference.json");

fn seeded_dir() -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let seed = dir.path().join("seed.json");
    std::fs::write(&seed, SEED).unwrap();
    (dir, seed)
}

#[test]
fn seed_applies_to_empty_database_only() {
    let (dir, seed) = seeded_dir();
    let data = dir.path().join("data");
    let daemon = Daemon::spawn(&data, &["--seed", seed.to_str().unwrap()]);
    let (status, tables) = get(daemon.addr, "/api/tables");
    assert_eq!(status, 200);
    assert_eq!(
        tables,
        json!([{"TableName": "customer"}, {"TableName": "order"}])
    );
    let (status, _) = request(
        daemon.addr,
        "POST",
        "/api/schema",
        Some(&json!({"kind": "drop-table", "table": "order"})),
    );
    assert_eq!(status, 200);
    assert!(daemon.terminate().success());

    // the database is no longer empty, so the seed is not reapplied
    let daemon = Daemon::spawn(&data, &["--seed", seed.to_str().unwrap()]);
    assert_eq!(
        get(daemon.addr, "/api/tables").1,
        json!([{"TableName": "customer"}])
    );
    daemon.kill();
}

#[test]
fn invalid_seed_refuses_to_start() {
    let dir = tempfile::tempdir().unwrap();
    let seed = dir.path().join("seed.json");
    std::fs::write(&seed, r#"[{"kind": "drop-table", "table": "ghost"}]"#).unwrap();
    let out = command(
        &dir.path().join("data"),
        "0",
        &["--seed", seed.to_str().unwrap()],
    )
    .stderr(Stdio::piped())
    .output()
    .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("SeedSchemaInvalid"));
}

#[test]
fn second_instance_on_same_port_fails() {
    let dir = tempfile::tempdir().unwrap();
    let daemon = Daemon::spawn(&dir.path().join("a"), &[]);
    let out = command(&dir.path().join("b"), &daemon.addr.port().to_string(), &[])
        .stderr(Stdio::piped())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("PortInUse"));
    daemon.kill();
}

#[test]
fn corrupt_storage_refuses_to_start() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("snapshot.v1"), b"garbage").unwrap();
    let out = command(dir.path(), "0", &[])
        .stderr(Stdio::piped())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("StorageCorrupt"));
}

fn write_some(addr: std::net::SocketAddr) -> serde_json::Value {
    for (id, name) in [("1", "Alice"), ("2", "Bob")] {
        let (status, _) = request(
            addr,
            "POST",
            "/api/tables/customer/items",
            Some(&json!([id, name])),
        );
        assert_eq!(status, 200);
    }
    let (status, _) = request(
        addr,
        "POST",
        "/api/tables/order/items",
        Some(&json!(["1", "2", "9.5", "x"])),
    );
    assert_eq!(status, 200);
    get(addr, "/api/tables/order").1
}

#[test]
fn data_survives_sigterm() {
    let (dir, seed) = seeded_dir();
    let data = dir.path().join("data");
    let daemon = Daemon::spawn(&data, &["--seed", seed.to_str().unwrap()]);
    let before = write_some(daemon.addr);
    assert!(daemon.terminate().success());
    let daemon = Daemon::spawn(&data, &[]);
    assert_eq!(get(daemon.addr, "/api/tables/order").1, before);
    daemon.kill();
}

#[test]
fn data_survives_sigkill() {
    let (dir, seed) = seeded_dir();
    let data = dir.path().join("data");
    let daemon = Daemon::spawn(
        &data,
        &["--seed", seed.to_str().unwrap(), "--checkpoint-every", "2"],
    );
    let before = write_some(daemon.addr);
    daemon.kill();
    let daemon = Daemon::spawn(&data, &[]);
    assert_eq!(get(daemon.addr, "/api/tables/order").1, before);
    daemon.kill();
}
