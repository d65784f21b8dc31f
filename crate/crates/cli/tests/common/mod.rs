#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use toolseek_cli::config::{CommonArgs, Settings};
use toolseek_cli::service::{router, AppState};

pub fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/two_servers.json")
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Runs the binary with a clean `TOOLSEEK_*` environment.
pub fn toolseek(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_toolseek"));
    for (k, _) in std::env::vars() {
        if k.starts_with("TOOLSEEK_") {
            cmd.env_remove(k);
        }
    }
    cmd.args(args).envs(env.iter().copied()).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn settings_for(catalog: PathBuf) -> Settings {
    Settings::resolve(&CommonArgs {
        catalog: Some(catalog),
        ..Default::default()
    })
    .unwrap()
}

/// Serves `state` on an ephemeral port.
pub async fn serve(state: AppState) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, router(Arc::new(state))).await.unwrap();
    });
    addr
}
