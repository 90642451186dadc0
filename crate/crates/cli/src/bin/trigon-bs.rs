//! Backend server: stores `(user, v, p)` and answers token requests.

use std::net::IpAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::Parser;
use tokio::net::{lookup_host, TcpListener};
use tracing::info;
use trigon_core::server::{self, BackendService, PeerFilter};
use trigon_core::store::CredentialStore;

#[derive(Debug, Parser)]
#[command(
    name = "trigon-bs",
    version,
    about = "Backend server for trigon dual-server authentication"
)]
struct Args {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:7701")]
    listen: String,

    /// JSON-lines store of (user, v, p) records.
    #[arg(long)]
    store: PathBuf,

    /// Accept connections only from this authentication server host.
    #[arg(long)]
    allow_as: Option<String>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .init();
    let args = Args::parse();

    let filter = match &args.allow_as {
        Some(host) => {
            let ips: Vec<IpAddr> = lookup_host((host.as_str(), 0))
                .await
                .with_context(|| format!("resolving --allow-as {host}"))?
                .map(|a| a.ip())
                .collect();
            PeerFilter::Only(ips)
        }
        None => PeerFilter::Any,
    };

    let store = CredentialStore::open(&args.store).with_context(|| format!("opening {}", args.store.display()))?;
    info!(records = store.len(), "backend store loaded");
    let listener = TcpListener::bind(&args.listen)
        .await
        .with_context(|| format!("binding {}", args.listen))?;
    println!(
        "{}",
        serde_json::json!({ "listening": listener.local_addr()?.to_string() })
    );

    let service = Arc::new(BackendService::new(store));
    tokio::select! {
        res = server::serve(listener, service, filter) => res?,
        _ = tokio::signal::ctrl_c() => info!("shutting down"),
    }
    Ok(())
}
