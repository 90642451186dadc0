//! Authentication server: registration, login and VO token issuance.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{ensure, Context};
use clap::Parser;
use tokio::net::TcpListener;
use tracing::info;
use trigon_core::prime::PRIME_BITS;
use trigon_core::server::{self, AuthConfig, AuthService, PeerFilter, TcpBackend};
use trigon_core::store::CredentialStore;
use trigon_core::AngleConvention;

#[derive(Debug, Parser)]
#[command(
    name = "trigon-as",
    version,
    about = "Authentication server for trigon dual-server authentication"
)]
struct Args {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:7700")]
    listen: String,

    /// Backend server address.
    #[arg(long)]
    bs: String,

    /// JSON-lines store of (user, alpha) records.
    #[arg(long)]
    store: PathBuf,

    /// Law-of-cosines convention: interior or supplement.
    #[arg(long, default_value = "interior")]
    convention: AngleConvention,

    /// Size of each generated prime, in bits.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(*PRIME_BITS.start() as i64..=*PRIME_BITS.end() as i64))]
    prime_bits: u32,

    /// Absolute tolerance of the authentication condition.
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,

    /// Lifetime of issued VO tokens, in seconds.
    #[arg(long, default_value_t = 300)]
    token_ttl: u64,

    /// Seed for reproducible prime generation.
    #[arg(long)]
    seed: Option<u64>,

    /// Maximum concurrent requests to the backend.
    #[arg(long, default_value_t = 16)]
    max_inflight: usize,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .init();
    let args = Args::parse();
    ensure!(
        args.epsilon > 0.0 && args.epsilon.is_finite(),
        "--epsilon must be positive"
    );
    ensure!(args.token_ttl > 0, "--token-ttl must be positive");

    let config = AuthConfig {
        convention: args.convention,
        prime_bits: args.prime_bits,
        epsilon: args.epsilon,
        token_ttl: Duration::from_secs(args.token_ttl),
        seed: args.seed,
        max_inflight_backend: args.max_inflight,
    };
    let store = CredentialStore::open(&args.store).with_context(|| format!("opening {}", args.store.display()))?;
    info!(records = store.len(), convention = %config.convention, "authentication store loaded");
    let listener = TcpListener::bind(&args.listen)
        .await
        .with_context(|| format!("binding {}", args.listen))?;
    println!(
        "{}",
        serde_json::json!({ "listening": listener.local_addr()?.to_string() })
    );

    let service = Arc::new(AuthService::new(config, store, TcpBackend::new(args.bs)));
    tokio::select! {
        res = server::serve(listener, service, PeerFilter::Any) => res?,
        _ = tokio::signal::ctrl_c() => info!("shutting down"),
    }
    Ok(())
}
