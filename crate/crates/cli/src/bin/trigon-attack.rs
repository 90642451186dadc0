//! Security experiments against running or leaked trigon servers.
//!
//! Every subcommand prints its report as one JSON object on stdout.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use trigon_core::attack::{self, Fragment, GuessingConfig, Leak, RecordingRelay, ReplayLink};
use trigon_core::client::Connection;
use trigon_core::store::{AuthServerRecord, BackendRecord, CredentialStore};
use trigon_core::{AngleConvention, DEFAULT_EPSILON};

#[derive(Debug, Parser)]
#[command(
    name = "trigon-attack",
    version,
    about = "Replay, guessing and stolen-verifier experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Offline dictionary attack with leaked store fragments.
    Stolen {
        #[arg(long)]
        fragment: Fragment,
        /// Dictionary file, one candidate per line.
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        user: String,
        /// Leaked authentication server store.
        #[arg(long)]
        as_store: Option<PathBuf>,
        /// Leaked backend store.
        #[arg(long)]
        bs_store: Option<PathBuf>,
        #[arg(long, default_value = "interior")]
        convention: AngleConvention,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Online guessing with random printable passwords.
    Guess {
        #[arg(long = "as", value_name = "HOST:PORT")]
        as_addr: String,
        #[arg(long)]
        user: String,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// The account's real password, for the offline comparison.
        #[arg(long)]
        reference_password: Option<String>,
        #[arg(long, default_value = "interior")]
        convention: AngleConvention,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Verbatim re-injection of captured messages.
    Replay {
        #[arg(long)]
        link: ReplayLink,
        /// Authentication server (client-as link).
        #[arg(long = "as", value_name = "HOST:PORT")]
        as_addr: Option<String>,
        #[arg(long)]
        user: Option<String>,
        #[arg(long)]
        password: Option<String>,
        /// Backend server (as-bs link).
        #[arg(long)]
        bs: Option<String>,
        /// Transcript captured by `relay` (as-bs link).
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Backend store file to watch for mutation.
        #[arg(long)]
        bs_store: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        repeats: usize,
    },
    /// Record a link: relay lines between `--listen` and `--upstream`.
    Relay {
        #[arg(long)]
        listen: String,
        #[arg(long)]
        upstream: String,
        #[arg(long)]
        transcript: PathBuf,
    },
}

fn read_dictionary(path: &PathBuf) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().filter(|l| !l.is_empty()).map(str::to_owned).collect())
}

async fn run(command: Command) -> anyhow::Result<String> {
    match command {
        Command::Stolen {
            fragment,
            dict,
            user,
            as_store,
            bs_store,
            convention,
            epsilon,
        } => {
            let as_store = match (&as_store, fragment) {
                (Some(p), Fragment::As | Fragment::Both) => Some(CredentialStore::<AuthServerRecord>::load(p)?),
                _ => None,
            };
            let bs_store = match (&bs_store, fragment) {
                (Some(p), Fragment::Bs | Fragment::Both) => Some(CredentialStore::<BackendRecord>::load(p)?),
                _ => None,
            };
            let leak = Leak::extract(fragment, &user, as_store.as_ref(), bs_store.as_ref())?;
            let report = attack::run_stolen_verifier(&leak, &read_dictionary(&dict)?, convention, epsilon);
            Ok(attack::to_json_line(&report))
        }
        Command::Guess {
            as_addr,
            user,
            trials,
            seed,
            reference_password,
            convention,
            epsilon,
        } => {
            let mut conn = Connection::connect(as_addr.as_str()).await?;
            let config = GuessingConfig {
                user,
                trials,
                seed,
                reference_password,
                convention,
                epsilon,
            };
            Ok(attack::to_json_line(&attack::run_guessing(&mut conn, &config).await?))
        }
        Command::Replay {
            link,
            as_addr,
            user,
            password,
            bs,
            transcript,
            bs_store,
            repeats,
        } => {
            let report = match link {
                ReplayLink::ClientAs => {
                    let (Some(addr), Some(user), Some(password)) = (as_addr, user, password) else {
                        bail!("client-as replay needs --as, --user and --password");
                    };
                    attack::run_replay_client_as(addr.as_str(), &user, &password, repeats).await?
                }
                ReplayLink::AsBs => {
                    let (Some(bs), Some(transcript)) = (bs, transcript) else {
                        bail!("as-bs replay needs --bs and --transcript");
                    };
                    let entries = attack::read_transcript(&transcript)?;
                    attack::run_replay_as_bs(bs.as_str(), &entries, repeats, bs_store.as_deref()).await?
                }
            };
            Ok(attack::to_json_line(&report))
        }
        Command::Relay {
            listen,
            upstream,
            transcript,
        } => {
            let relay = RecordingRelay::start(listen.as_str(), upstream, Some(transcript)).await?;
            println!("{}", serde_json::json!({ "listening": relay.local_addr().to_string() }));
            tokio::signal::ctrl_c().await?;
            Ok(serde_json::json!({ "scenario": "relay", "recorded": relay.entries().len() }).to_string())
        }
    }
}

#[tokio::main(flavor = "current_thread")]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .init();
    match run(Cli::parse().command).await {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            println!(
                "{}",
                serde_json::json!({ "status": "error", "message": format!("{err:#}") })
            );
            let transport = err.downcast_ref::<trigon_core::client::ClientError>().is_some();
            ExitCode::from(if transport { 2 } else { 1 })
        }
    }
}
