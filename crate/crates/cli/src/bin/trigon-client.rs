//! Command-line user agent: register, login, access.
//!
//! Prints one JSON object per invocation. Exit status is 0 on success, 1 when
//! the server denies the request and 2 when it cannot be reached.

use std::io::{BufRead, IsTerminal};
use std::process::ExitCode;

use clap::{Args as ClapArgs, Parser, Subcommand};
use trigon_core::client::{self, ClientCommand};
use trigon_core::wire::Password;

#[derive(Debug, Parser)]
#[command(
    name = "trigon-client",
    version,
    about = "Client for trigon dual-server authentication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, ClapArgs)]
struct Common {
    /// Authentication server address.
    #[arg(long = "as", value_name = "HOST:PORT")]
    as_addr: String,

    #[arg(long)]
    user: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create an account.
    Register {
        #[command(flatten)]
        common: Common,
        /// Read from the terminal or stdin when omitted.
        #[arg(long)]
        password: Option<String>,
    },
    /// Log in and obtain a VO token.
    Login {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        password: Option<String>,
    },
    /// Present a VO token.
    Access {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        token: String,
    },
}

fn read_password(flag: Option<String>) -> std::io::Result<Password> {
    if let Some(pw) = flag {
        return Ok(Password::new(pw));
    }
    if std::io::stdin().is_terminal() {
        return rpassword::prompt_password("Password: ").map(Password::new);
    }
    let mut line = String::new();
    std::io::stdin().lock().read_line(&mut line)?;
    Ok(Password::new(line.trim_end_matches(['\r', '\n'])))
}

#[tokio::main(flavor = "current_thread")]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    let (addr, command) = match cli.command {
        Command::Register { common, password } => match read_password(password) {
            Ok(password) => (
                common.as_addr,
                ClientCommand::Register {
                    user: common.user,
                    password,
                },
            ),
            Err(err) => return input_failure(err),
        },
        Command::Login { common, password } => match read_password(password) {
            Ok(password) => (
                common.as_addr,
                ClientCommand::Login {
                    user: common.user,
                    password,
                },
            ),
            Err(err) => return input_failure(err),
        },
        Command::Access { common, token } => (
            common.as_addr,
            ClientCommand::Access {
                user: common.user,
                token,
            },
        ),
    };
    let outcome = client::run(addr.as_str(), command).await;
    println!("{}", outcome.report);
    ExitCode::from(outcome.status.code() as u8)
}

fn input_failure(err: std::io::Error) -> ExitCode {
    println!(
        "{}",
        serde_json::json!({"status": "error", "code": "INPUT_FAILED", "message": err.to_string()})
    );
    ExitCode::from(1)
}
