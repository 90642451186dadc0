//! User agent for the authentication server.

use serde_json::{json, Value};
use thiserror::Error;
use tokio::io::BufReader;
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::{TcpStream, ToSocketAddrs};

use crate::wire::{self, FrameError, MalformedMessage, Message, Password};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("connect failed: {0}")]
    Connect(std::io::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("server closed the connection")]
    Closed,
    #[error(transparent)]
    Malformed(#[from] MalformedMessage),
}

/// One client connection; requests are sent sequentially.
#[derive(Debug)]
pub struct Connection {
    reader: BufReader<OwnedReadHalf>,
    writer: OwnedWriteHalf,
}

impl Connection {
    pub async fn connect(addr: impl ToSocketAddrs) -> Result<Self, ClientError> {
        let stream = TcpStream::connect(addr).await.map_err(ClientError::Connect)?;
        let (read, writer) = stream.into_split();
        Ok(Self {
            reader: BufReader::new(read),
            writer,
        })
    }

    pub async fn request(&mut self, message: &Message) -> Result<Message, ClientError> {
        self.send_raw(&wire::encode(message)).await
    }

    /// Sends an already-encoded line verbatim and decodes the reply.
    pub async fn send_raw(&mut self, line: &[u8]) -> Result<Message, ClientError> {
        use tokio::io::AsyncWriteExt;
        self.writer.write_all(line).await?;
        self.writer.flush().await?;
        let reply = wire::read_frame(&mut self.reader).await?.ok_or(ClientError::Closed)?;
        Ok(wire::decode(&reply)?)
    }
}

/// Sends a single request on a fresh connection.
pub async fn exchange(addr: impl ToSocketAddrs, message: &Message) -> Result<Message, ClientError> {
    Connection::connect(addr).await?.request(message).await
}

#[derive(Debug, Clone)]
pub enum ClientCommand {
    Register { user: String, password: Password },
    Login { user: String, password: Password },
    Access { user: String, token: String },
}

impl ClientCommand {
    fn into_message(self) -> Message {
        match self {
            ClientCommand::Register { user, password } => Message::Register { user, password },
            ClientCommand::Login { user, password } => Message::Login { user, password },
            ClientCommand::Access { user, token } => Message::Access { user, token },
        }
    }
}

/// Process exit status of a client command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Denied = 1,
    TransportFailure = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Result of a client command: an exit status and a one-line JSON report.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientOutcome {
    pub status: ExitStatus,
    pub report: Value,
}

impl ClientOutcome {
    pub fn from_reply(reply: Message) -> Self {
        let (status, report) = match reply {
            Message::Registered { user } => (ExitStatus::Success, json!({"status": "registered", "user": user})),
            Message::Token {
                token, expires_unix, ..
            } => (
                ExitStatus::Success,
                json!({"token": token, "expires_unix": expires_unix}),
            ),
            Message::Granted { resource } => (ExitStatus::Success, json!({"status": "granted", "resource": resource})),
            Message::Deny { warning } => (ExitStatus::Denied, json!({"status": "denied", "warning": warning})),
            Message::Error { code, message } => (
                ExitStatus::Denied,
                json!({"status": "error", "code": code, "message": message}),
            ),
            other => (
                ExitStatus::Denied,
                json!({"status": "error", "code": "BAD_RESPONSE", "message": format!("unexpected `{}` reply", other.kind())}),
            ),
        };
        Self { status, report }
    }

    pub fn transport_failure(err: &ClientError) -> Self {
        Self {
            status: ExitStatus::TransportFailure,
            report: json!({"status": "error", "code": "CONNECT_FAILED", "message": err.to_string()}),
        }
    }
}

pub async fn run(addr: impl ToSocketAddrs, command: ClientCommand) -> ClientOutcome {
    match exchange(addr, &command.into_message()).await {
        Ok(reply) => ClientOutcome::from_reply(reply),
        Err(err) => ClientOutcome::transport_failure(&err),
    }
}
