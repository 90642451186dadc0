//! TCP hosting for the authentication and backend servers.

use std::future::Future;
use std::net::{IpAddr, SocketAddr};
use std::sync::Arc;

use tokio::io::BufReader;
use tokio::net::{TcpListener, TcpStream};
use tracing::{debug, warn};

use crate::wire::{self, ErrorCode, FrameError, Message};

pub mod auth;
pub mod backend;

pub use auth::{AuthConfig, AuthService, BackendLink, BackendUnavailable, LocalBackend, TcpBackend};
pub use backend::BackendService;

/// Request/response logic of a server, independent of transport.
pub trait Handler: Send + Sync + 'static {
    fn handle(&self, request: Message) -> impl Future<Output = Message> + Send;
}

/// Which peers a listener accepts.
#[derive(Debug, Clone, Default)]
pub enum PeerFilter {
    #[default]
    Any,
    Only(Vec<IpAddr>),
}

impl PeerFilter {
    pub fn admits(&self, peer: &SocketAddr) -> bool {
        match self {
            PeerFilter::Any => true,
            PeerFilter::Only(ips) => ips.iter().any(|ip| ip == &peer.ip()),
        }
    }
}

/// Accepts connections forever, handling each on its own task.
pub async fn serve<H: Handler>(listener: TcpListener, handler: Arc<H>, filter: PeerFilter) -> std::io::Result<()> {
    loop {
        let (stream, peer) = listener.accept().await?;
        if !filter.admits(&peer) {
            warn!(%peer, "rejected connection from peer outside allowlist");
            continue;
        }
        let handler = Arc::clone(&handler);
        tokio::spawn(async move {
            if let Err(err) = serve_connection(stream, handler.as_ref()).await {
                debug!(%peer, error = %err, "connection closed");
            }
        });
    }
}

/// Answers requests on one connection until the peer hangs up.
pub async fn serve_connection<H: Handler>(stream: TcpStream, handler: &H) -> Result<(), FrameError> {
    let (read, mut write) = stream.into_split();
    let mut reader = BufReader::new(read);
    loop {
        let line = match wire::read_frame(&mut reader).await {
            Ok(Some(line)) => line,
            Ok(None) => return Ok(()),
            Err(FrameError::TooLong) => {
                let reply = Message::error(ErrorCode::BadRequest, "line too long");
                wire::write_message(&mut write, &reply).await?;
                return Err(FrameError::TooLong);
            }
            Err(err) => return Err(err),
        };
        let reply = match wire::decode(&line) {
            Ok(request) => handler.handle(request).await,
            Err(err) => Message::error(ErrorCode::BadRequest, err.to_string()),
        };
        wire::write_message(&mut write, &reply).await?;
    }
}
