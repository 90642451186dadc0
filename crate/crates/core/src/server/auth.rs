//! The authentication server: registration, login and VO access.
//!
//! Registration turns the password into its index, draws two primes, keeps
//! `alpha` locally and ships `(v, p)` to the backend. Login recomputes the
//! index from the submitted password, asks the backend for the token that
//! `alpha` produces, and accepts when the authentication condition holds.

use std::collections::HashSet;
use std::future::Future;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;
use tokio::io::BufReader;
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;
use tokio::sync::Semaphore;
use tracing::{info, warn};

use crate::password::compute_pi;
use crate::prime::{generate_prime_pair, DEFAULT_PRIME_BITS};
use crate::server::{BackendService, Handler};
use crate::store::{AuthServerRecord, CredentialStore, Username};
use crate::token::{Clock, SystemClock, TokenError, TokenTable, DEFAULT_TOKEN_TTL};
use crate::trigon::{compute_auth_index, derive_trigon_params, verify, AngleConvention, AuthToken, DEFAULT_EPSILON};
use crate::wire::{self, ErrorCode, Message, Password};

#[derive(Debug, Clone)]
pub struct AuthConfig {
    pub convention: AngleConvention,
    pub prime_bits: u32,
    pub epsilon: f64,
    pub token_ttl: Duration,
    /// Seed for prime generation; `None` seeds from the OS.
    pub seed: Option<u64>,
    pub max_inflight_backend: usize,
}

impl Default for AuthConfig {
    fn default() -> Self {
        Self {
            convention: AngleConvention::Interior,
            prime_bits: DEFAULT_PRIME_BITS,
            epsilon: DEFAULT_EPSILON,
            token_ttl: DEFAULT_TOKEN_TTL,
            seed: None,
            max_inflight_backend: 16,
        }
    }
}

#[derive(Debug, Clone, Error)]
#[error("backend unavailable: {0}")]
pub struct BackendUnavailable(pub String);

/// The authentication server's connection to the backend.
pub trait BackendLink: Send + Sync + 'static {
    fn call(&self, request: Message) -> impl Future<Output = Result<Message, BackendUnavailable>> + Send;
}

/// Calls a [`BackendService`] in the same process.
#[derive(Debug, Clone)]
pub struct LocalBackend(pub Arc<BackendService>);

impl BackendLink for LocalBackend {
    async fn call(&self, request: Message) -> Result<Message, BackendUnavailable> {
        Ok(self.0.respond(request))
    }
}

type Connection = (BufReader<OwnedReadHalf>, OwnedWriteHalf);

/// Talks to a remote backend over TCP, reusing idle connections.
#[derive(Debug)]
pub struct TcpBackend {
    addr: String,
    timeout: Duration,
    idle: Mutex<Vec<Connection>>,
}

impl TcpBackend {
    pub fn new(addr: impl Into<String>) -> Self {
        Self {
            addr: addr.into(),
            timeout: Duration::from_secs(5),
            idle: Mutex::new(Vec::new()),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    async fn connect(&self) -> Result<Connection, BackendUnavailable> {
        let stream = TcpStream::connect(&self.addr)
            .await
            .map_err(|e| BackendUnavailable(format!("connect {}: {e}", self.addr)))?;
        let (read, write) = stream.into_split();
        Ok((BufReader::new(read), write))
    }

    async fn exchange(conn: &mut Connection, request: &Message) -> Result<Message, BackendUnavailable> {
        let (reader, writer) = conn;
        wire::write_message(writer, request)
            .await
            .map_err(|e| BackendUnavailable(e.to_string()))?;
        let line = wire::read_frame(reader)
            .await
            .map_err(|e| BackendUnavailable(e.to_string()))?
            .ok_or_else(|| BackendUnavailable("backend closed the connection".into()))?;
        wire::decode(&line).map_err(|e| BackendUnavailable(e.to_string()))
    }
}

impl BackendLink for TcpBackend {
    async fn call(&self, request: Message) -> Result<Message, BackendUnavailable> {
        let pooled = self.idle.lock().expect("pool lock poisoned").pop();
        // Both backend requests are idempotent, so a stale pooled connection
        // is retried once on a fresh one.
        if let Some(mut conn) = pooled {
            if let Ok(Ok(reply)) = tokio::time::timeout(self.timeout, Self::exchange(&mut conn, &request)).await {
                self.idle.lock().expect("pool lock poisoned").push(conn);
                return Ok(reply);
            }
        }
        let attempt = async {
            let mut conn = self.connect().await?;
            let reply = Self::exchange(&mut conn, &request).await?;
            Ok::<_, BackendUnavailable>((conn, reply))
        };
        let (conn, reply) = tokio::time::timeout(self.timeout, attempt)
            .await
            .map_err(|_| BackendUnavailable("backend timed out".into()))??;
        self.idle.lock().expect("pool lock poisoned").push(conn);
        Ok(reply)
    }
}

/// Releases a username reservation when registration finishes either way.
struct Reservation<'a> {
    pending: &'a Mutex<HashSet<Username>>,
    user: Username,
}

impl Drop for Reservation<'_> {
    fn drop(&mut self) {
        self.pending.lock().expect("pending lock poisoned").remove(&self.user);
    }
}

pub struct AuthService<B> {
    config: AuthConfig,
    store: RwLock<CredentialStore<AuthServerRecord>>,
    pending: Mutex<HashSet<Username>>,
    tokens: Mutex<TokenTable>,
    rng: Mutex<ChaCha20Rng>,
    clock: Arc<dyn Clock>,
    backend: B,
    inflight: Semaphore,
}

impl<B: BackendLink> AuthService<B> {
    pub fn new(config: AuthConfig, store: CredentialStore<AuthServerRecord>, backend: B) -> Self {
        Self::with_clock(config, store, backend, Arc::new(SystemClock))
    }

    pub fn with_clock(
        config: AuthConfig,
        store: CredentialStore<AuthServerRecord>,
        backend: B,
        clock: Arc<dyn Clock>,
    ) -> Self {
        let rng = match config.seed {
            Some(seed) => ChaCha20Rng::seed_from_u64(seed),
            None => ChaCha20Rng::from_rng(&mut rand::rng()),
        };
        Self {
            tokens: Mutex::new(TokenTable::new(config.token_ttl)),
            inflight: Semaphore::new(config.max_inflight_backend.max(1)),
            store: RwLock::new(store),
            pending: Mutex::new(HashSet::new()),
            rng: Mutex::new(rng),
            clock,
            backend,
            config,
        }
    }

    pub fn config(&self) -> &AuthConfig {
        &self.config
    }

    /// The stored `alpha` for `user`, if registered.
    pub fn stored_alpha(&self, user: &str) -> Option<f64> {
        self.store
            .read()
            .expect("store lock poisoned")
            .get(user)
            .map(|r| r.alpha)
    }

    async fn call_backend(&self, request: Message) -> Result<Message, BackendUnavailable> {
        let _permit = self
            .inflight
            .acquire()
            .await
            .map_err(|_| BackendUnavailable("shutting down".into()))?;
        self.backend.call(request).await
    }

    fn reserve(&self, user: &Username) -> Option<Reservation<'_>> {
        let store = self.store.read().expect("store lock poisoned");
        let mut pending = self.pending.lock().expect("pending lock poisoned");
        if store.contains(user.as_str()) || !pending.insert(user.clone()) {
            return None;
        }
        Some(Reservation {
            pending: &self.pending,
            user: user.clone(),
        })
    }

    pub async fn handle_register(&self, user: &str, password: &Password) -> Message {
        let Ok(username) = Username::new(user) else {
            return Message::error(ErrorCode::BadRequest, "invalid username");
        };
        let pi = match compute_pi(password.expose()) {
            Ok(pi) => pi,
            Err(err) => return Message::error(ErrorCode::DegeneratePassword, err.to_string()),
        };
        let Some(_reservation) = self.reserve(&username) else {
            return Message::error(ErrorCode::DuplicateUser, "user already registered");
        };

        let credential = {
            let mut rng = self.rng.lock().expect("rng lock poisoned");
            let (a, a_prime) = match generate_prime_pair(self.config.prime_bits, &mut *rng) {
                Ok(pair) => pair,
                Err(err) => return Message::error(ErrorCode::Internal, err.to_string()),
            };
            derive_trigon_params(a, a_prime, pi, self.config.convention).expect("prime pair is distinct")
        };

        let request = Message::Store {
            user: user.to_owned(),
            v: credential.v,
            p: credential.p,
        };
        match self.call_backend(request).await {
            Ok(Message::StoreOk { user: ack }) if ack == user => {}
            Ok(Message::Error {
                code: ErrorCode::DuplicateUser,
                ..
            }) => {
                return Message::error(ErrorCode::DuplicateUser, "user already registered");
            }
            Ok(other) => {
                warn!(user, reply = other.kind(), "unexpected backend reply to store");
                return Message::error(ErrorCode::BackendUnavailable, "backend rejected the registration");
            }
            Err(err) => {
                warn!(user, error = %err, "registration aborted");
                return Message::error(ErrorCode::BackendUnavailable, err.to_string());
            }
        }

        let record = AuthServerRecord {
            user: username,
            alpha: credential.alpha,
        };
        if let Err(err) = self.store.write().expect("store lock poisoned").put(record) {
            warn!(user, error = %err, "failed to persist alpha after backend stored (v, p)");
            return Message::error(ErrorCode::Internal, err.to_string());
        }
        info!(user, "registered");
        Message::Registered { user: user.to_owned() }
    }

    pub async fn handle_login(&self, user: &str, password: &Password) -> Message {
        let Ok(pi) = compute_pi(password.expose()) else {
            return Message::deny();
        };
        let Some(alpha) = self.stored_alpha(user) else {
            return Message::deny();
        };

        let a_t = match self
            .call_backend(Message::AuthReq {
                user: user.to_owned(),
                alpha,
            })
            .await
        {
            Ok(Message::AuthResp { user: ack, a_t }) if ack == user => a_t,
            Ok(Message::Error {
                code: ErrorCode::UnknownUser,
                ..
            }) => return Message::deny(),
            Ok(other) => {
                warn!(user, reply = other.kind(), "unexpected backend reply to auth_req");
                return Message::error(ErrorCode::BackendUnavailable, "unexpected backend reply");
            }
            Err(err) => return Message::error(ErrorCode::BackendUnavailable, err.to_string()),
        };

        let accepted = verify(
            compute_auth_index(pi),
            AuthToken::new(a_t),
            self.config.convention,
            self.config.epsilon,
        );
        if !accepted {
            info!(user, "login denied");
            return Message::deny();
        }
        let username = Username::new(user).expect("stored usernames are valid");
        let now = self.clock.now_millis();
        let issued = self.tokens.lock().expect("token lock poisoned").issue(username, now);
        info!(user, "login accepted");
        Message::Token {
            user: user.to_owned(),
            token: issued.token.clone(),
            expires_unix: issued.expires_unix(),
        }
    }

    pub fn handle_access(&self, user: &str, token: &str) -> Message {
        let now = self.clock.now_millis();
        match self
            .tokens
            .lock()
            .expect("token lock poisoned")
            .validate(user, token, now)
        {
            Ok(issued) => Message::Granted {
                resource: format!("vo://{}/resources", issued.username),
            },
            Err(TokenError::Invalid) => Message::error(ErrorCode::TokenInvalid, "token not recognised"),
            Err(TokenError::Expired) => Message::error(ErrorCode::TokenExpired, "token has expired"),
        }
    }

    pub async fn respond(&self, request: Message) -> Message {
        match request {
            Message::Register { user, password } => self.handle_register(&user, &password).await,
            Message::Login { user, password } => self.handle_login(&user, &password).await,
            Message::Access { user, token } => self.handle_access(&user, &token),
            other => Message::error(
                ErrorCode::BadRequest,
                format!("authentication server does not accept `{}` messages", other.kind()),
            ),
        }
    }
}

impl<B: BackendLink> Handler for AuthService<B> {
    async fn handle(&self, request: Message) -> Message {
        self.respond(request).await
    }
}
