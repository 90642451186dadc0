//! The backend server: holds `(user, v, p)` and answers token requests.
//!
//! The backend never decides whether a login succeeds. It only evaluates
//! `(alpha + v^2) / 2p` for whatever `alpha` the authentication server sends.

use std::sync::RwLock;

use tracing::info;

use crate::server::Handler;
use crate::store::{BackendRecord, CredentialStore, StoreError, Username};
use crate::trigon::compute_auth_token;
use crate::wire::{ErrorCode, Message};

#[derive(Debug)]
pub struct BackendService {
    store: RwLock<CredentialStore<BackendRecord>>,
}

impl BackendService {
    pub fn new(store: CredentialStore<BackendRecord>) -> Self {
        Self {
            store: RwLock::new(store),
        }
    }

    pub fn handle_store(&self, user: &str, v: i64, p: u64) -> Message {
        let Ok(username) = Username::new(user) else {
            return Message::error(ErrorCode::BadRequest, "invalid username");
        };
        let record = BackendRecord { user: username, v, p };
        let mut store = self.store.write().expect("backend store lock poisoned");
        if let Some(existing) = store.get(user) {
            return if existing == &record {
                Message::StoreOk { user: user.to_owned() }
            } else {
                Message::error(ErrorCode::DuplicateUser, "user already stored with different values")
            };
        }
        match store.put(record) {
            Ok(()) => {
                info!(user, "stored backend record");
                Message::StoreOk { user: user.to_owned() }
            }
            Err(StoreError::InvalidRecord(reason)) => Message::error(ErrorCode::BadRequest, reason),
            Err(StoreError::DuplicateUser(_)) => Message::error(ErrorCode::DuplicateUser, "user already stored"),
            Err(err) => Message::error(ErrorCode::Internal, err.to_string()),
        }
    }

    pub fn handle_auth_req(&self, user: &str, alpha: f64) -> Message {
        let store = self.store.read().expect("backend store lock poisoned");
        match store.get(user) {
            Some(record) => Message::AuthResp {
                user: user.to_owned(),
                a_t: compute_auth_token(alpha, record.v, record.p).value(),
            },
            None => Message::error(ErrorCode::UnknownUser, "no backend record for user"),
        }
    }

    /// Dispatches one request.
    pub fn respond(&self, request: Message) -> Message {
        match request {
            Message::Store { user, v, p } => self.handle_store(&user, v, p),
            Message::AuthReq { user, alpha } => self.handle_auth_req(&user, alpha),
            other => Message::error(
                ErrorCode::BadRequest,
                format!("backend does not accept `{}` messages", other.kind()),
            ),
        }
    }

    pub fn record_count(&self) -> usize {
        self.store.read().expect("backend store lock poisoned").len()
    }
}

impl Handler for BackendService {
    async fn handle(&self, request: Message) -> Message {
        self.respond(request)
    }
}
