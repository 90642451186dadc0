//! VO access tokens issued after a successful login.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rand::RngCore;
use thiserror::Error;

use crate::store::Username;

pub const DEFAULT_TOKEN_TTL: Duration = Duration::from_secs(300);

/// Expired entries are kept this long so that late presentations are
/// reported as expired rather than unknown.
const EXPIRED_RETENTION: Duration = Duration::from_secs(3600);

/// Millisecond wall clock.
pub trait Clock: Send + Sync {
    fn now_millis(&self) -> u64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_millis(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// Hand-driven clock for tests and simulations.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start_millis: u64) -> Self {
        Self(AtomicU64::new(start_millis))
    }

    pub fn advance(&self, by: Duration) {
        self.0.fetch_add(by.as_millis() as u64, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_millis(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("token is not valid for this user")]
    Invalid,
    #[error("token has expired")]
    Expired,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuedToken {
    pub token: String,
    pub username: Username,
    pub expires_at_millis: u64,
}

impl IssuedToken {
    /// Expiry in UNIX seconds, rounded up.
    pub fn expires_unix(&self) -> u64 {
        self.expires_at_millis.div_ceil(1000)
    }
}

/// In-memory table of issued tokens.
#[derive(Debug)]
pub struct TokenTable {
    ttl: Duration,
    tokens: HashMap<String, IssuedToken>,
}

impl TokenTable {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            tokens: HashMap::new(),
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    /// Issues a fresh 128-bit token for `username`.
    pub fn issue(&mut self, username: Username, now_millis: u64) -> IssuedToken {
        self.prune(now_millis);
        let ttl = (self.ttl.as_millis() as u64).max(1);
        let mut rng = rand::rng();
        loop {
            let mut raw = [0u8; 16];
            rng.fill_bytes(&mut raw);
            let token = hex::encode(raw);
            if self.tokens.contains_key(&token) {
                continue;
            }
            let issued = IssuedToken {
                token: token.clone(),
                username,
                expires_at_millis: now_millis + ttl,
            };
            self.tokens.insert(token, issued.clone());
            return issued;
        }
    }

    /// Checks that `token` was issued to `username` and is still live.
    pub fn validate(&self, username: &str, token: &str, now_millis: u64) -> Result<&IssuedToken, TokenError> {
        let issued = self.tokens.get(token).ok_or(TokenError::Invalid)?;
        if issued.username.as_str() != username {
            return Err(TokenError::Invalid);
        }
        if now_millis >= issued.expires_at_millis {
            return Err(TokenError::Expired);
        }
        Ok(issued)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn prune(&mut self, now_millis: u64) {
        let horizon = EXPIRED_RETENTION.as_millis() as u64;
        self.tokens
            .retain(|_, t| t.expires_at_millis.saturating_add(horizon) > now_millis);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alice() -> Username {
        Username::new("alice").unwrap()
    }

    #[test]
    fn issued_token_shape() {
        let mut table = TokenTable::new(DEFAULT_TOKEN_TTL);
        let t = table.issue(alice(), 1_000);
        assert_eq!(t.token.len(), 32);
        assert!(t.token.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')));
        assert_eq!(t.expires_at_millis, 301_000);
        assert_eq!(t.expires_unix(), 301);
        assert_ne!(table.issue(alice(), 1_000).token, t.token);
    }

    #[test]
    fn validation_outcomes() {
        let mut table = TokenTable::new(Duration::from_secs(10));
        let t = table.issue(alice(), 0);
        assert!(table.validate("alice", &t.token, 9_999).is_ok());
        assert!(
            table.validate("alice", &t.token, 5_000).is_ok(),
            "reusable until expiry"
        );
        assert_eq!(
            table.validate("alice", &t.token, 10_000).unwrap_err(),
            TokenError::Expired
        );
        assert_eq!(table.validate("bob", &t.token, 0).unwrap_err(), TokenError::Invalid);
        assert_eq!(table.validate("alice", "00ff", 0).unwrap_err(), TokenError::Invalid);
    }

    #[test]
    fn old_tokens_are_pruned() {
        let mut table = TokenTable::new(Duration::from_secs(1));
        table.issue(alice(), 0);
        table.issue(alice(), 10 * 3_600_000);
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn manual_clock_advances() {
        let clock = ManualClock::new(5);
        clock.advance(Duration::from_secs(2));
        assert_eq!(clock.now_millis(), 2_005);
    }
}
