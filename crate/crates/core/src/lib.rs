//! Trigon-based dual-server password authentication.
//!
//! A password is interpreted as an angle ([`password`]), which together with
//! two random primes ([`prime`]) fixes a triangle whose parameters are split
//! between an authentication server and a backend server ([`trigon`],
//! [`store`]). Neither server alone can check a password; a login succeeds
//! only when the backend's token and the authentication server's index
//! satisfy the half-angle identity.
//!
//! The [`server`] module hosts both servers over the line-delimited JSON
//! protocol in [`wire`], [`client`] is the user agent, and [`attack`]
//! reproduces the replay, guessing and stolen-verifier experiments.

pub mod attack;
pub mod client;
pub mod password;
pub mod prime;
pub mod server;
pub mod store;
pub mod token;
pub mod trigon;
pub mod wire;

pub use password::{compute_pi, AsciiInterpretation, IndexScale, PasswordError, PasswordIndex};
pub use store::{AuthServerRecord, BackendRecord, CredentialStore, StoreError, Username};
pub use token::{Clock, IssuedToken, ManualClock, SystemClock, TokenError, TokenTable};
pub use trigon::{
    compute_auth_index, compute_auth_token, derive_trigon_params, verify, AngleConvention, AuthIndex, AuthToken,
    TrigonCredential, DEFAULT_EPSILON,
};
pub use wire::{decode, encode, ErrorCode, MalformedMessage, Message, Password};
