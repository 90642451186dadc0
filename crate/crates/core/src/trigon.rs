//! Trigon parameters, the backend's authentication token and the
//! authentication condition.
//!
//! The two prime sides `a` and `a'` enclose the password angle `P_i`. The
//! authentication server keeps `alpha = 2aa' - a''^2`, the backend keeps
//! `v = a - a'` and `p = aa'`. Recombined, `(alpha + v^2) / 2p` equals the
//! cosine of the enclosed angle, and the login check is the half-angle
//! identity applied to `P_i / 2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::password::PasswordIndex;

/// Default absolute tolerance of the authentication condition.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Which sign the law of cosines uses for the opposite side `a''`.
///
/// `Interior` treats `P_i` as the angle between the two sides, so the
/// backend token is `cos P_i` and the check is on `sin^2(A_I)`.
/// `Supplement` treats it as the exterior angle, giving a token of
/// `-cos P_i` and a check on `cos^2(A_I)`; this reading reproduces the
/// published reference tables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleConvention {
    #[default]
    Interior,
    Supplement,
}

impl AngleConvention {
    fn sign(self) -> f64 {
        match self {
            AngleConvention::Interior => 1.0,
            AngleConvention::Supplement => -1.0,
        }
    }
}

impl fmt::Display for AngleConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AngleConvention::Interior => "interior",
            AngleConvention::Supplement => "supplement",
        })
    }
}

impl FromStr for AngleConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "interior" => Ok(AngleConvention::Interior),
            "supplement" => Ok(AngleConvention::Supplement),
            other => Err(format!("unknown angle convention `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrigonError {
    #[error("trigon sides must differ")]
    SidesEqual,
}

/// Everything fixed at registration time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigonCredential {
    pub a: u64,
    pub a_prime: u64,
    pub v: i64,
    pub p: u64,
    pub alpha: f64,
    pub convention: AngleConvention,
}

impl TrigonCredential {
    /// `a''^2` from the law of cosines for this credential's convention.
    /// Only needed to cross-check `alpha`; registration never forms `a''`.
    pub fn opposite_side_squared(&self, pi: PasswordIndex) -> f64 {
        let (a, b) = (self.a as f64, self.a_prime as f64);
        a * a + b * b - self.convention.sign() * 2.0 * a * b * pi.radians().cos()
    }
}

/// Derives the split credential from two prime sides and the password angle.
pub fn derive_trigon_params(
    a: u64,
    a_prime: u64,
    pi: PasswordIndex,
    convention: AngleConvention,
) -> Result<TrigonCredential, TrigonError> {
    if a == a_prime {
        return Err(TrigonError::SidesEqual);
    }
    let v = a as i64 - a_prime as i64;
    let p = a * a_prime;
    let v_sq = (v as f64) * (v as f64);
    let alpha = convention.sign() * 2.0 * (p as f64) * pi.radians().cos() - v_sq;
    Ok(TrigonCredential {
        a,
        a_prime,
        v,
        p,
        alpha,
        convention,
    })
}

/// The authentication index `A_I = P_i / 2`, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AuthIndex(f64);

impl AuthIndex {
    pub fn from_degrees(degrees: f64) -> Self {
        Self(degrees)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }
}

pub fn compute_auth_index(pi: PasswordIndex) -> AuthIndex {
    AuthIndex(pi.degrees() / 2.0)
}

/// The backend's per-login response scalar `A_T`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthToken(f64);

impl AuthToken {
    pub fn new(value: f64) -> Self {
        Self(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `A_T = (alpha + v^2) / 2p`. `p` must be positive.
pub fn compute_auth_token(alpha: f64, v: i64, p: u64) -> AuthToken {
    let v = v as f64;
    AuthToken((alpha + v * v) / (2.0 * p as f64))
}

/// The token the backend would return for a credential registered at `pi`,
/// without rounding: `cos P_i` (interior) or `-cos P_i` (supplement).
pub fn ideal_auth_token(pi: PasswordIndex, convention: AngleConvention) -> AuthToken {
    AuthToken(convention.sign() * pi.radians().cos())
}

/// The authentication condition: the squared half-angle function of
/// `auth_index` must equal `(1 - A_T) / 2` within `epsilon`.
pub fn verify(auth_index: AuthIndex, token: AuthToken, convention: AngleConvention, epsilon: f64) -> bool {
    verification_residual(auth_index, token, convention) <= epsilon
}

/// Absolute gap between the two sides of the authentication condition.
pub fn verification_residual(auth_index: AuthIndex, token: AuthToken, convention: AngleConvention) -> f64 {
    let half = auth_index.degrees().to_radians();
    let lhs = match convention {
        AngleConvention::Interior => half.sin().powi(2),
        AngleConvention::Supplement => half.cos().powi(2),
    };
    (lhs - (1.0 - token.value()) / 2.0).abs()
}
