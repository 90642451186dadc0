//! Offline dictionary attack with leaked store fragments.

use serde::Serialize;
use thiserror::Error;

use crate::password::compute_pi;
use crate::store::{AuthServerRecord, BackendRecord, CredentialStore};
use crate::trigon::{compute_auth_token, ideal_auth_token, AngleConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fragment {
    As,
    Bs,
    Both,
}

impl std::str::FromStr for Fragment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "as" => Ok(Fragment::As),
            "bs" => Ok(Fragment::Bs),
            "both" => Ok(Fragment::Both),
            other => Err(format!("unknown fragment `{other}` (expected as, bs or both)")),
        }
    }
}

/// What the attacker stole for one account.
#[derive(Debug, Clone, PartialEq)]
pub enum Leak {
    AuthServer(AuthServerRecord),
    Backend(BackendRecord),
    Both(AuthServerRecord, BackendRecord),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LeakError {
    #[error("the {0} store fragment was not provided")]
    MissingStore(&'static str),
    #[error("user `{user}` is not in the {store} store")]
    MissingUser { user: String, store: &'static str },
}

impl Leak {
    /// Extracts the named fragment for `user` from the available stores.
    pub fn extract(
        fragment: Fragment,
        user: &str,
        as_store: Option<&CredentialStore<AuthServerRecord>>,
        bs_store: Option<&CredentialStore<BackendRecord>>,
    ) -> Result<Self, LeakError> {
        let as_record = || {
            as_store
                .ok_or(LeakError::MissingStore("authentication server"))?
                .get(user)
                .cloned()
                .ok_or_else(|| LeakError::MissingUser {
                    user: user.into(),
                    store: "authentication server",
                })
        };
        let bs_record = || {
            bs_store
                .ok_or(LeakError::MissingStore("backend"))?
                .get(user)
                .cloned()
                .ok_or_else(|| LeakError::MissingUser {
                    user: user.into(),
                    store: "backend",
                })
        };
        Ok(match fragment {
            Fragment::As => Leak::AuthServer(as_record()?),
            Fragment::Bs => Leak::Backend(bs_record()?),
            Fragment::Both => Leak::Both(as_record()?, bs_record()?),
        })
    }

    pub fn fragment(&self) -> Fragment {
        match self {
            Leak::AuthServer(_) => Fragment::As,
            Leak::Backend(_) => Fragment::Bs,
            Leak::Both(..) => Fragment::Both,
        }
    }

    fn user(&self) -> &str {
        match self {
            Leak::AuthServer(r) | Leak::Both(r, _) => r.user.as_str(),
            Leak::Backend(r) => r.user.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StolenVerifierReport {
    pub scenario: &'static str,
    pub fragment: Fragment,
    pub user: String,
    pub dictionary_size: usize,
    /// Whether the leaked data admits any offline test of a candidate.
    pub checkable: bool,
    pub confirmations: usize,
    pub confirmed: Vec<String>,
    pub finding: String,
}

/// Tests every dictionary word against the leaked data.
///
/// A single fragment carries `alpha` alone or `(v, p)` alone, which is one
/// equation in unknowns the attacker does not hold, so no candidate can be
/// confirmed. With both fragments the attacker recomputes `A_T` and compares
/// it with `±cos P_i` of each candidate.
pub fn run_stolen_verifier(
    leak: &Leak,
    dictionary: &[String],
    convention: AngleConvention,
    epsilon: f64,
) -> StolenVerifierReport {
    let confirmed: Vec<String> = match leak {
        Leak::AuthServer(_) | Leak::Backend(_) => Vec::new(),
        Leak::Both(as_rec, bs_rec) => {
            let a_t = compute_auth_token(as_rec.alpha, bs_rec.v, bs_rec.p).value();
            dictionary
                .iter()
                .filter(|word| match compute_pi(word) {
                    Ok(pi) => (a_t - ideal_auth_token(pi, convention).value()).abs() <= epsilon,
                    Err(_) => false,
                })
                .cloned()
                .collect()
        }
    };
    let checkable = matches!(leak, Leak::Both(..));
    let finding = if checkable {
        format!(
            "both fragments leaked: A_T is recomputable offline and {} dictionary word(s) confirmed",
            confirmed.len()
        )
    } else {
        "single fragment leaked: one equation with unknown counterpart parameters, no candidate can be tested"
            .to_owned()
    };
    StolenVerifierReport {
        scenario: "stolen_verifier",
        fragment: leak.fragment(),
        user: leak.user().to_owned(),
        dictionary_size: dictionary.len(),
        checkable,
        confirmations: confirmed.len(),
        confirmed,
        finding,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Username;

    fn reference_leak() -> (AuthServerRecord, BackendRecord) {
        let user = Username::new("user1").unwrap();
        (
            AuthServerRecord {
                user: user.clone(),
                alpha: -3.806764915967407e11,
            },
            BackendRecord {
                user,
                v: 665840,
                p: 120201193169,
            },
        )
    }

    #[test]
    fn single_fragments_confirm_nothing() {
        let (a, b) = reference_leak();
        let dict = crate::attack::dictionary_with("admin", 200, 1);
        for leak in [Leak::AuthServer(a), Leak::Backend(b)] {
            let report = run_stolen_verifier(&leak, &dict, AngleConvention::Supplement, 1e-9);
            assert_eq!(report.confirmations, 0);
            assert!(!report.checkable);
        }
    }

    #[test]
    fn both_fragments_confirm_reference_password() {
        let (a, b) = reference_leak();
        let dict = crate::attack::dictionary_with("admin", 200, 1);
        let report = run_stolen_verifier(&Leak::Both(a, b), &dict, AngleConvention::Supplement, 1e-9);
        assert!(report.confirmed.contains(&"admin".to_owned()));
        assert_eq!(report.fragment, Fragment::Both);
    }

    #[test]
    fn extract_requires_available_store() {
        let err = Leak::extract(Fragment::As, "user1", None, None).unwrap_err();
        assert_eq!(err, LeakError::MissingStore("authentication server"));
        let store = CredentialStore::<BackendRecord>::in_memory();
        assert!(matches!(
            Leak::extract(Fragment::Bs, "user1", None, Some(&store)),
            Err(LeakError::MissingUser { .. })
        ));
    }
}
