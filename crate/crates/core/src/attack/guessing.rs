//! Online guessing against a live authentication server.

use serde::Serialize;

use crate::attack::random_passwords;
use crate::client::{ClientError, Connection};
use crate::password::compute_pi;
use crate::trigon::{compute_auth_index, ideal_auth_token, verify, AngleConvention};
use crate::wire::{Message, Password};

#[derive(Debug, Clone)]
pub struct GuessingConfig {
    pub user: String,
    pub trials: usize,
    pub seed: u64,
    /// The account's real password, when known to the experimenter. Enables
    /// the offline comparison and the sanity login.
    pub reference_password: Option<String>,
    pub convention: AngleConvention,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessingReport {
    pub scenario: &'static str,
    pub user: String,
    pub trials: usize,
    pub accepted: usize,
    pub acceptance_rate: f64,
    pub accepted_passwords: Vec<String>,
    pub offline_predicted: Option<usize>,
    pub online_matches_offline: Option<bool>,
    pub reference_password_accepted: Option<bool>,
}

/// How many of `trials` the authentication condition accepts against an
/// account registered with `reference`, evaluated without any server.
pub fn offline_acceptance_count(
    reference: &str,
    trials: &[String],
    convention: AngleConvention,
    epsilon: f64,
) -> usize {
    let Ok(reference_pi) = compute_pi(reference) else {
        return 0;
    };
    let token = ideal_auth_token(reference_pi, convention);
    trials
        .iter()
        .filter(|t| compute_pi(t).is_ok_and(|pi| verify(compute_auth_index(pi), token, convention, epsilon)))
        .count()
}

/// Runs `config.trials` logins with seeded random passwords of 5 to 8
/// printable characters over `conn`.
pub async fn run_guessing(conn: &mut Connection, config: &GuessingConfig) -> Result<GuessingReport, ClientError> {
    let trials = random_passwords(config.trials, 5..=8, config.seed);
    let mut accepted_passwords = Vec::new();
    for guess in &trials {
        let reply = conn
            .request(&Message::Login {
                user: config.user.clone(),
                password: Password::new(guess.clone()),
            })
            .await?;
        if matches!(reply, Message::Token { .. }) {
            accepted_passwords.push(guess.clone());
        }
    }

    let accepted = accepted_passwords.len();
    let offline_predicted = config
        .reference_password
        .as_deref()
        .map(|r| offline_acceptance_count(r, &trials, config.convention, config.epsilon));
    let reference_password_accepted = match &config.reference_password {
        Some(reference) => {
            let reply = conn
                .request(&Message::Login {
                    user: config.user.clone(),
                    password: Password::new(reference.clone()),
                })
                .await?;
            Some(matches!(reply, Message::Token { .. }))
        }
        None => None,
    };

    Ok(GuessingReport {
        scenario: "guessing",
        user: config.user.clone(),
        trials: trials.len(),
        accepted,
        acceptance_rate: if trials.is_empty() {
            0.0
        } else {
            accepted as f64 / trials.len() as f64
        },
        accepted_passwords,
        online_matches_offline: offline_predicted.map(|n| n == accepted),
        offline_predicted,
        reference_password_accepted,
    })
}
