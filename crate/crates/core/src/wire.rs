//! Newline-delimited JSON messages exchanged between the client, the
//! authentication server (AS) and the backend server (BS).
//!
//! Every message is a single JSON object on one LF-terminated line, with a
//! `"type"` discriminator. Exact integers (`v`, `p`) travel as decimal
//! strings; floating-point values use the shortest rendering that parses
//! back to the same bits.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::io::{AsyncBufRead, AsyncBufReadExt, AsyncReadExt, AsyncWrite, AsyncWriteExt};

use crate::store::decimal_string;

/// Longest accepted line, excluding the terminating LF.
pub const MAX_LINE_LEN: usize = 64 * 1024;

/// Warning text returned with every login denial.
pub const DENY_WARNING: &str = "WARNING: invalid credentials; access to VO denied";

/// A password in transit. Its `Debug` output is redacted.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Password(String);

impl Password {
    pub fn new(password: impl Into<String>) -> Self {
        Self(password.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Password {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Password(<redacted>)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    UnknownUser,
    DuplicateUser,
    AuthFailed,
    BadRequest,
    DegeneratePassword,
    TokenInvalid,
    TokenExpired,
    BackendUnavailable,
    /// Local failure on the responding server, such as a store write error.
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::UnknownUser => "UNKNOWN_USER",
            ErrorCode::DuplicateUser => "DUPLICATE_USER",
            ErrorCode::AuthFailed => "AUTH_FAILED",
            ErrorCode::BadRequest => "BAD_REQUEST",
            ErrorCode::DegeneratePassword => "DEGENERATE_PASSWORD",
            ErrorCode::TokenInvalid => "TOKEN_INVALID",
            ErrorCode::TokenExpired => "TOKEN_EXPIRED",
            ErrorCode::BackendUnavailable => "BACKEND_UNAVAILABLE",
            ErrorCode::Internal => "INTERNAL",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Message {
    // client -> AS
    Register {
        user: String,
        password: Password,
    },
    Login {
        user: String,
        password: Password,
    },
    Access {
        user: String,
        token: String,
    },

    // AS -> client
    Registered {
        user: String,
    },
    Token {
        user: String,
        token: String,
        expires_unix: u64,
    },
    Deny {
        warning: String,
    },
    Granted {
        resource: String,
    },

    // AS -> BS
    Store {
        user: String,
        #[serde(with = "decimal_string")]
        v: i64,
        #[serde(with = "decimal_string")]
        p: u64,
    },
    AuthReq {
        user: String,
        alpha: f64,
    },

    // BS -> AS
    StoreOk {
        user: String,
    },
    AuthResp {
        user: String,
        a_t: f64,
    },

    // either server
    Error {
        code: ErrorCode,
        message: String,
    },
}

impl Message {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Message::Error {
            code,
            message: message.into(),
        }
    }

    pub fn deny() -> Self {
        Message::Deny {
            warning: DENY_WARNING.to_owned(),
        }
    }

    /// The `"type"` discriminator.
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Register { .. } => "register",
            Message::Login { .. } => "login",
            Message::Access { .. } => "access",
            Message::Registered { .. } => "registered",
            Message::Token { .. } => "token",
            Message::Deny { .. } => "deny",
            Message::Granted { .. } => "granted",
            Message::Store { .. } => "store",
            Message::AuthReq { .. } => "auth_req",
            Message::StoreOk { .. } => "store_ok",
            Message::AuthResp { .. } => "auth_resp",
            Message::Error { .. } => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed message: {0}")]
pub struct MalformedMessage(pub String);

/// Renders `message` as one LF-terminated line.
pub fn encode(message: &Message) -> Vec<u8> {
    let mut line = serde_json::to_vec(message).expect("messages always serialize");
    line.push(b'\n');
    line
}

/// Strictly parses one line, with or without its terminating LF.
pub fn decode(line: &[u8]) -> Result<Message, MalformedMessage> {
    let body = line.strip_suffix(b"\n").unwrap_or(line);
    if body.len() > MAX_LINE_LEN {
        return Err(MalformedMessage(format!("line exceeds {MAX_LINE_LEN} bytes")));
    }
    if body.contains(&b'\n') {
        return Err(MalformedMessage("embedded line feed".into()));
    }
    serde_json::from_slice(body).map_err(|e| MalformedMessage(e.to_string()))
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line exceeds {MAX_LINE_LEN} bytes")]
    TooLong,
    #[error("connection closed mid-line")]
    Truncated,
}

/// Reads one raw line (including its LF). `Ok(None)` on clean EOF.
pub async fn read_frame<R>(reader: &mut R) -> Result<Option<Vec<u8>>, FrameError>
where
    R: AsyncBufRead + Unpin,
{
    let mut buf = Vec::new();
    let limit = (MAX_LINE_LEN + 1) as u64;
    let n = (&mut *reader).take(limit).read_until(b'\n', &mut buf).await?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() != Some(&b'\n') {
        return Err(if buf.len() as u64 >= limit {
            FrameError::TooLong
        } else {
            FrameError::Truncated
        });
    }
    Ok(Some(buf))
}

pub async fn write_message<W>(writer: &mut W, message: &Message) -> std::io::Result<()>
where
    W: AsyncWrite + Unpin,
{
    writer.write_all(&encode(message)).await?;
    writer.flush().await
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn auth_req_carries_exact_alpha() {
        let m = Message::AuthReq {
            user: "user1".into(),
            alpha: -3.806764915967407e11,
        };
        let line = encode(&m);
        let text = std::str::from_utf8(&line).unwrap();
        assert!(text.ends_with('\n') && text.matches('\n').count() == 1);
        assert!(text.contains("\"auth_req\"") && text.contains("\"user1\""));
        let Message::AuthReq { alpha, .. } = decode(&line).unwrap() else {
            panic!()
        };
        assert_eq!(alpha.to_bits(), (-3.806764915967407e11f64).to_bits());
    }

    #[test]
    fn auth_resp_round_trips_bitwise() {
        let m = Message::AuthResp {
            user: "user2".into(),
            a_t: 0.8704459226549521,
        };
        let Message::AuthResp { a_t, .. } = decode(&encode(&m)).unwrap() else {
            panic!()
        };
        assert_eq!(a_t.to_bits(), 0.8704459226549521f64.to_bits());
    }

    #[test]
    fn decodes_login() {
        let m = decode(br#"{"type":"login","user":"user1","password":"admin"}"#).unwrap();
        assert_eq!(
            m,
            Message::Login {
                user: "user1".into(),
                password: Password::new("admin")
            }
        );
    }

    #[test]
    fn store_uses_decimal_strings() {
        let m = Message::Store {
            user: "u".into(),
            v: -300790,
            p: 660523266551,
        };
        let text = String::from_utf8(encode(&m)).unwrap();
        assert!(text.contains(r#""v":"-300790""#) && text.contains(r#""p":"660523266551""#));
        assert!(decode(br#"{"type":"store","user":"u","v":5,"p":"7"}"#).is_err());
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            &br#"{"type":"hello","user":"x"}"#[..],
            br#"{"type":"login","user":"user1","password":"admin""#,
            br#"{"type":"login","user":"user1"}"#,
            br#"{"user":"user1","password":"admin"}"#,
            br#"{"type":"login","user":"u","password":"p","extra":1}"#,
            br#"{"type":"error","code":"NOPE","message":"m"}"#,
            b"{\"type\":\"deny\",\n\"warning\":\"w\"}",
            b"\xff\xfe",
            b"",
            b"null",
        ] {
            assert!(decode(bad).is_err(), "{:?}", String::from_utf8_lossy(bad));
        }
    }

    #[test]
    fn rejects_oversized_line() {
        let mut line = br#"{"type":"deny","warning":""#.to_vec();
        line.extend(std::iter::repeat_n(b'a', MAX_LINE_LEN));
        line.extend(br#""}"#);
        assert!(decode(&line).is_err());
    }

    #[test]
    fn error_codes_render() {
        let m = Message::error(ErrorCode::BackendUnavailable, "down");
        let text = String::from_utf8(encode(&m)).unwrap();
        assert!(text.contains(r#""code":"BACKEND_UNAVAILABLE""#));
        assert_eq!(ErrorCode::TokenExpired.to_string(), "TOKEN_EXPIRED");
    }

    #[test]
    fn password_debug_is_redacted() {
        let m = Message::Login {
            user: "u".into(),
            password: Password::new("hunter22"),
        };
        assert!(!format!("{m:?}").contains("hunter22"));
    }

    #[tokio::test]
    async fn frames_lines() {
        let data = [encode(&Message::deny()), b"{\"type\":\"granted\"".to_vec()].concat();
        let mut reader = tokio::io::BufReader::new(&data[..]);
        let first = read_frame(&mut reader).await.unwrap().unwrap();
        assert_eq!(decode(&first).unwrap(), Message::deny());
        assert!(matches!(read_frame(&mut reader).await, Err(FrameError::Truncated)));
        assert!(read_frame(&mut reader).await.unwrap().is_none());
    }

    #[tokio::test]
    async fn frames_reject_long_lines() {
        let data = vec![b'x'; MAX_LINE_LEN + 10];
        let mut reader = tokio::io::BufReader::new(&data[..]);
        assert!(matches!(read_frame(&mut reader).await, Err(FrameError::TooLong)));
    }

    fn text() -> impl Strategy<Value = String> {
        "[ -~\u{a0}-\u{2fff}]{0,24}"
    }

    fn finite() -> impl Strategy<Value = f64> {
        proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO
    }

    fn message() -> impl Strategy<Value = Message> {
        let code = prop_oneof![
            Just(ErrorCode::UnknownUser),
            Just(ErrorCode::DuplicateUser),
            Just(ErrorCode::AuthFailed),
            Just(ErrorCode::BadRequest),
            Just(ErrorCode::DegeneratePassword),
            Just(ErrorCode::TokenInvalid),
            Just(ErrorCode::TokenExpired),
            Just(ErrorCode::BackendUnavailable),
            Just(ErrorCode::Internal),
        ];
        prop_oneof![
            (text(), text()).prop_map(|(user, pw)| Message::Register {
                user,
                password: Password::new(pw)
            }),
            (text(), text()).prop_map(|(user, pw)| Message::Login {
                user,
                password: Password::new(pw)
            }),
            (text(), text()).prop_map(|(user, token)| Message::Access { user, token }),
            text().prop_map(|user| Message::Registered { user }),
            (text(), text(), any::<u64>()).prop_map(|(user, token, expires_unix)| Message::Token {
                user,
                token,
                expires_unix
            }),
            text().prop_map(|warning| Message::Deny { warning }),
            text().prop_map(|resource| Message::Granted { resource }),
            (text(), any::<i64>(), any::<u64>()).prop_map(|(user, v, p)| Message::Store { user, v, p }),
            (text(), finite()).prop_map(|(user, alpha)| Message::AuthReq { user, alpha }),
            text().prop_map(|user| Message::StoreOk { user }),
            (text(), finite()).prop_map(|(user, a_t)| Message::AuthResp { user, a_t }),
            (code, text()).prop_map(|(code, message)| Message::Error { code, message }),
        ]
    }

    fn float_bits(m: &Message) -> Option<u64> {
        match m {
            Message::AuthReq { alpha, .. } => Some(alpha.to_bits()),
            Message::AuthResp { a_t, .. } => Some(a_t.to_bits()),
            _ => None,
        }
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(m in message()) {
            let back = decode(&encode(&m)).unwrap();
            prop_assert_eq!(float_bits(&back), float_bits(&m));
            prop_assert_eq!(back, m);
        }

        #[test]
        fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            let _ = decode(&bytes);
        }
    }
}
