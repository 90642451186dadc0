//! Line-oriented persistence for each server's half of a split credential.
//!
//! A store file holds one JSON object per LF-terminated line. Backend
//! integers are written as decimal strings so they survive any JSON reader
//! unchanged; `alpha` is written in shortest round-trip form.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_USERNAME_LEN: usize = 64;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("user `{0}` is already registered")]
    DuplicateUser(String),
    #[error("corrupt store file at line {line}: {reason}")]
    CorruptStoreFile { line: usize, reason: String },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("username must be 1-{MAX_USERNAME_LEN} characters of [A-Za-z0-9_.-]")]
pub struct InvalidUsername;

/// A validated account name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Username(String);

impl Username {
    pub fn new(name: impl Into<String>) -> Result<Self, InvalidUsername> {
        let name = name.into();
        let valid = !name.is_empty()
            && name.len() <= MAX_USERNAME_LEN
            && name
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'));
        if valid {
            Ok(Self(name))
        } else {
            Err(InvalidUsername)
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Username {
    type Error = InvalidUsername;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Username> for String {
    fn from(value: Username) -> Self {
        value.0
    }
}

impl fmt::Display for Username {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for Username {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Serializes integers as JSON strings of their decimal rendering.
pub(crate) mod decimal_string {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(value: &T, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(deserializer: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(deserializer)?;
        // Reject forms such as "+5" or " 5" that `FromStr` would accept.
        let digits = s.strip_prefix('-').unwrap_or(&s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(de::Error::custom(format!("`{s}` is not a decimal integer")));
        }
        s.parse().map_err(de::Error::custom)
    }
}

/// A record that can live in a [`CredentialStore`].
pub trait StoredRecord: Serialize + DeserializeOwned + Clone {
    fn username(&self) -> &Username;

    /// Checks invariants that the type system does not carry.
    fn validate(&self) -> Result<(), String>;
}

/// The authentication server's half: the username and `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuthServerRecord {
    pub user: Username,
    pub alpha: f64,
}

impl StoredRecord for AuthServerRecord {
    fn username(&self) -> &Username {
        &self.user
    }

    fn validate(&self) -> Result<(), String> {
        if self.alpha.is_finite() {
            Ok(())
        } else {
            Err("alpha must be finite".into())
        }
    }
}

/// The backend server's half: the side difference `v` and product `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendRecord {
    pub user: Username,
    #[serde(with = "decimal_string")]
    pub v: i64,
    #[serde(with = "decimal_string")]
    pub p: u64,
}

impl StoredRecord for BackendRecord {
    fn username(&self) -> &Username {
        &self.user
    }

    fn validate(&self) -> Result<(), String> {
        if self.p == 0 {
            return Err("p must be positive".into());
        }
        if self.v == 0 {
            return Err("v must be non-zero".into());
        }
        Ok(())
    }
}

/// In-memory record map, optionally journaled to an append-only file.
#[derive(Debug)]
pub struct CredentialStore<R> {
    records: BTreeMap<Username, R>,
    journal: Option<PathBuf>,
}

impl<R: StoredRecord> Default for CredentialStore<R> {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl<R: StoredRecord> CredentialStore<R> {
    /// A store with no backing file.
    pub fn in_memory() -> Self {
        Self {
            records: BTreeMap::new(),
            journal: None,
        }
    }

    /// Loads `path` (missing file = empty store) and appends every later
    /// `put` to it.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        let mut store = if path.exists() {
            Self::load(&path)?
        } else {
            File::create(&path)?.sync_all()?;
            Self::in_memory()
        };
        store.journal = Some(path);
        Ok(store)
    }

    /// Reads a store file. The result has no journal attached.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let reader = BufReader::new(File::open(path)?);
        let mut store = Self::in_memory();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let corrupt = |reason: String| StoreError::CorruptStoreFile { line: line_no, reason };
            let line = line.map_err(|e| corrupt(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: R = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
            record.validate().map_err(corrupt)?;
            let user = record.username().clone();
            if store.records.insert(user.clone(), record).is_some() {
                return Err(corrupt(format!("duplicate user `{user}`")));
            }
        }
        Ok(store)
    }

    /// Writes a full snapshot to `path`, replacing it atomically.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        {
            let mut file = File::create(&tmp)?;
            for record in self.records.values() {
                writeln!(file, "{}", render(record)?)?;
            }
            file.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Inserts a new record, appending it to the journal first when present.
    pub fn put(&mut self, record: R) -> Result<(), StoreError> {
        record.validate().map_err(StoreError::InvalidRecord)?;
        let user = record.username().clone();
        if self.records.contains_key(&user) {
            return Err(StoreError::DuplicateUser(user.to_string()));
        }
        if let Some(path) = &self.journal {
            let mut file = OpenOptions::new().append(true).create(true).open(path)?;
            writeln!(file, "{}", render(&record)?)?;
            file.sync_data()?;
        }
        self.records.insert(user, record);
        Ok(())
    }

    pub fn get(&self, username: &str) -> Option<&R> {
        self.records.get(username)
    }

    pub fn contains(&self, username: &str) -> bool {
        self.records.contains_key(username)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &R> {
        self.records.values()
    }

    pub fn journal_path(&self) -> Option<&Path> {
        self.journal.as_deref()
    }
}

fn render<R: Serialize>(record: &R) -> Result<String, StoreError> {
    serde_json::to_string(record).map_err(|e| StoreError::InvalidRecord(e.to_string()))
}
