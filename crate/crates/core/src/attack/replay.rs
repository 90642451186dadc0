//! Verbatim re-injection of captured protocol lines.
//!
//! Transcripts are captured at the codec layer: each entry is one raw line
//! as it crossed a link. [`RecordingRelay`] sits between two parties and
//! records both directions.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use tokio::io::{AsyncWriteExt, BufReader as AsyncBufReader};
use tokio::net::{TcpListener, TcpStream, ToSocketAddrs};
use tokio::task::JoinHandle;
use tracing::debug;

use crate::client::{ClientError, Connection};
use crate::wire::{self, Message, Password};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Request,
    Response,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub direction: Direction,
    /// The raw line, without its LF.
    pub line: String,
}

impl TranscriptEntry {
    fn from_frame(direction: Direction, frame: &[u8]) -> Self {
        let body = frame.strip_suffix(b"\n").unwrap_or(frame);
        Self {
            direction,
            line: String::from_utf8_lossy(body).into_owned(),
        }
    }

    fn wire_bytes(&self) -> Vec<u8> {
        let mut bytes = self.line.as_bytes().to_vec();
        bytes.push(b'\n');
        bytes
    }
}

pub fn write_transcript(path: impl AsRef<Path>, entries: &[TranscriptEntry]) -> io::Result<()> {
    let mut file = File::create(path)?;
    for entry in entries {
        writeln!(file, "{}", serde_json::to_string(entry).map_err(io::Error::other)?)?;
    }
    file.sync_all()
}

pub fn read_transcript(path: impl AsRef<Path>) -> io::Result<Vec<TranscriptEntry>> {
    BufReader::new(File::open(path)?)
        .lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|l| serde_json::from_str(&l?).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)))
        .collect()
}

/// A line-level TCP relay that records every exchange.
pub struct RecordingRelay {
    local_addr: SocketAddr,
    entries: Arc<Mutex<Vec<TranscriptEntry>>>,
    task: JoinHandle<()>,
}

impl RecordingRelay {
    /// Listens on `listen` and forwards each connection to `upstream`.
    /// With `sink`, entries are also appended to that file as they arrive.
    pub async fn start(listen: impl ToSocketAddrs, upstream: String, sink: Option<PathBuf>) -> io::Result<Self> {
        let listener = TcpListener::bind(listen).await?;
        let local_addr = listener.local_addr()?;
        let entries = Arc::new(Mutex::new(Vec::new()));
        let recorder = Recorder {
            entries: Arc::clone(&entries),
            sink,
        };
        let task = tokio::spawn(async move {
            while let Ok((stream, _)) = listener.accept().await {
                let recorder = recorder.clone();
                let upstream = upstream.clone();
                tokio::spawn(async move {
                    if let Err(err) = relay(stream, &upstream, &recorder).await {
                        debug!(error = %err, "relay connection ended");
                    }
                });
            }
        });
        Ok(Self {
            local_addr,
            entries,
            task,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn entries(&self) -> Vec<TranscriptEntry> {
        self.entries.lock().expect("transcript lock poisoned").clone()
    }
}

impl Drop for RecordingRelay {
    fn drop(&mut self) {
        self.task.abort();
    }
}

#[derive(Clone)]
struct Recorder {
    entries: Arc<Mutex<Vec<TranscriptEntry>>>,
    sink: Option<PathBuf>,
}

impl Recorder {
    fn record(&self, entry: TranscriptEntry) -> io::Result<()> {
        if let Some(path) = &self.sink {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(file, "{}", serde_json::to_string(&entry).map_err(io::Error::other)?)?;
        }
        self.entries.lock().expect("transcript lock poisoned").push(entry);
        Ok(())
    }
}

async fn relay(downstream: TcpStream, upstream: &str, recorder: &Recorder) -> Result<(), Box<dyn std::error::Error>> {
    let upstream = TcpStream::connect(upstream).await?;
    let (down_read, mut down_write) = downstream.into_split();
    let (up_read, mut up_write) = upstream.into_split();
    let mut down_read = AsyncBufReader::new(down_read);
    let mut up_read = AsyncBufReader::new(up_read);
    while let Some(request) = wire::read_frame(&mut down_read).await? {
        recorder.record(TranscriptEntry::from_frame(Direction::Request, &request))?;
        up_write.write_all(&request).await?;
        let Some(response) = wire::read_frame(&mut up_read).await? else {
            break;
        };
        recorder.record(TranscriptEntry::from_frame(Direction::Response, &response))?;
        down_write.write_all(&response).await?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplayLink {
    ClientAs,
    AsBs,
}

impl std::str::FromStr for ReplayLink {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "client-as" => Ok(ReplayLink::ClientAs),
            "as-bs" => Ok(ReplayLink::AsBs),
            other => Err(format!("unknown link `{other}` (expected client-as or as-bs)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayAttempt {
    pub request_type: String,
    pub attempt: usize,
    pub response_type: String,
    pub token_issued: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub scenario: &'static str,
    pub link: ReplayLink,
    pub captured_requests: usize,
    pub attempts: Vec<ReplayAttempt>,
    /// Every replay of the same captured line got a byte-identical reply.
    pub identical_responses: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub store_mutated: Option<bool>,
    pub attacker_learns: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limitation: Option<String>,
}

fn attempt_for(request: &str, attempt: usize, reply: &Message) -> ReplayAttempt {
    ReplayAttempt {
        request_type: request.to_owned(),
        attempt,
        response_type: reply.kind().to_owned(),
        token_issued: matches!(reply, Message::Token { .. }),
        a_t: match reply {
            Message::AuthResp { a_t, .. } => Some(*a_t),
            _ => None,
        },
    }
}

fn learned(reply: &Message) -> String {
    match reply {
        Message::AuthResp { .. } => "a_t only: one scalar, without the alpha-to-user binding or the login index".into(),
        Message::StoreOk { .. } => "store_ok acknowledgement only".into(),
        Message::Token { .. } => "a fresh VO access token".into(),
        other => format!("`{}` reply", other.kind()),
    }
}

/// Replays each captured AS-to-BS request `repeats` times against the backend.
pub async fn run_replay_as_bs(
    bs_addr: impl ToSocketAddrs,
    transcript: &[TranscriptEntry],
    repeats: usize,
    observed_store: Option<&Path>,
) -> Result<ReplayReport, ClientError> {
    let requests: Vec<(&TranscriptEntry, &'static str)> = transcript
        .iter()
        .filter(|e| e.direction == Direction::Request)
        .filter_map(|e| match wire::decode(e.line.as_bytes()) {
            Ok(m @ (Message::AuthReq { .. } | Message::Store { .. })) => Some((e, m.kind())),
            _ => None,
        })
        .collect();

    let before = observed_store.map(std::fs::read).transpose()?;
    let mut conn = Connection::connect(bs_addr).await?;
    let mut attempts = Vec::new();
    let mut identical = true;
    let mut learns = BTreeSet::new();
    for (entry, kind) in &requests {
        let mut first: Option<Vec<u8>> = None;
        for attempt in 1..=repeats {
            let reply = conn.send_raw(&entry.wire_bytes()).await?;
            let bytes = wire::encode(&reply);
            match &first {
                Some(f) => identical &= f == &bytes,
                None => first = Some(bytes),
            }
            learns.insert(learned(&reply));
            attempts.push(attempt_for(kind, attempt, &reply));
        }
    }
    let after = observed_store.map(std::fs::read).transpose()?;

    Ok(ReplayReport {
        scenario: "replay",
        link: ReplayLink::AsBs,
        captured_requests: requests.len(),
        attempts,
        identical_responses: identical,
        store_mutated: before.zip(after).map(|(b, a)| b != a),
        attacker_learns: learns.into_iter().collect(),
        limitation: None,
    })
}

/// Performs one genuine login, captures its line at the codec layer, and
/// replays it verbatim `repeats` times.
pub async fn run_replay_client_as(
    as_addr: impl ToSocketAddrs,
    user: &str,
    password: &str,
    repeats: usize,
) -> Result<ReplayReport, ClientError> {
    let captured = wire::encode(&Message::Login {
        user: user.to_owned(),
        password: Password::new(password),
    });
    let mut conn = Connection::connect(as_addr).await?;
    let original = conn.send_raw(&captured).await?;

    let mut attempts = vec![attempt_for("login", 0, &original)];
    let mut learns = BTreeSet::new();
    let mut identical = true;
    let first = wire::encode(&original);
    for attempt in 1..=repeats {
        let reply = conn.send_raw(&captured).await?;
        identical &= wire::encode(&reply) == first;
        learns.insert(learned(&reply));
        attempts.push(attempt_for("login", attempt, &reply));
    }
    let replay_succeeded = attempts.iter().skip(1).any(|a| a.token_issued);

    Ok(ReplayReport {
        scenario: "replay",
        link: ReplayLink::ClientAs,
        captured_requests: 1,
        attempts,
        identical_responses: identical,
        store_mutated: None,
        attacker_learns: learns.into_iter().collect(),
        limitation: replay_succeeded.then(|| {
            "LIMITATION: login messages carry a static password with no nonce or timestamp; \
             a captured login line obtains a fresh VO token on every replay"
                .to_owned()
        }),
    })
}
