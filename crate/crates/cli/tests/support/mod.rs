//! Launching the server binaries as child processes.

#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

/// A server process, killed on drop.
pub struct Server {
    child: Child,
    pub addr: String,
}

impl Server {
    fn spawn(mut command: Command) -> Self {
        let mut child = command
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn server");
        let stdout = child.stdout.take().unwrap();
        let mut line = String::new();
        BufReader::new(stdout)
            .read_line(&mut line)
            .expect("read listening line");
        let value: serde_json::Value = serde_json::from_str(&line).expect("listening line is JSON");
        let addr = value["listening"].as_str().expect("listening address").to_owned();
        Self { child, addr }
    }

    pub fn backend(store: &Path) -> Self {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_trigon-bs"));
        cmd.args(["--listen", "127.0.0.1:0", "--store"]).arg(store);
        Self::spawn(cmd)
    }

    pub fn auth(store: &Path, bs: &str, extra: &[&str]) -> Self {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_trigon-as"));
        cmd.args(["--listen", "127.0.0.1:0", "--bs", bs, "--store"])
            .arg(store)
            .args(extra);
        Self::spawn(cmd)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Runs `trigon-client` and returns its exit code and parsed stdout.
pub fn client(args: &[&str]) -> (i32, serde_json::Value, Output) {
    let output = Command::new(env!("CARGO_BIN_EXE_trigon-client"))
        .args(args)
        .stdin(Stdio::null())
        .output()
        .expect("run trigon-client");
    let stdout = String::from_utf8_lossy(&output.stdout);
    let value = serde_json::from_str(stdout.trim()).unwrap_or(serde_json::Value::Null);
    (output.status.code().unwrap_or(-1), value, output)
}

pub fn attack(args: &[&str]) -> (i32, serde_json::Value) {
    let output = Command::new(env!("CARGO_BIN_EXE_trigon-attack"))
        .args(args)
        .output()
        .expect("run trigon-attack");
    let stdout = String::from_utf8_lossy(&output.stdout);
    let value = serde_json::from_str(stdout.trim()).unwrap_or(serde_json::Value::Null);
    (output.status.code().unwrap_or(-1), value)
}
