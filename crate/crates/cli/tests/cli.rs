mod support;

use support::{attack, client, Server};

struct Cluster {
    _bs: Server,
    auth: Server,
    dir: tempfile::TempDir,
}

fn cluster(extra: &[&str]) -> Cluster {
    let dir = tempfile::tempdir().unwrap();
    let bs = Server::backend(&dir.path().join("bs.jsonl"));
    let auth = Server::auth(&dir.path().join("as.jsonl"), &bs.addr, extra);
    Cluster { _bs: bs, auth, dir }
}

#[test]
fn register_duplicate_and_login_exit_codes() {
    let c = cluster(&["--seed", "3"]);
    let a = c.auth.addr.as_str();

    let (code, out, _) = client(&["register", "--as", a, "--user", "user2", "--password", "ascii"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out["status"], "registered");

    let (code, out, _) = client(&["register", "--as", a, "--user", "user2", "--password", "ascii"]);
    assert_eq!(code, 1);
    assert_eq!(out["code"], "DUPLICATE_USER");

    let (code, out, _) = client(&["login", "--as", a, "--user", "user2", "--password", "ascii"]);
    assert_eq!(code, 0);
    assert_eq!(out["token"].as_str().unwrap().len(), 32);
    assert!(out["expires_unix"].is_u64());

    let (code, out, _) = client(&["login", "--as", a, "--user", "user2", "--password", "asci"]);
    assert_eq!(code, 1);
    assert_eq!(out["status"], "denied");

    let (code, _, _) = client(&["login", "--as", a, "--user", "nobody", "--password", "asci"]);
    assert_eq!(code, 1);
}

#[test]
fn access_with_mangled_token() {
    let c = cluster(&[]);
    let a = c.auth.addr.as_str();
    client(&["register", "--as", a, "--user", "u", "--password", "secret"]);
    let (_, out, _) = client(&["login", "--as", a, "--user", "u", "--password", "secret"]);
    let token = out["token"].as_str().unwrap();
    let (code, out, _) = client(&["access", "--as", a, "--user", "u", "--token", token]);
    assert_eq!(code, 0);
    assert_eq!(out["status"], "granted");
    let mangled = token.replace(|c: char| c.is_ascii_digit(), "x");
    let (code, out, _) = client(&["access", "--as", a, "--user", "u", "--token", &mangled]);
    assert_eq!(code, 1);
    assert_eq!(out["code"], "TOKEN_INVALID");
}

#[test]
fn unreachable_server_exits_2() {
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap();
    let (code, out, _) = client(&[
        "register",
        "--as",
        &port.to_string(),
        "--user",
        "u",
        "--password",
        "admin",
    ]);
    assert_eq!(code, 2);
    assert_eq!(out["code"], "CONNECT_FAILED");
}

#[test]
fn password_never_echoed() {
    let c = cluster(&[]);
    let a = c.auth.addr.as_str();
    let secret = "Zq9#unique-pw";
    for cmd in ["register", "login"] {
        let (_, _, output) = client(&[cmd, "--as", a, "--user", "echo", "--password", secret]);
        assert!(!String::from_utf8_lossy(&output.stdout).contains(secret));
        assert!(!String::from_utf8_lossy(&output.stderr).contains(secret));
    }
    for file in ["as.jsonl", "bs.jsonl"] {
        let text = std::fs::read_to_string(c.dir.path().join(file)).unwrap();
        assert!(!text.contains(secret));
    }
}

#[test]
fn password_from_stdin() {
    let c = cluster(&[]);
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_trigon-client"))
        .args(["register", "--as", &c.auth.addr, "--user", "piped"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut child| {
            use std::io::Write;
            child.stdin.take().unwrap().write_all(b"fromstdin\n")?;
            child.wait_with_output()
        })
        .unwrap();
    assert!(output.status.success());
    let (code, _, _) = client(&[
        "login",
        "--as",
        &c.auth.addr,
        "--user",
        "piped",
        "--password",
        "fromstdin",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn attack_cli_stolen_fragments() {
    let c = cluster(&["--seed", "8"]);
    let a = c.auth.addr.as_str();
    client(&["register", "--as", a, "--user", "user1", "--password", "admin"]);
    let dict = c.dir.path().join("dict.txt");
    std::fs::write(&dict, "letmein\nadmin\npassword\n").unwrap();
    let as_store = c.dir.path().join("as.jsonl");
    let bs_store = c.dir.path().join("bs.jsonl");
    let run = |fragment: &str| {
        attack(&[
            "stolen",
            "--fragment",
            fragment,
            "--dict",
            dict.to_str().unwrap(),
            "--user",
            "user1",
            "--as-store",
            as_store.to_str().unwrap(),
            "--bs-store",
            bs_store.to_str().unwrap(),
        ])
    };
    assert_eq!(run("as").1["confirmations"], 0);
    assert_eq!(run("bs").1["confirmations"], 0);
    let (code, both) = run("both");
    assert_eq!(code, 0);
    assert_eq!(both["confirmed"][0], "admin");
}

#[test]
fn attack_cli_guess_and_replay() {
    let c = cluster(&[]);
    let a = c.auth.addr.as_str();
    client(&["register", "--as", a, "--user", "user1", "--password", "admin"]);
    let (code, report) = attack(&[
        "guess",
        "--as",
        a,
        "--user",
        "user1",
        "--trials",
        "200",
        "--seed",
        "4",
        "--reference-password",
        "admin",
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["trials"], 200);
    assert_eq!(report["online_matches_offline"], true);

    let (code, report) = attack(&[
        "replay",
        "--link",
        "client-as",
        "--as",
        a,
        "--user",
        "user1",
        "--password",
        "admin",
    ]);
    assert_eq!(code, 0);
    assert!(report["limitation"].as_str().unwrap().starts_with("LIMITATION"));

    let (code, _) = attack(&["replay", "--link", "as-bs"]);
    assert_eq!(code, 1);
}
