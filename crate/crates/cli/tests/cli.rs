use std::ffi::OsStr;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::Duration;

use journex_core::bootstrap::{headless_judge, run_bootstrap, BootstrapConfig};
use journex_core::evaluator::AnswerSet;
use journex_core::synth::{generate, SynthConfig};
use journex_core::{Lexicon, ScanConfig};

fn journex<S: AsRef<OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_journex"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok<S: AsRef<OsStr> + std::fmt::Debug>(args: &[S]) -> Output {
    let out = journex(args);
    assert!(
        out.status.success(),
        "journex {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// A temp dir holding a synthetic corpus, its planted names and seeds.
struct Work {
    dir: tempfile::TempDir,
}

impl Work {
    fn new() -> Self {
        let w = Work {
            dir: tempfile::tempdir().unwrap(),
        };
        ok(&[
            "synth",
            "--corpus-out",
            &w.s("corpus.tsv"),
            "--names-out",
            &w.s("answers.txt"),
            "--seeds-out",
            &w.s("seeds.txt"),
        ]);
        w
    }

    fn p(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.p(name).to_string_lossy().into_owned()
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.p(name)).unwrap()
    }

    /// `bootstrap` with the oracle judge over the planted names.
    fn bootstrap(&self, iterations: u32, extra: &[&str]) -> Output {
        let mut args = vec![
            "bootstrap".to_string(),
            "--corpus".into(),
            self.s("corpus.tsv"),
            "--seeds".into(),
            self.s("seeds.txt"),
            "--iterations".into(),
            iterations.to_string(),
            "--top".into(),
            "200".into(),
            "--judge".into(),
            format!("oracle:{}", self.s("answers.txt")),
        ];
        args.extend(extra.iter().map(|a| a.to_string()));
        ok(&args)
    }
}

#[test]
fn ingest_and_scan() {
    let w = Work::new();
    let out = ok(&[
        "ingest",
        "--input",
        &w.s("corpus.tsv"),
        "--output",
        &w.s("filtered.tsv"),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("articles kept"));
    let filtered = w.read("filtered.tsv");
    assert!(!filtered.is_empty());
    assert!(filtered
        .lines()
        .all(|l| l.contains("学誌") || l.contains("論文誌") || l.contains("学術誌")));

    ok(&[
        "scan",
        "--corpus",
        &w.s("corpus.tsv"),
        "--seeds",
        &w.s("seeds.txt"),
        "--top",
        "50",
        "--output",
        &w.s("ranked.tsv"),
        "--tables-dir",
        &w.s("tables"),
    ]);
    let ranked = w.read("ranked.tsv");
    let mut lines = ranked.lines();
    assert_eq!(
        lines.next(),
        Some("rank\tscore\tleft\ttext\tright\tarticle_id\toffset")
    );
    assert_eq!(lines.count(), 50);
    for t in ["global.tsv", "left.tsv", "right.tsv"] {
        assert!(w.read(&format!("tables/{t}")).starts_with("#position="));
    }
}

#[test]
fn bootstrap_matches_library_and_is_deterministic() {
    let w = Work::new();
    for name in ["a", "b"] {
        w.bootstrap(
            2,
            &[
                "--pool-out",
                &w.s(&format!("pool_{name}.tsv")),
                "--report-out",
                &w.s(&format!("report_{name}.tsv")),
            ],
        );
    }
    assert_eq!(w.read("pool_a.tsv"), w.read("pool_b.tsv"));
    assert_eq!(w.read("report_a.tsv"), w.read("report_b.tsv"));

    let synth = generate(&SynthConfig::default());
    let answers = AnswerSet::new(synth.names.clone(), false);
    let cfg = BootstrapConfig {
        iterations: 2,
        scan: ScanConfig {
            top_n: 200,
            ..ScanConfig::default()
        },
        ..BootstrapConfig::default()
    };
    let (state, report) = run_bootstrap(
        &synth.set,
        Lexicon::load(&synth.seeds).unwrap(),
        &mut headless_judge(answers.clone()),
        &cfg,
        Some(&answers),
    )
    .unwrap();
    assert_eq!(w.read("pool_a.tsv"), state.pool.to_tsv());
    assert_eq!(w.read("report_a.tsv"), report.to_tsv());
}

#[test]
fn resume_from_checkpoint_equals_straight_run() {
    let w = Work::new();
    w.bootstrap(2, &["--pool-out", &w.s("straight.tsv")]);
    w.bootstrap(1, &["--checkpoint", &w.s("s.ckpt")]);
    let out = w.bootstrap(
        2,
        &[
            "--checkpoint",
            &w.s("s.ckpt"),
            "--pool-out",
            &w.s("resumed.tsv"),
        ],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("resuming at iteration 1"));
    assert_eq!(w.read("straight.tsv"), w.read("resumed.tsv"));
}

#[test]
fn eval_reproduces_bootstrap_metrics() {
    let w = Work::new();
    w.bootstrap(
        1,
        &["--pool-out", &w.s("p1.tsv"), "--report-out", &w.s("r1.tsv")],
    );
    ok(&[
        "eval",
        "--pool",
        &w.s("p1.tsv"),
        "--answers",
        &w.s("answers.txt"),
        "--report",
        &w.s("e1.tsv"),
    ]);
    let boot = w.read("r1.tsv");
    let eval = w.read("e1.tsv");
    for metric in ["precision", "recall", "f_measure", "matching_candidates"] {
        let row = |t: &str| t.lines().find(|l| l.starts_with(metric)).map(String::from);
        assert_eq!(row(&boot), row(&eval), "{metric}");
    }

    std::fs::write(w.p("judgments.tsv"), "").unwrap();
    ok(&[
        "eval",
        "--pool",
        &w.s("p1.tsv"),
        "--answers",
        &w.s("answers.txt"),
        "--judgments",
        &w.s("judgments.tsv"),
        "--report",
        &w.s("e2.tsv"),
    ]);
    assert!(w.read("e2.tsv").contains("precision\t0.000000"));
}

#[test]
fn answers_filters_by_corpus_and_length() {
    let w = Work::new();
    let mut names = w.read("answers.txt");
    names.push_str("Never Mentioned Journal\nShort\n");
    std::fs::write(w.p("list.txt"), names).unwrap();
    ok(&[
        "answers",
        "--names",
        &w.s("list.txt"),
        "--corpus",
        &w.s("corpus.tsv"),
        "--output",
        &w.s("ans.txt"),
    ]);
    let got = w.read("ans.txt");
    assert!(!got.contains("Never Mentioned"));
    assert!(!got.lines().any(|l| l == "Short"));
    assert!(got.lines().all(|l| l.chars().count() >= 10));
    assert!(got.lines().count() > 30);
}

#[test]
fn bad_arguments_are_reported() {
    let w = Work::new();
    let out = journex(&[
        "bootstrap",
        "--corpus",
        &w.s("corpus.tsv"),
        "--seeds",
        &w.s("seeds.txt"),
        "--judge",
        "telepathy",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--judge must be"));
    let out = journex(&[
        "scan",
        "--corpus",
        &w.s("corpus.tsv"),
        "--seeds",
        &w.s("seeds.txt"),
        "--lmin",
        "5",
        "--lmax",
        "2",
        "--output",
        &w.s("x.tsv"),
    ]);
    assert!(!out.status.success());
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn free_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port()
}

fn http(port: u16, method: &str, path: &str, body: &str) -> Option<(u16, String)> {
    let mut s = TcpStream::connect(("127.0.0.1", port)).ok()?;
    s.set_read_timeout(Some(Duration::from_secs(10))).ok()?;
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .ok()?;
    let mut raw = String::new();
    s.read_to_string(&mut raw).ok()?;
    let status = raw.split(' ').nth(1)?.parse().ok()?;
    let body = raw
        .split_once("\r\n\r\n")
        .map(|(_, b)| b.to_string())
        .unwrap_or_default();
    Some((status, body))
}

fn start(w: &Work, state: &Path) -> (Server, u16) {
    let port = free_port();
    let child = Command::new(env!("CARGO_BIN_EXE_journex"))
        .args([
            "serve",
            "--state",
            &state.to_string_lossy(),
            "--corpus",
            &w.s("corpus.tsv"),
            "--seeds",
            &w.s("seeds.txt"),
            "--top",
            "100",
            "--port",
            &port.to_string(),
        ])
        .env("RUST_LOG", "warn")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let server = Server(child);
    for _ in 0..200 {
        if http(port, "GET", "/api/status", "").is_some() {
            return (server, port);
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    panic!("server did not come up");
}

fn wait_idle(port: u16) {
    for _ in 0..400 {
        let (_, body) = http(port, "GET", "/api/status", "").unwrap();
        if body.contains("\"running\":false") {
            return;
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    panic!("iteration did not finish");
}

#[test]
fn serve_and_service_judge() {
    let w = Work::new();
    let state = w.p("served.ckpt");
    let (_server, port) = start(&w, &state);
    assert_eq!(http(port, "POST", "/api/iterations", "").unwrap().0, 202);
    wait_idle(port);
    let (status, page) = http(port, "GET", "/api/candidates?limit=2", "").unwrap();
    assert_eq!(status, 200);
    let page: serde_json::Value = serde_json::from_str(&page).unwrap();
    let first = page["items"][0]["text"].as_str().unwrap().to_string();
    let second = page["items"][1]["text"].as_str().unwrap().to_string();
    let post = |t: &str, v: &str| {
        http(
            port,
            "POST",
            "/api/judgments",
            &serde_json::json!({"text": t, "verdict": v}).to_string(),
        )
        .unwrap()
        .0
    };
    assert_eq!(post(&first, "ACCEPT"), 200);
    assert_eq!(post(&second, "REJECT"), 200);

    // A headless run that takes its verdicts from the service.
    let spec = format!("service:http://127.0.0.1:{port}");
    let out = ok(&[
        "bootstrap",
        "--corpus",
        &w.s("corpus.tsv"),
        "--seeds",
        &w.s("seeds.txt"),
        "--iterations",
        "1",
        "--top",
        "100",
        "--judge",
        &spec,
        "--checkpoint",
        &w.s("remote.ckpt"),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("accepted 1"));
    let (_, remote) = journex_core::checkpoint::load(&w.p("remote.ckpt")).unwrap();
    assert!(remote.lexicon.contains(&first));
    assert_eq!(remote.count(journex_core::bootstrap::Verdict::Pending), 98);

    let (_, tsv) = http(port, "GET", "/api/pool.tsv", "").unwrap();
    let (_, saved) = journex_core::checkpoint::load(&state).unwrap();
    assert_eq!(tsv, saved.pool.to_tsv());
}

#[test]
fn service_judge_failure_keeps_state_resumable() {
    let w = Work::new();
    let spec = format!("service:http://127.0.0.1:{}", free_port());
    let out = journex(&[
        "bootstrap",
        "--corpus",
        &w.s("corpus.tsv"),
        "--seeds",
        &w.s("seeds.txt"),
        "--iterations",
        "1",
        "--top",
        "50",
        "--judge",
        &spec,
        "--checkpoint",
        &w.s("down.ckpt"),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("judge unavailable"));
    let (_, state) = journex_core::checkpoint::load(&w.p("down.ckpt")).unwrap();
    assert_eq!(state.iteration, 0);
    assert_eq!(state.pool.len(), 50);
}

#[test]
fn serve_refuses_corrupt_checkpoint() {
    let w = Work::new();
    std::fs::write(
        w.p("bad.ckpt"),
        "journex-checkpoint 1\n@config 1\n{nonsense\n",
    )
    .unwrap();
    let out = journex(&[
        "serve",
        "--state",
        &w.s("bad.ckpt"),
        "--corpus",
        &w.s("corpus.tsv"),
        "--port",
        &free_port().to_string(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusing to start"));
}
