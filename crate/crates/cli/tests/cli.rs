mod common;

use std::net::TcpListener;

use common::{firedrill, fixture, spawn_server, stderr, stdout};
use serde_json::Value;

fn lab() -> String {
    fixture("lab.json").display().to_string()
}

#[test]
fn perfect_run_succeeds() {
    let o = firedrill(&["run", "--scenario", &lab(), "--agent", "perfect"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"], "success");
    assert!(v["time_taken_s"].as_f64().unwrap() < 120.0);
}

#[test]
fn idle_run_times_out() {
    let o = firedrill(&[
        "run",
        "--scenario",
        &lab(),
        "--agent",
        "idle",
        "--format",
        "text",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("DNF"));
    assert!(text.contains("no spray"));
}

#[test]
fn trace_replay_reproduces_report_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run1.fslog");
    let rep1 = dir.path().join("r1.json");
    let rep2 = dir.path().join("r2.json");
    let log2 = dir.path().join("run2.fslog");
    let o = firedrill(&[
        "run",
        "--scenario",
        &lab(),
        "--agent",
        "delayed:4",
        "--log",
        log.to_str().unwrap(),
        "--report",
        rep1.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = firedrill(&[
        "run",
        "--scenario",
        &lab(),
        "--trace",
        log.to_str().unwrap(),
        "--log",
        log2.to_str().unwrap(),
        "--report",
        rep2.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(&rep1).unwrap(), std::fs::read(&rep2).unwrap());
    assert_eq!(std::fs::read(&log).unwrap(), std::fs::read(&log2).unwrap());
}

#[test]
fn tampered_trace_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.fslog");
    firedrill(&[
        "run",
        "--scenario",
        &lab(),
        "--agent",
        "perfect",
        "--log",
        log.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&log).unwrap();
    let tampered = text.replacen("\"trig\":true", "\"trig\":false", 3);
    std::fs::write(&log, tampered).unwrap();
    let o = firedrill(&[
        "run",
        "--scenario",
        &lab(),
        "--trace",
        log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("diverged"), "{}", stderr(&o));
}

#[test]
fn run_needs_exactly_one_input() {
    let o = firedrill(&["run", "--scenario", &lab()]);
    assert_eq!(o.status.code(), Some(1));
    let o = firedrill(&[
        "run",
        "--scenario",
        &lab(),
        "--agent",
        "idle",
        "--trace",
        "x.fslog",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_scenario_file() {
    let o = firedrill(&[
        "run",
        "--scenario",
        "/nonexistent/lab.json",
        "--agent",
        "idle",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn validate_ok_and_listing() {
    let o = firedrill(&["validate", "--scenario", &lab()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OK\n");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("lab.json")).unwrap();
    let text = text
        .replace("\"rate\": 10", "\"rate\": -1")
        .replace("\"max_intensity\": 60", "\"max_intensity\": 0");
    std::fs::write(&bad, text).unwrap();
    let o = firedrill(&["validate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let listing = stdout(&o);
    assert_eq!(listing.lines().count(), 2, "{listing}");
    assert!(listing.contains("extinguishers[0].rate"));
    assert!(listing.contains("objects[1].max_intensity"));

    let o = firedrill(&["validate", "--scenario", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analyze_fixture_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.csv");
    let csv = fixture("paper_tables.csv");
    let o = firedrill(&[
        "analyze",
        "--csv",
        csv.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("42.533") && text.contains("36.059") && text.contains("30.100"));
    let plot = std::fs::read_to_string(plot).unwrap();
    assert_eq!(plot.lines().next(), Some("phase,completed,dnf,mean_s"));
    assert_eq!(plot.lines().count(), 4);

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "user,attempt,time_s\n").unwrap();
    let o = firedrill(&["analyze", "--csv", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no attempts"));

    let single = dir.path().join("single.csv");
    std::fs::write(&single, "user,attempt,time_s\nA,1,50\nA,2,DNF\nA,3,41\n").unwrap();
    let o = firedrill(&["analyze", "--csv", single.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with('A') && l.contains("-9.0")));
}

#[test]
fn analyze_csv_format_matches_plot() {
    let csv = fixture("paper_tables.csv");
    let o = firedrill(&["analyze", "--csv", csv.to_str().unwrap(), "--format", "csv"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[1], "initial,15,5,42.53333333333333");
    assert_eq!(rows[3], "advanced,20,0,30.1");
}

#[test]
fn serve_prints_banner_and_rejects_busy_port() {
    let dir = tempfile::tempdir().unwrap();
    let logs = dir.path().join("logs");
    let server = spawn_server(&[
        "--scenario",
        &lab(),
        "--port",
        "0",
        "--log-dir",
        logs.to_str().unwrap(),
    ])
    .unwrap();
    assert!(
        server.url.starts_with("ws://127.0.0.1:"),
        "{}",
        server.banner
    );
    assert!(server.banner.contains("chemistry-lab"));
    drop(server);

    let busy = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = busy.local_addr().unwrap().port().to_string();
    let o = firedrill(&["serve", "--scenario", &lab(), "--port", &port]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot listen"), "{}", stderr(&o));
}

#[test]
fn help_exits_zero() {
    let o = firedrill(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in ["run", "validate", "analyze", "serve"] {
        assert!(stdout(&o).contains(cmd));
    }
}
