//! The `firedrill` command line.
//!
//! ```text
//! firedrill run      --scenario lab.json (--agent perfect | --trace run.fslog) [--log out.fslog] [--report out.json] [--format json|text]
//! firedrill validate --scenario lab.json
//! firedrill analyze  --csv attempts.csv [--plot phases.csv] [--format text|json|csv]
//! firedrill serve    --scenario lab.json --port 8080 [--lockstep] [--log-dir logs]
//! ```
//!
//! `run` exits 0 when the session succeeds, 2 on timeout and 1 on any error.

use std::fmt::Write as _;
use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use firedrill_core::agents::Agent;
use firedrill_core::analytics::{
    emit_plot_data, load_attempts, per_user_trend, phase_stats, PhaseStats, UserTrend,
};
use firedrill_core::assessment::{build_report, AssessmentReport, Flag, ReportOutcome};
use firedrill_core::scenario::{parse_scenario, Scenario, ScenarioError};
use firedrill_core::session::{deserialize_log, record_session, replay, serialize_log};
use firedrill_server::{Pacing, ServerConfig};
use serde::Serialize;

pub const EXIT_SUCCESS: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_TIMEOUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "firedrill",
    version,
    about = "Fire-emergency training simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one session with a scripted agent, or replay a recorded trace.
    Run(RunArgs),
    /// Check a scenario file and list every problem found.
    Validate(ValidateArgs),
    /// Phase statistics over a CSV of attempt times.
    Analyze(AnalyzeArgs),
    /// Host live sessions over WebSocket.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["agent", "trace"])))]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// perfect, idle, delayed:<seconds> or wrong-extinguisher
    #[arg(long)]
    pub agent: Option<Agent>,
    /// Replay this trace instead of running an agent.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the session trace here.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Write the report JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RunFormat::Json)]
    pub format: RunFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RunFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// CSV with header `user,attempt,time_s`.
    #[arg(long)]
    pub csv: PathBuf,
    /// Write `phase,completed,dnf,mean_s` rows here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AnalyzeFormat::Text)]
    pub format: AnalyzeFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// 0 picks a free port.
    #[arg(long)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Advance one tick per input message instead of on a timer.
    #[arg(long)]
    pub lockstep: bool,
    #[arg(long, default_value_t = 2)]
    pub snapshot_every: u64,
    #[arg(long, default_value = "logs")]
    pub log_dir: PathBuf,
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Run(a) => cmd_run(&a, out),
        Command::Validate(a) => cmd_validate(&a, out),
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Serve(a) => cmd_serve(&a, out),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<u8> {
    let s = load_scenario(&a.scenario)?;
    let (log, report) = match (&a.agent, &a.trace) {
        (Some(agent), _) => {
            let log = record_session(&s, &mut agent.driver())?;
            let report = build_report(&log, &s)?;
            (log, report)
        }
        (None, Some(trace)) => {
            let log = deserialize_log(&read(trace)?)
                .with_context(|| format!("in {}", trace.display()))?;
            let r = replay(&s, &log).with_context(|| format!("replaying {}", trace.display()))?;
            (log, r.report)
        }
        (None, None) => unreachable!("clap requires --agent or --trace"),
    };

    if let Some(path) = &a.log {
        write(path, &serialize_log(&log))?;
    }
    if let Some(path) = &a.report {
        write(path, &report.to_json())?;
    }
    match a.format {
        RunFormat::Json => writeln!(out, "{}", report.to_json())?,
        RunFormat::Text => write!(out, "{}", render_report(&report))?,
    }
    Ok(match report.outcome {
        ReportOutcome::Success => EXIT_SUCCESS,
        ReportOutcome::Timeout => EXIT_TIMEOUT,
    })
}

fn secs(v: Option<f64>, none: &str) -> String {
    v.map_or_else(|| none.to_owned(), |t| format!("{t:.2} s"))
}

pub fn render_report(r: &AssessmentReport) -> String {
    let mut s = String::new();
    let outcome = match r.outcome {
        ReportOutcome::Success => "success",
        ReportOutcome::Timeout => "timeout",
    };
    let flags = if r.flags.is_empty() {
        "none".to_owned()
    } else {
        r.flags
            .iter()
            .map(|f| match f {
                Flag::NoSpray => "no spray",
                Flag::WrongExtinguisherUsed => "wrong extinguisher used",
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    let rows = [
        ("outcome", outcome.to_owned()),
        ("time taken", secs(r.time_taken_s, "DNF")),
        (
            "response time",
            secs(r.response_time_s, "no effective spray"),
        ),
        ("first trigger", secs(r.first_trigger_s, "never")),
        ("aiming score", format!("{:.1} %", r.aiming_score_pct)),
        ("correct usage", format!("{:.1} %", r.correct_usage * 100.0)),
        (
            "evacuation",
            format!("{:.1} %", r.evacuation_completion * 100.0),
        ),
        ("overall", format!("{:.3}", r.overall)),
        ("flags", flags),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<16}{v}");
    }
    let _ = writeln!(s, "fires");
    for f in &r.per_fire {
        let state = match f.extinguished_at_s {
            Some(t) => format!("out at {t:.2} s"),
            None => "still burning".to_owned(),
        };
        let _ = writeln!(s, "  {:<14}{state}", f.id);
    }
    s
}

pub fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<u8> {
    let text = read(&a.scenario)?;
    match parse_scenario(&text) {
        Ok(_) => {
            writeln!(out, "OK")?;
            Ok(EXIT_SUCCESS)
        }
        Err(ScenarioError::Invalid(violations)) => {
            for v in violations {
                writeln!(out, "{v}")?;
            }
            Ok(EXIT_ERROR)
        }
        Err(e) => {
            writeln!(out, "{e}")?;
            Ok(EXIT_ERROR)
        }
    }
}

#[derive(Serialize)]
struct AnalysisJson<'a> {
    phases: &'a [PhaseStats],
    trends: &'a [UserTrend],
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.digits$}"))
}

pub fn render_analysis(phases: &[PhaseStats], trends: &[UserTrend]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<13}{:<10}{:>10}{:>6}{:>10}",
        "phase", "attempts", "completed", "dnf", "mean_s"
    );
    for p in phases {
        let [a, b] = p.phase.attempts();
        let _ = writeln!(
            s,
            "{:<13}{:<10}{:>10}{:>6}{:>10}",
            p.phase.name(),
            format!("{a}-{b}"),
            p.completed,
            p.dnf,
            opt(p.mean_s, 3)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<8}{:>10}{:>9}{:>9}{:>9}",
        "user", "completed", "first_s", "last_s", "delta_s"
    );
    for t in trends {
        let _ = write!(
            s,
            "{:<8}{:>10}{:>9}{:>9}{:>9}",
            t.user,
            t.completions,
            opt(t.first_s, 1),
            opt(t.last_s, 1),
            opt(t.delta_s, 1)
        );
        if t.flagged {
            s.push_str("  fewer than two completions");
        }
        s.push('\n');
    }
    s
}

pub fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<u8> {
    let ds = load_attempts(&read(&a.csv)?).with_context(|| format!("in {}", a.csv.display()))?;
    let phases = phase_stats(&ds);
    let trends = per_user_trend(&ds);
    let plot = emit_plot_data(&phases);
    if let Some(path) = &a.plot {
        write(path, &plot)?;
    }
    match a.format {
        AnalyzeFormat::Text => write!(out, "{}", render_analysis(&phases, &trends))?,
        AnalyzeFormat::Csv => write!(out, "{plot}")?,
        AnalyzeFormat::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&AnalysisJson {
                phases: &phases,
                trends: &trends,
            })?
        )?,
    }
    Ok(EXIT_SUCCESS)
}

pub fn cmd_serve(a: &ServeArgs, out: &mut dyn Write) -> Result<u8> {
    let scenario = Arc::new(load_scenario(&a.scenario)?);
    let config = Arc::new(ServerConfig {
        pacing: if a.lockstep {
            Pacing::Lockstep
        } else {
            Pacing::RealTime
        },
        snapshot_every: a.snapshot_every.max(1),
        log_dir: Some(a.log_dir.clone()),
    });
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .try_init();

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((a.host, a.port))
            .await
            .with_context(|| format!("cannot listen on {}:{}", a.host, a.port))?;
        let addr = listener.local_addr()?;
        writeln!(
            out,
            "listening on ws://{addr} (scenario {}, logs in {})",
            scenario.id,
            a.log_dir.display()
        )?;
        out.flush()?;
        tokio::select! {
            r = firedrill_server::serve(listener, scenario, config) => r?,
            r = tokio::signal::ctrl_c() => {
                r?;
                writeln!(out, "shutting down")?;
            }
        }
        Ok(EXIT_SUCCESS)
    })
}
