//! Completion-time statistics over repeated attempts.
//!
//! Input is CSV with header `user,attempt,time_s`, one row per attempt, where
//! `time_s` is a number of seconds or `DNF`. Attempts 1 to 6 group into three
//! phases of two attempts each.
//!
//! [`emit_plot_data`] writes `phase,completed,dnf,mean_s`; `mean_s` is empty
//! for a phase with no completions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_ATTEMPT: u32 = 6;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("no attempts in input")]
    Empty,
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}: bad time {value:?} (expected seconds or DNF)")]
    BadTime { line: u64, value: String },
    #[error("line {line}: attempt {attempt} outside 1..{MAX_ATTEMPT}")]
    AttemptOutOfRange { line: u64, attempt: u32 },
    #[error("line {line}: second row for {user} attempt {attempt}")]
    Duplicate {
        line: u64,
        user: String,
        attempt: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttemptTime {
    Completed(f64),
    Dnf,
}

impl AttemptTime {
    pub fn seconds(self) -> Option<f64> {
        match self {
            AttemptTime::Completed(s) => Some(s),
            AttemptTime::Dnf => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub user: String,
    pub attempt: u32,
    pub time: AttemptTime,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AttemptDataset {
    pub rows: Vec<Attempt>,
}

impl AttemptDataset {
    pub fn dnf_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.time == AttemptTime::Dnf)
            .count()
    }
}

#[derive(Deserialize)]
struct RawRow {
    user: String,
    attempt: u32,
    time_s: String,
}

fn parse_time(raw: &str) -> Option<AttemptTime> {
    let raw = raw.trim();
    if raw.eq_ignore_ascii_case("dnf") {
        return Some(AttemptTime::Dnf);
    }
    raw.parse::<f64>()
        .ok()
        .filter(|t| t.is_finite() && *t >= 0.0)
        .map(AttemptTime::Completed)
}

pub fn load_attempts(csv_text: &str) -> Result<AttemptDataset, AnalyticsError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let mut seen = BTreeSet::new();
    let mut rows = Vec::new();
    for rec in reader.deserialize::<RawRow>() {
        let rec = rec.map_err(|e| AnalyticsError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        // header is line 1
        let line = rows.len() as u64 + 2;
        if !(1..=MAX_ATTEMPT).contains(&rec.attempt) {
            return Err(AnalyticsError::AttemptOutOfRange {
                line,
                attempt: rec.attempt,
            });
        }
        let time = parse_time(&rec.time_s).ok_or_else(|| AnalyticsError::BadTime {
            line,
            value: rec.time_s.clone(),
        })?;
        if !seen.insert((rec.user.clone(), rec.attempt)) {
            return Err(AnalyticsError::Duplicate {
                line,
                user: rec.user,
                attempt: rec.attempt,
            });
        }
        rows.push(Attempt {
            user: rec.user,
            attempt: rec.attempt,
            time,
        });
    }
    if rows.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    Ok(AttemptDataset { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Initial,
    Improvement,
    Advanced,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Initial, Phase::Improvement, Phase::Advanced];

    pub fn of_attempt(attempt: u32) -> Option<Phase> {
        match attempt {
            1 | 2 => Some(Phase::Initial),
            3 | 4 => Some(Phase::Improvement),
            5 | 6 => Some(Phase::Advanced),
            _ => None,
        }
    }

    pub fn attempts(self) -> [u32; 2] {
        match self {
            Phase::Initial => [1, 2],
            Phase::Improvement => [3, 4],
            Phase::Advanced => [5, 6],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Initial => "initial",
            Phase::Improvement => "improvement",
            Phase::Advanced => "advanced",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phase::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown phase {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub phase: Phase,
    pub completed: usize,
    pub dnf: usize,
    /// Mean over completed attempts; `None` if there were none.
    pub mean_s: Option<f64>,
    /// Fastest completion per user within the phase.
    pub per_user_best: BTreeMap<String, f64>,
}

/// One entry per phase, in phase order.
pub fn phase_stats(ds: &AttemptDataset) -> Vec<PhaseStats> {
    Phase::ALL
        .into_iter()
        .map(|phase| {
            let mut completed = 0;
            let mut dnf = 0;
            let mut total = 0.0;
            let mut per_user_best = BTreeMap::<String, f64>::new();
            for row in ds
                .rows
                .iter()
                .filter(|r| Phase::of_attempt(r.attempt) == Some(phase))
            {
                match row.time {
                    AttemptTime::Dnf => dnf += 1,
                    AttemptTime::Completed(t) => {
                        completed += 1;
                        total += t;
                        per_user_best
                            .entry(row.user.clone())
                            .and_modify(|b| *b = b.min(t))
                            .or_insert(t);
                    }
                }
            }
            PhaseStats {
                phase,
                completed,
                dnf,
                mean_s: (completed > 0).then(|| total / completed as f64),
                per_user_best,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTrend {
    pub user: String,
    pub completions: usize,
    pub first_s: Option<f64>,
    pub last_s: Option<f64>,
    /// `last_s - first_s`; negative means faster. `None` when flagged.
    pub delta_s: Option<f64>,
    /// Fewer than two completed attempts.
    pub flagged: bool,
}

/// Per-user change from first to last completed attempt, users in order of
/// first appearance.
pub fn per_user_trend(ds: &AttemptDataset) -> Vec<UserTrend> {
    let mut by_user: Vec<(&str, Vec<(u32, f64)>)> = Vec::new();
    for row in &ds.rows {
        let i = match by_user.iter().position(|(u, _)| *u == row.user) {
            Some(i) => i,
            None => {
                by_user.push((&row.user, Vec::new()));
                by_user.len() - 1
            }
        };
        if let AttemptTime::Completed(t) = row.time {
            by_user[i].1.push((row.attempt, t));
        }
    }
    by_user
        .into_iter()
        .map(|(user, mut done)| {
            done.sort_by_key(|&(a, _)| a);
            let first_s = done.first().map(|&(_, t)| t);
            let last_s = done.last().map(|&(_, t)| t);
            let flagged = done.len() < 2;
            UserTrend {
                user: user.to_owned(),
                completions: done.len(),
                first_s,
                last_s,
                delta_s: match (flagged, first_s, last_s) {
                    (false, Some(f), Some(l)) => Some(l - f),
                    _ => None,
                },
                flagged,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub phase: Phase,
    pub completed: usize,
    pub dnf: usize,
    pub mean_s: Option<f64>,
}

impl From<&PhaseStats> for PlotRow {
    fn from(s: &PhaseStats) -> Self {
        PlotRow {
            phase: s.phase,
            completed: s.completed,
            dnf: s.dnf,
            mean_s: s.mean_s,
        }
    }
}

pub fn emit_plot_data(stats: &[PhaseStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in stats {
        w.serialize(PlotRow::from(s)).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

pub fn parse_plot_data(text: &str) -> Result<Vec<PlotRow>, AnalyticsError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| {
            r.map_err(|e: csv::Error| AnalyticsError::Csv {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
        })
        .collect()
}
