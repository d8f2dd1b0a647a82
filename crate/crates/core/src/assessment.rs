//! Post-session scorecard computed from a session log.
//!
//! Four criteria are scored: response time, aiming accuracy, correct use of
//! the extinguisher and completion of the evacuation route. Spray samples are
//! counted per tick.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{content_hash, Scenario};
use crate::session::{SessionLog, SessionOutcome};
use crate::sim::{Event, SprayRecord};

/// A spray tick counts as a hit on the fire base when its effectiveness is at
/// least this high (and the fire is within range).
pub const EFFECTIVE_E_MIN: f64 = 0.25;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssessmentError {
    #[error("session did not run to completion")]
    Incomplete,
    #[error("log belongs to scenario {log}, not {scenario}")]
    ScenarioMismatch { log: String, scenario: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// The trigger was never pulled with an extinguisher selected.
    NoSpray,
    /// At least one spray tick used an extinguisher not rated for the fire.
    WrongExtinguisherUsed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportOutcome {
    Success,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireResult {
    pub id: String,
    pub extinguished_at_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    #[serde(rename = "effective_E_min")]
    pub effective_e_min: f64,
    /// What one spray sample is: a simulation tick.
    pub hit_unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub outcome: ReportOutcome,
    /// `None` means did-not-finish.
    pub time_taken_s: Option<f64>,
    pub dnf: bool,
    pub response_time_s: Option<f64>,
    pub first_trigger_s: Option<f64>,
    pub aiming_score_pct: f64,
    pub correct_usage: f64,
    pub evacuation_completion: f64,
    /// Unweighted mean of aiming (as a fraction), correct usage and evacuation.
    pub overall: f64,
    pub flags: Vec<Flag>,
    pub per_fire: Vec<FireResult>,
    pub config: ReportConfig,
}

impl AssessmentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Hit on the fire base: effective enough and within range.
pub fn is_effective(spray: &SprayRecord) -> bool {
    spray
        .geometry
        .is_some_and(|g| g.effectiveness >= EFFECTIVE_E_MIN && g.d < spray.d_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AimingScore {
    pub pct: f64,
    pub hits: usize,
    pub samples: usize,
}

impl AimingScore {
    pub fn no_spray(&self) -> bool {
        self.samples == 0
    }
}

/// Percentage of spray ticks that hit the fire base.
pub fn aiming_score(log: &SessionLog) -> AimingScore {
    let samples = log.sprays.len();
    let hits = log.sprays.iter().filter(|s| is_effective(s)).count();
    let pct = if samples == 0 {
        0.0
    } else {
        hits as f64 / samples as f64 * 100.0
    };
    AimingScore { pct, hits, samples }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseTime {
    /// Start of the first tick with an effective spray.
    pub first_effective_s: Option<f64>,
    /// Start of the first tick with the trigger held.
    pub first_trigger_s: Option<f64>,
}

pub fn response_time(log: &SessionLog) -> ResponseTime {
    let at = |tick: u64| tick as f64 * log.tick_dt;
    ResponseTime {
        first_effective_s: log
            .sprays
            .iter()
            .find(|s| is_effective(s))
            .map(|s| at(s.tick)),
        first_trigger_s: log
            .samples
            .iter()
            .position(|s| s.trigger)
            .map(|t| at(t as u64)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectUsage {
    pub fraction: f64,
    pub no_spray: bool,
}

/// Share of spray ticks that used an extinguisher rated for the target fire.
pub fn correct_usage(log: &SessionLog) -> CorrectUsage {
    let n = log.sprays.len();
    if n == 0 {
        return CorrectUsage {
            fraction: 0.0,
            no_spray: true,
        };
    }
    let ok = log.sprays.iter().filter(|s| !s.wrong_extinguisher).count();
    CorrectUsage {
        fraction: ok as f64 / n as f64,
        no_spray: false,
    }
}

/// `(waypoints reached in order + exit reached) / (waypoints + 1)`.
pub fn evacuation_completion(log: &SessionLog, s: &Scenario) -> f64 {
    let waypoints = log
        .events
        .iter()
        .filter(|e| matches!(e.event, Event::WaypointReached(_)))
        .count()
        .min(s.evacuation.waypoints.len());
    let exit = log.events.iter().any(|e| e.event == Event::ExitReached);
    (waypoints + usize::from(exit)) as f64 / (s.evacuation.waypoints.len() + 1) as f64
}

pub fn build_report(log: &SessionLog, s: &Scenario) -> Result<AssessmentReport, AssessmentError> {
    let outcome = match log.outcome {
        SessionOutcome::Success => ReportOutcome::Success,
        SessionOutcome::Timeout => ReportOutcome::Timeout,
        SessionOutcome::Aborted => return Err(AssessmentError::Incomplete),
    };
    let hash = content_hash(s);
    if log.scenario_hash != hash {
        return Err(AssessmentError::ScenarioMismatch {
            log: log.scenario_hash.clone(),
            scenario: hash,
        });
    }

    let aim = aiming_score(log);
    let response = response_time(log);
    let usage = correct_usage(log);
    let evacuation = evacuation_completion(log, s);

    let mut flags = Vec::new();
    if aim.no_spray() {
        flags.push(Flag::NoSpray);
    }
    if log.sprays.iter().any(|s| s.wrong_extinguisher) {
        flags.push(Flag::WrongExtinguisherUsed);
    }

    // fires in ignition order, with the end of the tick they went out in
    let mut per_fire: Vec<FireResult> = Vec::new();
    for e in &log.events {
        match &e.event {
            Event::Ignite(id) | Event::Spread(id) => per_fire.push(FireResult {
                id: id.clone(),
                extinguished_at_s: None,
            }),
            Event::Extinguished(id) => {
                if let Some(f) = per_fire.iter_mut().find(|f| &f.id == id) {
                    f.extinguished_at_s = Some((e.tick + 1) as f64 * log.tick_dt);
                }
            }
            _ => {}
        }
    }

    let overall = (aim.pct / 100.0 + usage.fraction + evacuation) / 3.0;
    let success = outcome == ReportOutcome::Success;
    Ok(AssessmentReport {
        outcome,
        time_taken_s: success.then(|| log.duration()),
        dnf: !success,
        response_time_s: response.first_effective_s,
        first_trigger_s: response.first_trigger_s,
        aiming_score_pct: aim.pct,
        correct_usage: usage.fraction,
        evacuation_completion: evacuation,
        overall,
        flags,
        per_fire,
        config: ReportConfig {
            effective_e_min: EFFECTIVE_E_MIN,
            hit_unit: "tick".into(),
        },
    })
}
