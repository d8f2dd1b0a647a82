//! Session recording and exact replay.
//!
//! A [`SessionLog`] stores every input sample that drove a session together
//! with everything the simulation derived from it. Because the simulation is
//! deterministic, re-running the samples must reproduce the derived part
//! exactly; [`replay`] checks that.

mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessment::{build_report, AssessmentError, AssessmentReport};
use crate::scenario::{content_hash, Scenario};
use crate::sim::{
    init_session, Event, InputSample, Outcome, SimError, SimState, SprayRecord, TickOutput,
};

pub use trace::{deserialize_log, serialize_log, TraceError};

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionOutcome {
    Success,
    Timeout,
    /// The session was cut short (client left, abort request).
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedEvent {
    #[serde(rename = "t")]
    pub tick: u64,
    #[serde(rename = "ev")]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub version: u32,
    pub scenario_id: String,
    pub scenario_hash: String,
    pub tick_dt: f64,
    /// One sample per simulated tick.
    pub samples: Vec<InputSample>,
    pub sprays: Vec<SprayRecord>,
    /// Sorted by tick.
    pub events: Vec<LoggedEvent>,
    pub outcome: SessionOutcome,
}

impl SessionLog {
    pub fn ticks(&self) -> u64 {
        self.samples.len() as u64
    }

    pub fn duration(&self) -> f64 {
        self.ticks() as f64 * self.tick_dt
    }

    pub fn is_complete(&self) -> bool {
        self.outcome != SessionOutcome::Aborted
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("input sample for tick {tick} rejected: {reason}")]
    InvalidSample { tick: u64, reason: String },
    #[error("input ran out after {ticks} ticks with the session still running")]
    Truncated { ticks: u64 },
    #[error("session already finished")]
    Finished,
    #[error("log was recorded against scenario {found}, not {expected}")]
    HashMismatch { expected: String, found: String },
    #[error("log tick is {found} s but the scenario ticks at {expected} s")]
    TickDtMismatch { expected: f64, found: f64 },
    #[error("replay diverged at tick {tick}: {detail}")]
    Divergence { tick: u64, detail: String },
    #[error(transparent)]
    Assessment(#[from] AssessmentError),
}

/// Anything that can produce one input sample per tick.
pub trait InputSource {
    /// Next sample given the state before the tick; `None` when exhausted.
    fn next_input(&mut self, state: &SimState, scenario: &Scenario) -> Option<InputSample>;
}

impl<I: Iterator<Item = InputSample>> InputSource for I {
    fn next_input(&mut self, _: &SimState, _: &Scenario) -> Option<InputSample> {
        self.next()
    }
}

/// Incremental recorder: feed samples one tick at a time.
pub struct Recorder<'a> {
    scenario: &'a Scenario,
    state: SimState,
    log: SessionLog,
}

impl<'a> Recorder<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self, SessionError> {
        let state = init_session(scenario)?;
        let events = scenario
            .initial_fire()
            .map(|o| LoggedEvent {
                tick: 0,
                event: Event::Ignite(o.id.clone()),
            })
            .into_iter()
            .collect();
        Ok(Self {
            scenario,
            state,
            log: SessionLog {
                version: TRACE_VERSION,
                scenario_id: scenario.id.clone(),
                scenario_hash: content_hash(scenario),
                tick_dt: scenario.tick_dt,
                samples: Vec::new(),
                sprays: Vec::new(),
                events,
                outcome: SessionOutcome::Aborted,
            },
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn is_finished(&self) -> bool {
        self.state.outcome != Outcome::Running
    }

    /// Simulates one tick with `sample` and records it.
    pub fn push(&mut self, sample: InputSample) -> Result<TickOutput, SessionError> {
        if self.is_finished() {
            return Err(SessionError::Finished);
        }
        let tick = self.state.tick;
        sample
            .check()
            .map_err(|reason| SessionError::InvalidSample { tick, reason })?;
        let out = self.state.advance(self.scenario, &sample);
        self.log.samples.push(sample);
        self.log.events.extend(
            out.events
                .iter()
                .cloned()
                .map(|event| LoggedEvent { tick, event }),
        );
        if let Some(spray) = &out.spray {
            self.log.sprays.push(spray.clone());
        }
        self.log.outcome = match self.state.outcome {
            Outcome::Success => SessionOutcome::Success,
            Outcome::Timeout => SessionOutcome::Timeout,
            Outcome::Running => SessionOutcome::Aborted,
        };
        Ok(out)
    }

    /// Final state and log. An unfinished session is marked aborted.
    pub fn finish(self) -> (SimState, SessionLog) {
        (self.state, self.log)
    }
}

/// Runs a session to completion, pulling one sample per tick from `inputs`.
pub fn record_session(
    scenario: &Scenario,
    inputs: &mut impl InputSource,
) -> Result<SessionLog, SessionError> {
    let mut rec = Recorder::new(scenario)?;
    while !rec.is_finished() {
        let Some(sample) = inputs.next_input(rec.state(), scenario) else {
            return Err(SessionError::Truncated {
                ticks: rec.state().tick,
            });
        };
        rec.push(sample)?;
    }
    Ok(rec.finish().1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub state: SimState,
    pub report: AssessmentReport,
}

/// Re-simulates the recorded samples and checks that every derived record
/// matches the log.
pub fn replay(scenario: &Scenario, log: &SessionLog) -> Result<Replay, SessionError> {
    if log.tick_dt != scenario.tick_dt {
        return Err(SessionError::TickDtMismatch {
            expected: scenario.tick_dt,
            found: log.tick_dt,
        });
    }
    let expected = content_hash(scenario);
    if log.scenario_hash != expected {
        return Err(SessionError::HashMismatch {
            expected,
            found: log.scenario_hash.clone(),
        });
    }

    let mut rec = Recorder::new(scenario)?;
    for (tick, sample) in log.samples.iter().enumerate() {
        if rec.is_finished() {
            return Err(SessionError::Divergence {
                tick: tick as u64,
                detail: "session ended before the recorded samples did".into(),
            });
        }
        rec.push(sample.clone())?;
    }
    let (state, fresh) = rec.finish();
    compare(log, &fresh)?;
    let report = build_report(&fresh, scenario)?;
    Ok(Replay { state, report })
}

/// First index where two record lists disagree, with the tick it happened on.
fn first_mismatch<T: PartialEq + std::fmt::Debug>(
    recorded: &[T],
    fresh: &[T],
    tick_of: impl Fn(&T) -> u64,
    what: &str,
) -> Option<(u64, String)> {
    let i = (0..recorded.len().max(fresh.len())).find(|&i| recorded.get(i) != fresh.get(i))?;
    let (r, f) = (recorded.get(i), fresh.get(i));
    let tick = match (r, f) {
        (Some(a), Some(b)) => tick_of(a).min(tick_of(b)),
        (Some(a), None) | (None, Some(a)) => tick_of(a),
        (None, None) => unreachable!(),
    };
    Some((tick, format!("{what} #{i}: recorded {r:?}, replayed {f:?}")))
}

fn compare(recorded: &SessionLog, fresh: &SessionLog) -> Result<(), SessionError> {
    let events = first_mismatch(&recorded.events, &fresh.events, |e| e.tick, "event");
    let sprays = first_mismatch(&recorded.sprays, &fresh.sprays, |s| s.tick, "spray record");
    let first = match (events, sprays) {
        (Some(e), Some(s)) => Some(if s.0 < e.0 { s } else { e }),
        (e, s) => e.or(s),
    };
    if let Some((tick, detail)) = first {
        return Err(SessionError::Divergence { tick, detail });
    }
    if recorded.outcome != fresh.outcome {
        return Err(SessionError::Divergence {
            tick: fresh.ticks(),
            detail: format!(
                "outcome: recorded {:?}, replayed {:?}",
                recorded.outcome, fresh.outcome
            ),
        });
    }
    Ok(())
}
