//! Fixed-timestep simulation of one training session.
//!
//! A tick is `scenario.tick_dt` seconds. Each call to [`SimState::advance`]
//! consumes one [`InputSample`] and runs, in this order:
//!
//! 1. extinguisher selection,
//! 2. trainee movement,
//! 3. scheduled spreads due in `(t, t + dt]`,
//! 4. spraying the nearest burning fire,
//! 5. evacuation progress,
//! 6. outcome check, then the clock moves forward.
//!
//! There is no randomness and no wall-clock input; identical scenarios and
//! input sequences give bit-identical trajectories.

mod spray;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, Vec2};
use crate::scenario::{validate, Scenario, Violation};

pub use spray::{
    apply_suppression, effectiveness, spray_effectiveness, SprayGeometry, Suppression,
};

/// Tolerance on the unit-length requirements of [`InputSample`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidScenario(Vec<Violation>),
}

/// Trainee controls for one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSample {
    /// Movement direction: zero or unit length.
    #[serde(rename = "mv")]
    pub movement: Vec2,
    /// Spray direction, unit length.
    pub aim: Vec2,
    #[serde(rename = "trig")]
    pub trigger: bool,
    #[serde(rename = "sel", default, skip_serializing_if = "Option::is_none")]
    pub select: Option<String>,
}

impl InputSample {
    /// Standing still, facing +x, trigger released.
    pub fn idle() -> Self {
        Self {
            movement: Vec2::ZERO,
            aim: Vec2::new(1.0, 0.0),
            trigger: false,
            select: None,
        }
    }

    /// Describes why the sample breaks the unit-vector rules, if it does.
    pub fn check(&self) -> Result<(), String> {
        if !self.movement.is_finite() || !self.aim.is_finite() {
            return Err("non-finite component".into());
        }
        let mv = self.movement.length();
        if mv > UNIT_TOLERANCE && (mv - 1.0).abs() > UNIT_TOLERANCE {
            return Err(format!("movement length {mv} is neither 0 nor 1"));
        }
        let aim = self.aim.length();
        if (aim - 1.0).abs() > UNIT_TOLERANCE {
            return Err(format!("aim length {aim} is not 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirePhase {
    Unlit,
    Burning,
    Extinguished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireState {
    pub object: String,
    pub phase: FirePhase,
    pub intensity: f64,
    pub max_intensity: f64,
    /// Time integral of spray effectiveness applied to this fire.
    pub accumulated_progress: f64,
}

impl FireState {
    fn unlit(object: &str, max_intensity: f64) -> Self {
        Self {
            object: object.to_owned(),
            phase: FirePhase::Unlit,
            intensity: 0.0,
            max_intensity,
            accumulated_progress: 0.0,
        }
    }

    fn ignite(&mut self) {
        self.phase = FirePhase::Burning;
        self.intensity = self.max_intensity;
    }

    pub fn ever_ignited(&self) -> bool {
        self.phase != FirePhase::Unlit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Running,
    Success,
    Timeout,
}

/// Things that happened during a tick, in the order they happened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    Ignite(String),
    Spread(String),
    Extinguished(String),
    WrongExtinguisher,
    WaypointReached(usize),
    ExitReached,
    SelectExtinguisher(String),
}

/// Per-tick record of a trigger pull with an extinguisher in hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SprayRecord {
    #[serde(rename = "t")]
    pub tick: u64,
    #[serde(rename = "ext")]
    pub extinguisher: String,
    pub d_max: f64,
    /// Fire the spray was directed at; `None` when nothing was burning.
    pub target: Option<String>,
    pub geometry: Option<SprayGeometry>,
    #[serde(rename = "wrong")]
    pub wrong_extinguisher: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickOutput {
    pub events: Vec<Event>,
    pub spray: Option<SprayRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub tick: u64,
    pub user_pos: Point2,
    pub current_aim: Vec2,
    pub selected: Option<String>,
    /// One entry per scenario object, in scenario order.
    pub fires: Vec<FireState>,
    pub visited_waypoints: usize,
    pub exit_reached: bool,
    pub outcome: Outcome,
}

/// Session start: the initial fire burns at full intensity, everything else
/// is unlit, and the trainee stands at the spawn point.
pub fn init_session(s: &Scenario) -> Result<SimState, SimError> {
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(SimError::InvalidScenario(violations));
    }
    let fires = s
        .objects
        .iter()
        .map(|o| {
            let mut f = FireState::unlit(&o.id, o.max_intensity);
            if o.is_initial_fire() {
                f.ignite();
            }
            f
        })
        .collect();
    Ok(SimState {
        tick: 0,
        user_pos: s.user_spawn,
        current_aim: Vec2::new(1.0, 0.0),
        selected: None,
        fires,
        visited_waypoints: 0,
        exit_reached: false,
        outcome: Outcome::Running,
    })
}

/// Outcome implied by a state: success needs every fire that ever ignited to
/// be out and the trainee standing in the exit; otherwise the clock decides.
pub fn check_completion(state: &SimState, s: &Scenario) -> Outcome {
    let all_out = state
        .fires
        .iter()
        .filter(|f| f.ever_ignited())
        .all(|f| f.phase == FirePhase::Extinguished);
    if all_out && s.evacuation.exit.contains(state.user_pos) {
        Outcome::Success
    } else if state.tick as f64 * s.tick_dt >= s.duration_limit {
        Outcome::Timeout
    } else {
        Outcome::Running
    }
}

/// Pure form of [`SimState::advance`].
pub fn step(state: &SimState, s: &Scenario, input: &InputSample) -> (SimState, TickOutput) {
    let mut next = state.clone();
    let out = next.advance(s, input);
    (next, out)
}

impl SimState {
    pub fn time(&self, s: &Scenario) -> f64 {
        self.tick as f64 * s.tick_dt
    }

    pub fn fire(&self, id: &str) -> Option<&FireState> {
        self.fires.iter().find(|f| f.object == id)
    }

    pub fn burning_count(&self) -> usize {
        self.fires
            .iter()
            .filter(|f| f.phase == FirePhase::Burning)
            .count()
    }

    pub fn ignited_count(&self) -> usize {
        self.fires.iter().filter(|f| f.ever_ignited()).count()
    }

    /// Index of the burning fire closest to `from`; ties go to the earlier
    /// scenario object.
    pub fn nearest_burning(&self, s: &Scenario, from: Point2) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, f) in self.fires.iter().enumerate() {
            if f.phase != FirePhase::Burning {
                continue;
            }
            let d = s.objects[i].position.distance(from);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Runs one tick in place. A finished session is left untouched.
    pub fn advance(&mut self, s: &Scenario, input: &InputSample) -> TickOutput {
        let mut out = TickOutput::default();
        if self.outcome != Outcome::Running {
            return out;
        }

        // 1. selection; unknown ids are ignored
        if let Some(id) = &input.select {
            if s.extinguisher(id).is_some() && self.selected.as_deref() != Some(id) {
                self.selected = Some(id.clone());
                out.events.push(Event::SelectExtinguisher(id.clone()));
            }
        }

        // 2. movement
        let stride = s.walk_speed * s.tick_dt;
        self.user_pos = self.user_pos + input.movement * stride;
        self.current_aim = input.aim;

        // 3. spread
        let now = self.tick as f64 * s.tick_dt;
        let end = (self.tick + 1) as f64 * s.tick_dt;
        let mut due: Vec<_> = s
            .spread_events
            .iter()
            .filter(|e| e.at_time > now && e.at_time <= end)
            .collect();
        due.sort_by(|a, b| a.at_time.total_cmp(&b.at_time));
        if !due.is_empty() && (!s.spread_requires_burning || self.burning_count() > 0) {
            for e in due {
                let Some(i) = s.object_index(&e.target) else {
                    continue;
                };
                if self.fires[i].phase == FirePhase::Unlit {
                    self.fires[i].ignite();
                    out.events.push(Event::Spread(e.target.clone()));
                }
            }
        }

        // 4. spray
        if input.trigger {
            if let Some(ext) = self.selected.as_deref().and_then(|id| s.extinguisher(id)) {
                let mut record = SprayRecord {
                    tick: self.tick,
                    extinguisher: ext.id.clone(),
                    d_max: ext.d_max,
                    target: None,
                    geometry: None,
                    wrong_extinguisher: false,
                };
                if let Some(i) = self.nearest_burning(s, self.user_pos) {
                    let object = &s.objects[i];
                    let geometry =
                        spray_effectiveness(self.user_pos, input.aim, object.position, ext.d_max);
                    let result = apply_suppression(
                        &self.fires[i],
                        geometry.effectiveness,
                        ext,
                        object.hazard_class,
                        s.tick_dt,
                    );
                    if result.wrong_extinguisher {
                        out.events.push(Event::WrongExtinguisher);
                    }
                    if result.fire.phase == FirePhase::Extinguished
                        && self.fires[i].phase == FirePhase::Burning
                    {
                        out.events.push(Event::Extinguished(object.id.clone()));
                    }
                    self.fires[i] = result.fire;
                    record.target = Some(object.id.clone());
                    record.geometry = Some(geometry);
                    record.wrong_extinguisher = result.wrong_extinguisher;
                }
                out.spray = Some(record);
            }
        }

        // 5. evacuation
        let plan = &s.evacuation;
        while let Some(w) = plan.waypoints.get(self.visited_waypoints) {
            if !w.contains(self.user_pos) {
                break;
            }
            out.events
                .push(Event::WaypointReached(self.visited_waypoints));
            self.visited_waypoints += 1;
        }
        if !self.exit_reached && plan.exit.contains(self.user_pos) {
            self.exit_reached = true;
            out.events.push(Event::ExitReached);
        }

        // 6 + 7
        self.tick += 1;
        self.outcome = check_completion(self, s);
        out
    }
}
