//! Scripted trainees for batch runs and tests.
//!
//! | name                 | behaviour                                                      |
//! |----------------------|----------------------------------------------------------------|
//! | `perfect`            | walks to the nearest burning fire, sprays it with the fastest compatible extinguisher from `STANDOFF_FRACTION * d_max`, then follows the evacuation route |
//! | `idle`               | never moves or sprays                                          |
//! | `delayed:<s>`        | idle for `s` seconds, then `perfect`                           |
//! | `wrong-extinguisher` | like `perfect`, but always picks an extinguisher not rated for the fire |
//!
//! None of them use randomness; aim jitter is zero.

use std::fmt;
use std::str::FromStr;

use crate::geometry::{Point2, Vec2};
use crate::scenario::{ExtinguisherSpec, HazardClass, Scenario};
use crate::session::InputSource;
use crate::sim::{InputSample, SimState};

/// Distance the scripted trainee keeps from the fire, as a fraction of the
/// extinguisher's range.
pub const STANDOFF_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Agent {
    Perfect,
    Idle,
    /// Seconds to wait before acting like [`Agent::Perfect`].
    Delayed(f64),
    WrongExtinguisher,
}

#[derive(Debug, PartialEq, Eq)]
pub struct UnknownAgent(pub String);

impl fmt::Display for UnknownAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown agent {:?} (expected perfect, idle, delayed:<seconds> or wrong-extinguisher)",
            self.0
        )
    }
}

impl std::error::Error for UnknownAgent {}

impl FromStr for Agent {
    type Err = UnknownAgent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "perfect" => Ok(Agent::Perfect),
            "idle" => Ok(Agent::Idle),
            "wrong-extinguisher" => Ok(Agent::WrongExtinguisher),
            _ => s
                .strip_prefix("delayed:")
                .and_then(|d| d.parse::<f64>().ok())
                .filter(|d| d.is_finite() && *d >= 0.0)
                .map(Agent::Delayed)
                .ok_or_else(|| UnknownAgent(s.to_owned())),
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Agent::Perfect => f.write_str("perfect"),
            Agent::Idle => f.write_str("idle"),
            Agent::Delayed(s) => write!(f, "delayed:{s}"),
            Agent::WrongExtinguisher => f.write_str("wrong-extinguisher"),
        }
    }
}

impl Agent {
    pub fn driver(self) -> AgentDriver {
        AgentDriver { agent: self }
    }

    /// The sample this agent produces in `state`.
    pub fn decide(self, state: &SimState, s: &Scenario) -> InputSample {
        match self {
            Agent::Idle => InputSample::idle(),
            Agent::Delayed(wait) if state.time(s) < wait => InputSample::idle(),
            Agent::Delayed(_) | Agent::Perfect => respond(state, s, pick_best),
            Agent::WrongExtinguisher => respond(state, s, pick_wrong),
        }
    }
}

/// [`InputSource`] adapter; agents are stateless so this never runs dry.
#[derive(Debug, Clone)]
pub struct AgentDriver {
    agent: Agent,
}

impl InputSource for AgentDriver {
    fn next_input(&mut self, state: &SimState, scenario: &Scenario) -> Option<InputSample> {
        Some(self.agent.decide(state, scenario))
    }
}

type Picker = fn(&Scenario, HazardClass) -> &ExtinguisherSpec;

/// Highest-rate extinguisher rated for the class, else the first on the rack.
fn pick_best(s: &Scenario, class: HazardClass) -> &ExtinguisherSpec {
    s.extinguishers
        .iter()
        .filter(|e| e.is_effective_on(class))
        .fold(None::<&ExtinguisherSpec>, |best, e| match best {
            Some(b) if b.extinguish_rate >= e.extinguish_rate => Some(b),
            _ => Some(e),
        })
        .unwrap_or(&s.extinguishers[0])
}

/// First extinguisher not rated for the class, else the first on the rack.
fn pick_wrong(s: &Scenario, class: HazardClass) -> &ExtinguisherSpec {
    s.extinguishers
        .iter()
        .find(|e| !e.is_effective_on(class))
        .unwrap_or(&s.extinguishers[0])
}

fn toward(from: Point2, to: Point2) -> Option<Vec2> {
    (to - from).normalized()
}

fn respond(state: &SimState, s: &Scenario, pick: Picker) -> InputSample {
    let pos = state.user_pos;
    let stride = s.walk_speed * s.tick_dt;

    if let Some(i) = state.nearest_burning(s, pos) {
        let fire = &s.objects[i];
        let ext = pick(s, fire.hazard_class);
        let d = pos.distance(fire.position);
        let aim = toward(pos, fire.position).unwrap_or(state.current_aim);
        let movement = if d > STANDOFF_FRACTION * ext.d_max {
            aim
        } else {
            Vec2::ZERO
        };
        return InputSample {
            movement,
            aim,
            trigger: true,
            select: (state.selected.as_deref() != Some(ext.id.as_str())).then(|| ext.id.clone()),
        };
    }

    let plan = &s.evacuation;
    let goal = plan
        .waypoints
        .get(state.visited_waypoints)
        .unwrap_or(&plan.exit);
    let movement = if goal.contains(pos) && pos.distance(goal.position) < stride {
        Vec2::ZERO
    } else {
        toward(pos, goal.position).unwrap_or(Vec2::ZERO)
    };
    InputSample {
        movement,
        aim: state.current_aim,
        trigger: false,
        select: None,
    }
}
