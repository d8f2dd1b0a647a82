//! Wire messages. Every frame is one UTF-8 JSON object.
//!
//! Client to server: `{"hello":1}` first, then any of
//! `{"input":{"mv":[x,y],"aim":[x,y],"trig":bool,"sel":"id"}}`,
//! `{"start":{}}` and `{"abort":{}}`.
//!
//! Server to client: `{"hello":1,"scenario":{...}}` in reply to the hello,
//! then `{"snap":{...}}` while the session runs, and finally either
//! `{"report":{...}}` or `{"error":"..."}`.

use firedrill_core::assessment::AssessmentReport;
use firedrill_core::geometry::Point2;
use firedrill_core::scenario::Scenario;
use firedrill_core::sim::{FirePhase, InputSample, Outcome, SimState};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hello {
    pub hello: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelloReply {
    pub hello: u32,
    pub scenario: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Empty {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Input(InputSample),
    Start(Empty),
    Abort(Empty),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireView {
    pub id: String,
    pub phase: FirePhase,
    pub intensity: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub time_s: f64,
    pub user_pos: Point2,
    pub fires: Vec<FireView>,
    pub selected: Option<String>,
    pub visited_waypoints: usize,
    pub outcome: Outcome,
}

impl Snapshot {
    pub fn of(state: &SimState, s: &Scenario) -> Self {
        Snapshot {
            tick: state.tick,
            time_s: state.time(s),
            user_pos: state.user_pos,
            fires: state
                .fires
                .iter()
                .map(|f| FireView {
                    id: f.object.clone(),
                    phase: f.phase,
                    intensity: f.intensity,
                    max: f.max_intensity,
                })
                .collect(),
            selected: state.selected.clone(),
            visited_waypoints: state.visited_waypoints,
            outcome: state.outcome,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServerMessage {
    Snap(Snapshot),
    Report(Box<AssessmentReport>),
    Error(String),
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}
