//! Static description of a training scenario: what can burn, when fire
//! spreads, which extinguishers are on the rack, and how to get out.

mod format;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

pub use format::{
    content_hash, default_spread_schedule, parse_scenario, scenario_to_value, serialize_scenario,
    ScenarioError, DEFAULT_BASE_RADIUS_M, DEFAULT_D_MAX_M, DEFAULT_SPREAD_TIMES_S,
    DEFAULT_TICK_DT_S,
};
pub use validate::{validate, Rule, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HazardClass {
    Normal,
    Electrical,
    Chemical,
}

impl HazardClass {
    pub const ALL: [HazardClass; 3] = [
        HazardClass::Normal,
        HazardClass::Electrical,
        HazardClass::Chemical,
    ];
}

impl fmt::Display for HazardClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HazardClass::Normal => "normal",
            HazardClass::Electrical => "electrical",
            HazardClass::Chemical => "chemical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtinguisherKind {
    Water,
    Co2,
    Foam,
}

impl ExtinguisherKind {
    /// Fire classes this kind of extinguisher is rated for when a scenario
    /// file does not list them explicitly.
    pub fn default_classes(self) -> BTreeSet<HazardClass> {
        match self {
            ExtinguisherKind::Water => [HazardClass::Normal].into(),
            ExtinguisherKind::Co2 => [HazardClass::Normal, HazardClass::Electrical].into(),
            ExtinguisherKind::Foam => [HazardClass::Normal, HazardClass::Chemical].into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlammableObject {
    pub id: String,
    pub position: Point2,
    pub hazard_class: HazardClass,
    pub max_intensity: f64,
    /// Radius of the fire base around `position`, in meters.
    pub base_radius: f64,
    /// `Some(0.0)` marks the fire burning when the session starts.
    pub ignition_time: Option<f64>,
}

impl FlammableObject {
    pub fn is_initial_fire(&self) -> bool {
        self.ignition_time == Some(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadEvent {
    pub at_time: f64,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtinguisherSpec {
    pub id: String,
    pub kind: ExtinguisherKind,
    /// Intensity removed per second of spraying at full effectiveness.
    pub extinguish_rate: f64,
    /// Maximum effective range in meters.
    pub d_max: f64,
    pub effective_classes: BTreeSet<HazardClass>,
}

impl ExtinguisherSpec {
    pub fn is_effective_on(&self, class: HazardClass) -> bool {
        self.effective_classes.contains(&class)
    }
}

/// A circular region the trainee has to step into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zone {
    pub position: Point2,
    pub radius: f64,
}

impl Zone {
    pub fn contains(&self, p: Point2) -> bool {
        self.position.distance(p) <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvacuationPlan {
    /// Checkpoints that must be visited in order before the exit.
    pub waypoints: Vec<Zone>,
    pub exit: Zone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub duration_limit: f64,
    pub tick_dt: f64,
    pub objects: Vec<FlammableObject>,
    pub spread_events: Vec<SpreadEvent>,
    pub extinguishers: Vec<ExtinguisherSpec>,
    pub user_spawn: Point2,
    pub walk_speed: f64,
    pub evacuation: EvacuationPlan,
    /// Skip a scheduled spread when nothing is burning at that moment.
    pub spread_requires_burning: bool,
}

impl Scenario {
    pub fn object(&self, id: &str) -> Option<&FlammableObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn extinguisher(&self, id: &str) -> Option<&ExtinguisherSpec> {
        self.extinguishers.iter().find(|e| e.id == id)
    }

    pub fn initial_fire(&self) -> Option<&FlammableObject> {
        self.objects.iter().find(|o| o.is_initial_fire())
    }
}
