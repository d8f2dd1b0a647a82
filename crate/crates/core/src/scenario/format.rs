//! JSON scenario documents.
//!
//! The on-disk shape is a flat, fixed schema (unknown keys are rejected).
//! Optional keys fall back to the defaults exported from this module.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{
    validate, EvacuationPlan, ExtinguisherKind, ExtinguisherSpec, FlammableObject, HazardClass,
    Scenario, SpreadEvent, Violation, Zone,
};
use crate::geometry::Point2;

pub const DEFAULT_TICK_DT_S: f64 = 0.05;
pub const DEFAULT_D_MAX_M: f64 = 3.0;
pub const DEFAULT_BASE_RADIUS_M: f64 = 0.5;
pub const DEFAULT_SPREAD_TIMES_S: [f64; 4] = [10.0, 20.0, 30.0, 40.0];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("invalid scenario: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    id: String,
    duration_limit_s: f64,
    #[serde(default = "default_tick_dt")]
    tick_dt_s: f64,
    walk_speed_mps: f64,
    user_spawn: Point2,
    objects: Vec<ObjectDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spread: Option<Vec<SpreadDoc>>,
    #[serde(default = "default_true")]
    spread_requires_burning: bool,
    extinguishers: Vec<ExtinguisherDoc>,
    evacuation: EvacuationDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: String,
    pos: Point2,
    class: HazardClass,
    max_intensity: f64,
    #[serde(default = "default_base_radius")]
    base_radius_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ignition_time_s: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpreadDoc {
    t_s: f64,
    target: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtinguisherDoc {
    id: String,
    kind: ExtinguisherKind,
    rate: f64,
    #[serde(default = "default_d_max")]
    d_max_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<HazardClass>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvacuationDoc {
    #[serde(default)]
    waypoints: Vec<ZoneDoc>,
    exit: ZoneDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoneDoc {
    pos: Point2,
    r_m: f64,
}

fn default_tick_dt() -> f64 {
    DEFAULT_TICK_DT_S
}
fn default_d_max() -> f64 {
    DEFAULT_D_MAX_M
}
fn default_base_radius() -> f64 {
    DEFAULT_BASE_RADIUS_M
}
fn default_true() -> bool {
    true
}

impl From<ZoneDoc> for Zone {
    fn from(z: ZoneDoc) -> Self {
        Zone {
            position: z.pos,
            radius: z.r_m,
        }
    }
}

impl From<&Zone> for ZoneDoc {
    fn from(z: &Zone) -> Self {
        ZoneDoc {
            pos: z.position,
            r_m: z.radius,
        }
    }
}

/// Spread schedule used when a document has no `spread` key: the default
/// times are handed out greedily to whichever unlit object is closest to
/// anything already scheduled to burn (ties go to the earlier object).
///
/// Returns an empty schedule when there is no unique initial fire; `validate`
/// reports that case.
pub fn default_spread_schedule(objects: &[FlammableObject]) -> Vec<SpreadEvent> {
    let initial: Vec<usize> = (0..objects.len())
        .filter(|&i| objects[i].is_initial_fire())
        .collect();
    if initial.len() != 1 {
        return Vec::new();
    }
    let mut lit = initial;
    let mut schedule = Vec::new();
    for &t in &DEFAULT_SPREAD_TIMES_S {
        let next = (0..objects.len())
            .filter(|i| !lit.contains(i))
            .map(|i| {
                let d = lit
                    .iter()
                    .map(|&j| objects[j].position.distance(objects[i].position))
                    .fold(f64::INFINITY, f64::min);
                (i, d)
            })
            .fold(None::<(usize, f64)>, |best, (i, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((i, d)),
            });
        let Some((i, _)) = next else { break };
        lit.push(i);
        schedule.push(SpreadEvent {
            at_time: t,
            target: objects[i].id.clone(),
        });
    }
    schedule
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    for ids in [
        doc.objects.iter().map(|o| &o.id).collect::<Vec<_>>(),
        doc.extinguishers.iter().map(|e| &e.id).collect(),
    ] {
        let mut seen = HashSet::new();
        if let Some(dup) = ids.into_iter().find(|id| !seen.insert(id.as_str())) {
            return Err(ScenarioError::DuplicateId(dup.clone()));
        }
    }

    let objects: Vec<FlammableObject> = doc
        .objects
        .into_iter()
        .map(|o| FlammableObject {
            id: o.id,
            position: o.pos,
            hazard_class: o.class,
            max_intensity: o.max_intensity,
            base_radius: o.base_radius_m,
            ignition_time: o.ignition_time_s,
        })
        .collect();

    let spread_events = match doc.spread {
        Some(events) => events
            .into_iter()
            .map(|e| SpreadEvent {
                at_time: e.t_s,
                target: e.target,
            })
            .collect(),
        None => default_spread_schedule(&objects),
    };

    let extinguishers = doc
        .extinguishers
        .into_iter()
        .map(|e| ExtinguisherSpec {
            effective_classes: match e.classes {
                Some(c) => c.into_iter().collect(),
                None => e.kind.default_classes(),
            },
            id: e.id,
            kind: e.kind,
            extinguish_rate: e.rate,
            d_max: e.d_max_m,
        })
        .collect();

    let scenario = Scenario {
        id: doc.id,
        duration_limit: doc.duration_limit_s,
        tick_dt: doc.tick_dt_s,
        objects,
        spread_events,
        extinguishers,
        user_spawn: doc.user_spawn,
        walk_speed: doc.walk_speed_mps,
        evacuation: EvacuationPlan {
            waypoints: doc
                .evacuation
                .waypoints
                .into_iter()
                .map(Zone::from)
                .collect(),
            exit: doc.evacuation.exit.into(),
        },
        spread_requires_burning: doc.spread_requires_burning,
    };

    let violations = validate(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(violations))
    }
}

fn to_doc(s: &Scenario) -> ScenarioDoc {
    ScenarioDoc {
        id: s.id.clone(),
        duration_limit_s: s.duration_limit,
        tick_dt_s: s.tick_dt,
        walk_speed_mps: s.walk_speed,
        user_spawn: s.user_spawn,
        objects: s
            .objects
            .iter()
            .map(|o| ObjectDoc {
                id: o.id.clone(),
                pos: o.position,
                class: o.hazard_class,
                max_intensity: o.max_intensity,
                base_radius_m: o.base_radius,
                ignition_time_s: o.ignition_time,
            })
            .collect(),
        spread: Some(
            s.spread_events
                .iter()
                .map(|e| SpreadDoc {
                    t_s: e.at_time,
                    target: e.target.clone(),
                })
                .collect(),
        ),
        spread_requires_burning: s.spread_requires_burning,
        extinguishers: s
            .extinguishers
            .iter()
            .map(|e| ExtinguisherDoc {
                id: e.id.clone(),
                kind: e.kind,
                rate: e.extinguish_rate,
                d_max_m: e.d_max,
                classes: Some(e.effective_classes.iter().copied().collect()),
            })
            .collect(),
        evacuation: EvacuationDoc {
            waypoints: s.evacuation.waypoints.iter().map(ZoneDoc::from).collect(),
            exit: (&s.evacuation.exit).into(),
        },
    }
}

/// Writes a scenario as a document with every field spelled out, so
/// re-parsing never depends on defaults.
pub fn serialize_scenario(s: &Scenario) -> Result<String, ScenarioError> {
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(ScenarioError::Invalid(violations));
    }
    Ok(serde_json::to_string_pretty(&to_doc(s)).expect("scenario documents always serialize"))
}

/// Same shape as [`serialize_scenario`] but as a JSON value, without
/// validation. Used to embed a scenario in other messages.
pub fn scenario_to_value(s: &Scenario) -> serde_json::Value {
    serde_json::to_value(to_doc(s)).expect("scenario documents always serialize")
}

/// Hex SHA-256 of the canonical (compact) serialization.
pub fn content_hash(s: &Scenario) -> String {
    let bytes = serde_json::to_vec(&to_doc(s)).expect("scenario documents always serialize");
    hex::encode(Sha256::digest(&bytes))
}
