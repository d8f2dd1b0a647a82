//! Spray physics: how much a trigger pull does to one fire.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{FirePhase, FireState};
use crate::geometry::{Point2, Vec2};
use crate::scenario::{ExtinguisherSpec, HazardClass};

/// Aim and range of one spray sample against one fire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SprayGeometry {
    /// Angle between the spray direction and the line to the fire base, radians.
    pub theta: f64,
    /// Distance from the trainee to the fire base, meters.
    pub d: f64,
    /// Effectiveness in `[0, 1]`.
    #[serde(rename = "e")]
    pub effectiveness: f64,
}

/// `cos(theta) * (1 - d / d_max)`, clamped to `[0, 1]`; zero outside range
/// or when spraying away from the fire.
pub fn effectiveness(theta: f64, d: f64, d_max: f64) -> f64 {
    if d >= d_max || theta >= FRAC_PI_2 {
        return 0.0;
    }
    (libm::cos(theta) * (1.0 - d / d_max)).clamp(0.0, 1.0)
}

pub fn spray_effectiveness(user: Point2, aim: Vec2, fire: Point2, d_max: f64) -> SprayGeometry {
    let to_fire = fire - user;
    let d = to_fire.length();
    // standing on the fire base counts as aiming straight at it
    let theta = if d == 0.0 {
        0.0
    } else {
        libm::atan2(aim.cross(to_fire).abs(), aim.dot(to_fire))
    };
    SprayGeometry {
        theta,
        d,
        effectiveness: effectiveness(theta, d, d_max),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suppression {
    pub fire: FireState,
    /// The extinguisher is not rated for this fire's class.
    pub wrong_extinguisher: bool,
}

/// One tick of spraying. Intensity drops by `rate * (E * dt)` and the same
/// `E * dt` is added to the accumulated progress, so with a single
/// extinguisher the fire dies once progress reaches `max_intensity / rate`.
pub fn apply_suppression(
    fire: &FireState,
    effectiveness: f64,
    ext: &ExtinguisherSpec,
    hazard: HazardClass,
    dt: f64,
) -> Suppression {
    if fire.phase != FirePhase::Burning {
        return Suppression {
            fire: fire.clone(),
            wrong_extinguisher: false,
        };
    }
    if !ext.is_effective_on(hazard) {
        return Suppression {
            fire: fire.clone(),
            wrong_extinguisher: true,
        };
    }

    let dose = effectiveness * dt;
    let remaining = fire.intensity - ext.extinguish_rate * dose;
    let mut next = fire.clone();
    next.accumulated_progress = fire.accumulated_progress + dose;
    if remaining <= 0.0 {
        next.intensity = 0.0;
        next.phase = FirePhase::Extinguished;
    } else {
        next.intensity = remaining;
    }
    Suppression {
        fire: next,
        wrong_extinguisher: false,
    }
}
