#![allow(dead_code)]

use firedrill_core::agents::Agent;
use firedrill_core::geometry::Vec2;
use firedrill_core::scenario::{parse_scenario, Scenario};
use firedrill_core::session::InputSource;
use firedrill_core::sim::{InputSample, SimState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// A trainee that mostly does the right thing but fumbles: random aim,
/// stray steps, random selections and trigger flicks.
pub struct Fumbler {
    rng: ChaCha8Rng,
}

impl Fumbler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl InputSource for Fumbler {
    fn next_input(&mut self, state: &SimState, s: &Scenario) -> Option<InputSample> {
        let mut x = Agent::Perfect.decide(state, s);
        let r = &mut self.rng;
        if r.gen_bool(0.3) {
            x.aim = Vec2::from_angle(r.gen_range(-3.2..3.2));
        }
        if r.gen_bool(0.1) {
            x.movement = if r.gen_bool(0.3) {
                Vec2::ZERO
            } else {
                Vec2::from_angle(r.gen_range(-3.2..3.2))
            };
        }
        if r.gen_bool(0.05) {
            let n = s.extinguishers.len();
            let i = r.gen_range(0..=n);
            x.select = Some(
                s.extinguishers
                    .get(i)
                    .map_or("nope".into(), |e| e.id.clone()),
            );
        }
        if r.gen_bool(0.2) {
            x.trigger = !x.trigger;
        }
        Some(x)
    }
}

/// One fire at the origin and a trainee standing `d` meters away, aiming
/// `theta` radians off the line to the fire. The exit is out of reach.
pub fn single_fire(i0: f64, rate: f64, d: f64, d_max: f64, duration: f64) -> Scenario {
    let doc = json!({
        "id": "single",
        "duration_limit_s": duration,
        "walk_speed_mps": 1.0,
        "user_spawn": [-d, 0.0],
        "objects": [
            {"id": "f", "pos": [0.0, 0.0], "class": "normal", "max_intensity": i0, "ignition_time_s": 0}
        ],
        "extinguishers": [
            {"id": "x", "kind": "water", "rate": rate, "d_max_m": d_max}
        ],
        "evacuation": {"exit": {"pos": [1000.0, 1000.0], "r_m": 1.0}}
    });
    parse_scenario(&doc.to_string()).unwrap()
}

/// Constant aim `theta` radians off the +x axis, trigger held, water selected.
pub fn steady_aim(theta: f64) -> InputSample {
    InputSample {
        movement: Vec2::ZERO,
        aim: Vec2::from_angle(theta),
        trigger: true,
        select: Some("x".into()),
    }
}
