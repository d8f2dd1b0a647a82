use std::collections::HashSet;
use std::fmt;

use super::Scenario;

/// The rule a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Value must be strictly positive (and finite).
    Positive,
    /// Value must be a finite number.
    Finite,
    /// Identifier must not be empty.
    NonEmptyId,
    /// Identifier appears more than once.
    UniqueId,
    /// Exactly one object ignites at t = 0.
    SingleInitialFire,
    /// Only the initial fire may carry an ignition time, and it must be 0.
    IgnitionTimeZero,
    /// Reference to an object id that does not exist.
    DanglingReference,
    /// The initial fire cannot be a spread target.
    SpreadTargetsInitialFire,
    /// Extinguisher must be effective on at least one class.
    NonEmptyClasses,
    /// A scenario needs at least one extinguisher.
    NonEmptyCatalog,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Positive => "must be a finite number > 0",
            Rule::Finite => "must be a finite number",
            Rule::NonEmptyId => "must not be empty",
            Rule::UniqueId => "duplicate id",
            Rule::SingleInitialFire => "exactly one object must ignite at t = 0",
            Rule::IgnitionTimeZero => {
                "only the initial fire may set an ignition time, and it must be 0; use spread events for later ignitions"
            }
            Rule::DanglingReference => "references an unknown object id",
            Rule::SpreadTargetsInitialFire => "spread event cannot target the initial fire",
            Rule::NonEmptyClasses => "must list at least one hazard class",
            Rule::NonEmptyCatalog => "at least one extinguisher is required",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Path of the offending field, e.g. `objects[2].max_intensity`.
    pub field: String,
    pub rule: Rule,
}

impl Violation {
    fn new(field: impl Into<String>, rule: Rule) -> Self {
        Self {
            field: field.into(),
            rule,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

fn positive(out: &mut Vec<Violation>, field: impl Into<String>, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        out.push(Violation::new(field, Rule::Positive));
    }
}

fn finite_point(out: &mut Vec<Violation>, field: impl Into<String>, p: crate::geometry::Point2) {
    if !p.is_finite() {
        out.push(Violation::new(field, Rule::Finite));
    }
}

/// Checks every scenario invariant. An empty result means the scenario is
/// safe to simulate.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();

    if s.id.is_empty() {
        out.push(Violation::new("id", Rule::NonEmptyId));
    }
    positive(&mut out, "duration_limit_s", s.duration_limit);
    positive(&mut out, "tick_dt_s", s.tick_dt);
    positive(&mut out, "walk_speed_mps", s.walk_speed);
    finite_point(&mut out, "user_spawn", s.user_spawn);

    let mut seen = HashSet::new();
    let mut initial = 0usize;
    for (i, o) in s.objects.iter().enumerate() {
        let at = |f: &str| format!("objects[{i}].{f}");
        if o.id.is_empty() {
            out.push(Violation::new(at("id"), Rule::NonEmptyId));
        } else if !seen.insert(o.id.as_str()) {
            out.push(Violation::new(at("id"), Rule::UniqueId));
        }
        finite_point(&mut out, at("pos"), o.position);
        positive(&mut out, at("max_intensity"), o.max_intensity);
        positive(&mut out, at("base_radius_m"), o.base_radius);
        match o.ignition_time {
            Some(0.0) => initial += 1,
            Some(_) => out.push(Violation::new(
                at("ignition_time_s"),
                Rule::IgnitionTimeZero,
            )),
            None => {}
        }
    }
    if initial != 1 {
        out.push(Violation::new("objects", Rule::SingleInitialFire));
    }

    let initial_id = s.initial_fire().map(|o| o.id.as_str());
    for (i, ev) in s.spread_events.iter().enumerate() {
        positive(&mut out, format!("spread[{i}].t_s"), ev.at_time);
        if s.object(&ev.target).is_none() {
            out.push(Violation::new(
                format!("spread[{i}].target"),
                Rule::DanglingReference,
            ));
        } else if initial == 1 && Some(ev.target.as_str()) == initial_id {
            out.push(Violation::new(
                format!("spread[{i}].target"),
                Rule::SpreadTargetsInitialFire,
            ));
        }
    }

    if s.extinguishers.is_empty() {
        out.push(Violation::new("extinguishers", Rule::NonEmptyCatalog));
    }
    let mut seen = HashSet::new();
    for (i, e) in s.extinguishers.iter().enumerate() {
        let at = |f: &str| format!("extinguishers[{i}].{f}");
        if e.id.is_empty() {
            out.push(Violation::new(at("id"), Rule::NonEmptyId));
        } else if !seen.insert(e.id.as_str()) {
            out.push(Violation::new(at("id"), Rule::UniqueId));
        }
        positive(&mut out, at("rate"), e.extinguish_rate);
        positive(&mut out, at("d_max_m"), e.d_max);
        if e.effective_classes.is_empty() {
            out.push(Violation::new(at("classes"), Rule::NonEmptyClasses));
        }
    }

    for (i, w) in s.evacuation.waypoints.iter().enumerate() {
        finite_point(
            &mut out,
            format!("evacuation.waypoints[{i}].pos"),
            w.position,
        );
        positive(&mut out, format!("evacuation.waypoints[{i}].r_m"), w.radius);
    }
    finite_point(&mut out, "evacuation.exit.pos", s.evacuation.exit.position);
    positive(&mut out, "evacuation.exit.r_m", s.evacuation.exit.radius);

    out
}
