//! Deterministic fire-emergency training simulator.
//!
//! A [`scenario::Scenario`] describes a room full of flammable objects, a
//! fire-spread schedule, an extinguisher rack and an evacuation route. The
//! [`sim`] module steps a session forward one fixed tick at a time from
//! trainee inputs, [`session`] records and replays those inputs, and
//! [`assessment`] turns a finished session into a scorecard. [`analytics`]
//! summarises completion times over repeated attempts.

pub mod agents;
pub mod analytics;
pub mod assessment;
pub mod fixtures;
pub mod geometry;
pub mod scenario;
pub mod session;
pub mod sim;
