mod common;

use std::f64::consts::FRAC_PI_2;

use common::{single_fire, steady_aim, Fumbler};
use firedrill_core::agents::Agent;
use firedrill_core::fixtures::lab_scenario;
use firedrill_core::session::{record_session, InputSource};
use firedrill_core::sim::{effectiveness, init_session, step, Event, FirePhase, Outcome};
use proptest::prelude::*;

proptest! {
    #[test]
    fn effectiveness_stays_in_unit_range(
        theta in 0.0..std::f64::consts::PI,
        d in 0.0..10.0f64,
        d_max in 0.1..10.0f64,
    ) {
        let e = effectiveness(theta, d, d_max);
        prop_assert!((0.0..=1.0).contains(&e));
        if d >= d_max || theta >= FRAC_PI_2 {
            prop_assert_eq!(e, 0.0);
        }
    }

    #[test]
    fn effectiveness_falls_with_angle_and_distance(
        t1 in 0.0..FRAC_PI_2,
        t2 in 0.0..FRAC_PI_2,
        d1 in 0.0..5.0f64,
        d2 in 0.0..5.0f64,
        d_max in 0.1..5.0f64,
    ) {
        let (ta, tb) = (t1.min(t2), t1.max(t2));
        let (da, db) = (d1.min(d2), d1.max(d2));
        prop_assert!(effectiveness(ta, da, d_max) >= effectiveness(tb, da, d_max));
        prop_assert!(effectiveness(ta, da, d_max) >= effectiveness(ta, db, d_max));
    }

    #[test]
    fn closed_form_extinguish_time(
        i0 in 5.0..200.0f64,
        rate in 2.0..20.0f64,
        d_max in 1.0..5.0f64,
        frac in 0.0..0.8f64,
        theta in -1.0..1.0f64,
    ) {
        let d = frac * d_max;
        let e = theta.cos() * (1.0 - d / d_max);
        let expected = i0 / (rate * e);
        let s = single_fire(i0, rate, d, d_max, expected + 10.0);
        let mut st = init_session(&s).unwrap();
        let input = steady_aim(theta);
        let threshold = i0 / rate;
        let mut out_at = None;
        while st.outcome == Outcome::Running && out_at.is_none() {
            let out = st.advance(&s, &input);
            let f = &st.fires[0];
            prop_assert_eq!(
                f.accumulated_progress >= threshold,
                f.phase == FirePhase::Extinguished,
                "tick {}", st.tick
            );
            if out.events.contains(&Event::Extinguished("f".into())) {
                out_at = Some(st.time(&s));
            }
        }
        let t = out_at.expect("fire never went out");
        prop_assert!((t - expected).abs() <= s.tick_dt + 1e-9, "{} vs {}", t, expected);
    }

    #[test]
    fn fumbling_sessions_keep_fire_invariants(seed in any::<u64>()) {
        let s = lab_scenario();
        let mut st = init_session(&s).unwrap();
        let mut agent = Fumbler::new(seed);
        let mut prev = st.clone();
        while st.outcome == Outcome::Running {
            let input = agent.next_input(&st, &s).unwrap();
            let (next, _) = step(&st, &s, &input);
            for (a, b) in prev.fires.iter().zip(&next.fires) {
                prop_assert!(b.intensity >= 0.0);
                match b.phase {
                    FirePhase::Unlit => {
                        prop_assert_eq!(b.intensity, 0.0);
                        prop_assert_eq!(b.accumulated_progress, 0.0);
                    }
                    FirePhase::Burning => prop_assert!(b.intensity > 0.0),
                    FirePhase::Extinguished => prop_assert_eq!(b.intensity, 0.0),
                }
                if a.phase != FirePhase::Unlit {
                    prop_assert!(b.intensity <= a.intensity);
                    prop_assert!(b.phase != FirePhase::Unlit);
                }
            }
            prop_assert!(next.ignited_count() >= prev.ignited_count());
            prop_assert!(next.ignited_count() <= 1 + s.spread_events.len());
            prev = next.clone();
            st = next;
        }
        // terminal states are frozen
        let input = agent.next_input(&st, &s).unwrap();
        let (after, out) = step(&st, &s, &input);
        prop_assert_eq!(&after, &st);
        prop_assert!(out.events.is_empty() && out.spray.is_none());
    }

    #[test]
    fn runs_are_bit_identical(seed in any::<u64>()) {
        let s = lab_scenario();
        let a = record_session(&s, &mut Fumbler::new(seed)).unwrap();
        let b = record_session(&s, &mut Fumbler::new(seed)).unwrap();
        prop_assert_eq!(
            firedrill_core::session::serialize_log(&a),
            firedrill_core::session::serialize_log(&b)
        );
    }
}

#[test]
fn perfect_agent_clears_the_lab() {
    let s = lab_scenario();
    let log = record_session(&s, &mut Agent::Perfect.driver()).unwrap();
    assert_eq!(
        log.outcome,
        firedrill_core::session::SessionOutcome::Success
    );
    assert!(log.duration() < s.duration_limit);
}

#[test]
fn idle_lab_spread_counts() {
    let s = lab_scenario();
    let mut st = init_session(&s).unwrap();
    let idle = firedrill_core::sim::InputSample::idle();
    for (t, n) in [(5.0, 1), (15.0, 2), (25.0, 3), (35.0, 4), (45.0, 5)] {
        while st.time(&s) < t {
            st.advance(&s, &idle);
        }
        assert_eq!(st.burning_count(), n, "at {t} s");
    }
}
