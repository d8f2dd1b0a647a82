mod common;

use common::Fumbler;
use firedrill_core::assessment::{
    aiming_score, build_report, correct_usage, evacuation_completion, response_time,
    EFFECTIVE_E_MIN,
};
use firedrill_core::fixtures::lab_scenario;
use firedrill_core::session::{deserialize_log, record_session, replay, serialize_log};
use firedrill_core::sim::{SprayGeometry, SprayRecord};
use proptest::prelude::*;
use serde_json::Value;

/// Aiming score straight from trace text, without the library's types.
fn naive_aiming_pct(trace: &str) -> f64 {
    let mut hits = 0u64;
    let mut n = 0u64;
    for line in trace.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let Some(spray) = v.get("spray") else {
            continue;
        };
        n += 1;
        let g = &spray["geometry"];
        if g.is_null() {
            continue;
        }
        let e = g["e"].as_f64().unwrap();
        let d = g["d"].as_f64().unwrap();
        let d_max = spray["d_max"].as_f64().unwrap();
        if e >= 0.25 && d < d_max {
            hits += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64 * 100.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn logs_roundtrip_and_replay(seed in any::<u64>()) {
        let s = lab_scenario();
        let log = record_session(&s, &mut Fumbler::new(seed)).unwrap();
        let text = serialize_log(&log);
        let back = deserialize_log(&text).unwrap();
        prop_assert_eq!(&back, &log);
        let r1 = replay(&s, &back).unwrap();
        let r2 = replay(&s, &back).unwrap();
        prop_assert_eq!(&r1, &r2);
        prop_assert_eq!(r1.report, build_report(&log, &s).unwrap());
    }

    #[test]
    fn scores_stay_in_range(seed in any::<u64>()) {
        let s = lab_scenario();
        let log = record_session(&s, &mut Fumbler::new(seed)).unwrap();
        let text = serialize_log(&log);
        let aim = aiming_score(&log);
        prop_assert_eq!(aim.pct.to_bits(), naive_aiming_pct(&text).to_bits());
        prop_assert!((0.0..=100.0).contains(&aim.pct));
        let usage = correct_usage(&log).fraction;
        prop_assert!((0.0..=1.0).contains(&usage));
        let evac = evacuation_completion(&log, &s);
        prop_assert!((0.0..=1.0).contains(&evac));
        let report = build_report(&log, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&report.overall));
        if let (Some(r), Some(t)) = (response_time(&log).first_effective_s, report.time_taken_s) {
            prop_assert!(r <= t);
        }
    }

    #[test]
    fn ineffective_sprays_never_raise_aiming(seed in any::<u64>(), extra in 1usize..50, e in 0.0..EFFECTIVE_E_MIN) {
        let s = lab_scenario();
        let mut log = record_session(&s, &mut Fumbler::new(seed)).unwrap();
        let before = aiming_score(&log).pct;
        let start = log.ticks();
        for i in 0..extra {
            let tick = start + i as u64;
            let geometry = (i % 2 == 0).then_some(SprayGeometry { theta: 0.0, d: 1.0, effectiveness: e });
            log.sprays.push(SprayRecord {
                tick,
                extinguisher: "water".into(),
                d_max: 3.0,
                target: geometry.map(|_| "bench".into()),
                geometry,
                wrong_extinguisher: false,
            });
        }
        prop_assert!(aiming_score(&log).pct <= before);
    }
}
