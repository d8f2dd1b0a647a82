//! `.fslog` trace files: line-delimited JSON.
//!
//! ```text
//! {"version":1,"scenario_id":"lab","scenario_hash":"…","tick_dt_s":0.05}
//! {"t":0,"mv":[0.0,0.0],"aim":[1.0,0.0],"trig":false}
//! {"t":1,"mv":[1.0,0.0],"aim":[1.0,0.0],"trig":true,"sel":"foam"}
//! …
//! {"spray":{"t":1,"ext":"foam","d_max":3.0,"target":"bench","geometry":{…},"wrong":false}}
//! …
//! {"t":0,"ev":{"ignite":"bench"}}
//! …
//! {"outcome":"success","ticks":812}
//! ```
//!
//! Sections appear in that order: header, one record per tick, spray
//! records, events, and a closing outcome record.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{LoggedEvent, SessionLog, SessionOutcome, TRACE_VERSION};
use crate::geometry::Vec2;
use crate::sim::{InputSample, SprayRecord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("trace ends after line {line} without an outcome record")]
    Truncated { line: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    version: u32,
    scenario_id: String,
    scenario_hash: String,
    tick_dt_s: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TickRecord {
    t: u64,
    mv: Vec2,
    aim: Vec2,
    trig: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sel: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SprayLine {
    spray: SprayRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Footer {
    outcome: SessionOutcome,
    ticks: u64,
}

fn push_line<T: Serialize>(out: &mut String, record: &T) {
    out.push_str(&serde_json::to_string(record).expect("trace records always serialize"));
    out.push('\n');
}

pub fn serialize_log(log: &SessionLog) -> String {
    let mut out = String::new();
    push_line(
        &mut out,
        &Header {
            version: log.version,
            scenario_id: log.scenario_id.clone(),
            scenario_hash: log.scenario_hash.clone(),
            tick_dt_s: log.tick_dt,
        },
    );
    for (t, s) in log.samples.iter().enumerate() {
        push_line(
            &mut out,
            &TickRecord {
                t: t as u64,
                mv: s.movement,
                aim: s.aim,
                trig: s.trigger,
                sel: s.select.clone(),
            },
        );
    }
    for spray in &log.sprays {
        push_line(
            &mut out,
            &SprayLine {
                spray: spray.clone(),
            },
        );
    }
    for ev in &log.events {
        push_line(&mut out, ev);
    }
    push_line(
        &mut out,
        &Footer {
            outcome: log.outcome,
            ticks: log.ticks(),
        },
    );
    out
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Ticks,
    Sprays,
    Events,
    Done,
}

fn malformed(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::Malformed {
        line,
        column: 1,
        message: message.into(),
    }
}

fn decode<T: serde::de::DeserializeOwned>(line: usize, v: Value) -> Result<T, TraceError> {
    serde_json::from_value(v).map_err(|e| malformed(line, e.to_string()))
}

pub fn deserialize_log(text: &str) -> Result<SessionLog, TraceError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let parse = |line: usize, raw: &str| -> Result<Value, TraceError> {
        serde_json::from_str(raw).map_err(|e| TraceError::Malformed {
            line,
            column: e.column(),
            message: e.to_string(),
        })
    };

    let Some((_, raw)) = lines.next() else {
        return Err(TraceError::Truncated { line: 0 });
    };
    let header: Header = decode(1, parse(1, raw)?)?;
    if header.version != TRACE_VERSION {
        return Err(malformed(
            1,
            format!("unsupported trace version {}", header.version),
        ));
    }

    let mut log = SessionLog {
        version: header.version,
        scenario_id: header.scenario_id,
        scenario_hash: header.scenario_hash,
        tick_dt: header.tick_dt_s,
        samples: Vec::new(),
        sprays: Vec::new(),
        events: Vec::new(),
        outcome: SessionOutcome::Aborted,
    };
    let mut section = Section::Ticks;
    let mut last_line = 1;

    for (n, raw) in lines {
        last_line = n;
        if section == Section::Done {
            if raw.trim().is_empty() {
                continue;
            }
            return Err(malformed(n, "record after the outcome record"));
        }
        let v = parse(n, raw)?;
        let Some(obj) = v.as_object() else {
            return Err(malformed(n, "expected a JSON object"));
        };
        let kind = if obj.contains_key("outcome") {
            Section::Done
        } else if obj.contains_key("ev") {
            Section::Events
        } else if obj.contains_key("spray") {
            Section::Sprays
        } else {
            Section::Ticks
        };
        if kind < section {
            return Err(malformed(n, "record out of section order"));
        }
        section = kind;

        match kind {
            Section::Ticks => {
                let r: TickRecord = decode(n, v)?;
                if r.t != log.ticks() {
                    return Err(malformed(
                        n,
                        format!("expected tick {}, found {}", log.ticks(), r.t),
                    ));
                }
                log.samples.push(InputSample {
                    movement: r.mv,
                    aim: r.aim,
                    trigger: r.trig,
                    select: r.sel,
                });
            }
            Section::Sprays => {
                let r: SprayLine = decode(n, v)?;
                if log.sprays.last().is_some_and(|p| p.tick > r.spray.tick) {
                    return Err(malformed(n, "spray records out of tick order"));
                }
                log.sprays.push(r.spray);
            }
            Section::Events => {
                let e: LoggedEvent = decode(n, v)?;
                if log.events.last().is_some_and(|p| p.tick > e.tick) {
                    return Err(malformed(n, "events out of tick order"));
                }
                log.events.push(e);
            }
            Section::Done => {
                let f: Footer = decode(n, v)?;
                if f.ticks != log.ticks() {
                    return Err(malformed(
                        n,
                        format!(
                            "outcome claims {} ticks, trace has {}",
                            f.ticks,
                            log.ticks()
                        ),
                    ));
                }
                log.outcome = f.outcome;
            }
        }
    }

    if section != Section::Done {
        return Err(TraceError::Truncated { line: last_line });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::Agent;
    use crate::fixtures::lab_scenario;
    use crate::session::{record_session, Recorder};

    #[test]
    fn fixture_log_roundtrips() {
        let s = lab_scenario();
        let log = record_session(&s, &mut Agent::Perfect.driver()).unwrap();
        let text = serialize_log(&log);
        assert_eq!(deserialize_log(&text).unwrap(), log);
        // and the text itself is stable
        assert_eq!(serialize_log(&deserialize_log(&text).unwrap()), text);
    }

    #[test]
    fn record_shapes() {
        let s = lab_scenario();
        let log = record_session(&s, &mut Agent::Perfect.driver()).unwrap();
        let text = serialize_log(&log);
        let lines: Vec<&str> = text.lines().collect();
        assert!(
            lines[0].starts_with(r#"{"version":1,"scenario_id":"chemistry-lab","scenario_hash":""#)
        );
        assert!(lines[1].starts_with(r#"{"t":0,"mv":["#));
        assert!(
            lines[1].ends_with(r#","trig":true,"sel":"foam"}"#),
            "{}",
            lines[1]
        );
        assert!(lines.contains(&r#"{"t":0,"ev":{"ignite":"bench"}}"#));
        assert!(lines.iter().any(|l| l.ends_with(r#""ev":"exit_reached"}"#)));
        assert_eq!(
            *lines.last().unwrap(),
            format!(r#"{{"outcome":"success","ticks":{}}}"#, log.ticks())
        );
    }

    #[test]
    fn truncated_file_is_an_error() {
        let s = lab_scenario();
        let log = record_session(&s, &mut Agent::Idle.driver()).unwrap();
        let text = serialize_log(&log);
        // cut mid-record
        let cut = &text[..text.len() / 2];
        let err = deserialize_log(cut).unwrap_err();
        assert!(matches!(
            err,
            TraceError::Malformed { .. } | TraceError::Truncated { .. }
        ));
        // cut on a line boundary: no outcome
        let lines: Vec<&str> = text.lines().collect();
        let cut = lines[..lines.len() - 1].join("\n");
        assert_eq!(
            deserialize_log(&cut).unwrap_err(),
            TraceError::Truncated {
                line: lines.len() - 1
            }
        );
        assert_eq!(
            deserialize_log("").unwrap_err(),
            TraceError::Truncated { line: 0 }
        );
    }

    #[test]
    fn garbage_reports_position() {
        let text = "{\"version\":1,\"scenario_id\":\"x\",\"scenario_hash\":\"h\",\"tick_dt_s\":0.05}\n{\"t\":0,\"mv\":[0,0],\"aim\":[1,0],\"trig\":tru}\n";
        match deserialize_log(text).unwrap_err() {
            TraceError::Malformed { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 30);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_sample_log_is_valid() {
        let s = lab_scenario();
        let (_, log) = Recorder::new(&s).unwrap().finish();
        assert!(log.samples.is_empty());
        let text = serialize_log(&log);
        assert_eq!(text.lines().count(), 3);
        assert_eq!(deserialize_log(&text).unwrap(), log);
    }

    #[test]
    fn out_of_order_sections_rejected() {
        let text = concat!(
            "{\"version\":1,\"scenario_id\":\"x\",\"scenario_hash\":\"h\",\"tick_dt_s\":0.05}\n",
            "{\"t\":0,\"ev\":{\"ignite\":\"a\"}}\n",
            "{\"t\":0,\"mv\":[0,0],\"aim\":[1,0],\"trig\":false}\n",
            "{\"outcome\":\"aborted\",\"ticks\":1}\n",
        );
        assert!(matches!(
            deserialize_log(text),
            Err(TraceError::Malformed { line: 3, .. })
        ));
    }

    #[test]
    fn tick_gap_rejected() {
        let text = concat!(
            "{\"version\":1,\"scenario_id\":\"x\",\"scenario_hash\":\"h\",\"tick_dt_s\":0.05}\n",
            "{\"t\":1,\"mv\":[0,0],\"aim\":[1,0],\"trig\":false}\n",
            "{\"outcome\":\"aborted\",\"ticks\":1}\n",
        );
        assert!(matches!(
            deserialize_log(text),
            Err(TraceError::Malformed { line: 2, .. })
        ));
    }
}
