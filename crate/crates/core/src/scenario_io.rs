//! Scenario file parsing and run-artifact serialization.
//!
//! Scenario documents are JSON. Every key is optional and defaults to the
//! study configuration (1000 m road, nine vehicles, three-leader
//! communication range, the Table-style IDM constants). Unknown keys are
//! rejected, and validation errors name the offending key.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{Attack, AttackKind};
use crate::engine::{
    CollisionPolicy, ConfigError, InitialState, LogRecord, Scenario, TrajectoryLog,
};
use crate::idm::IdmParams;
use crate::metrics::RunSummary;

#[derive(Debug, Error)]
pub enum ScenarioIoError {
    #[error("malformed scenario document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] ConfigError),
    #[error("malformed trajectory CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

fn invalid(key: &str, value: impl ToString, reason: &str) -> ScenarioIoError {
    ScenarioIoError::Invalid(ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    })
}

/// A parsed scenario plus the metric settings that ride along in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub checkpoint: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ScenarioDoc {
    road_length: f64,
    n_vehicles: usize,
    params: IdmParams,
    comm_range: usize,
    dt: f64,
    t_end: f64,
    checkpoint: f64,
    collision_policy: CollisionPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial: Option<Vec<InitialState>>,
    attacks: Vec<AttackDoc>,
}

impl Default for ScenarioDoc {
    fn default() -> Self {
        let sc = Scenario::default();
        Self {
            road_length: sc.road_length,
            n_vehicles: sc.n_vehicles,
            params: sc.params,
            comm_range: sc.comm_range,
            dt: sc.dt,
            t_end: sc.t_end,
            checkpoint: 600.0,
            collision_policy: sc.collision_policy,
            initial: None,
            attacks: Vec::new(),
        }
    }
}

/// Flat attack record as written in scenario files. The payload key that
/// must be present depends on `kind`: `dx` for position_offset, `k` for
/// velocity_scale, `af` for force_acceleration, none for drop_leaders.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttackDoc {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    dx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    af: Option<f64>,
    targets: Vec<usize>,
    start: f64,
    duration: f64,
}

impl AttackDoc {
    fn into_attack(self, index: usize) -> Result<Attack, ScenarioIoError> {
        let key = |field: &str| format!("attacks[{index}].{field}");
        let payload_conflict = |kind: &str, field: &str| {
            invalid(&key(field), "present", &format!("not a valid key for kind {kind}"))
        };
        let kind = match self.kind.as_str() {
            "position_offset" => {
                if self.k.is_some() {
                    return Err(payload_conflict("position_offset", "k"));
                }
                if self.af.is_some() {
                    return Err(payload_conflict("position_offset", "af"));
                }
                let dx = self
                    .dx
                    .ok_or_else(|| invalid(&key("dx"), "missing", "required for position_offset"))?;
                AttackKind::PositionOffset { dx }
            }
            "velocity_scale" => {
                if self.dx.is_some() {
                    return Err(payload_conflict("velocity_scale", "dx"));
                }
                if self.af.is_some() {
                    return Err(payload_conflict("velocity_scale", "af"));
                }
                let k = self
                    .k
                    .ok_or_else(|| invalid(&key("k"), "missing", "required for velocity_scale"))?;
                if k < 0.0 {
                    return Err(invalid(&key("k"), k, "must be >= 0"));
                }
                AttackKind::VelocityScale { k }
            }
            "drop_leaders" => {
                if self.dx.is_some() || self.k.is_some() || self.af.is_some() {
                    return Err(payload_conflict("drop_leaders", "dx/k/af"));
                }
                AttackKind::DropLeaders
            }
            "force_acceleration" => {
                if self.dx.is_some() {
                    return Err(payload_conflict("force_acceleration", "dx"));
                }
                if self.k.is_some() {
                    return Err(payload_conflict("force_acceleration", "k"));
                }
                let af = self.af.ok_or_else(|| {
                    invalid(&key("af"), "missing", "required for force_acceleration")
                })?;
                AttackKind::ForceAcceleration { af }
            }
            other => {
                return Err(invalid(
                    &key("kind"),
                    other,
                    "expected one of position_offset, velocity_scale, drop_leaders, force_acceleration",
                ))
            }
        };
        Ok(Attack {
            kind,
            targets: self.targets.into_iter().collect(),
            start: self.start,
            duration: self.duration,
        })
    }

    fn from_attack(atk: &Attack) -> Self {
        let (kind, dx, k, af) = match atk.kind {
            AttackKind::PositionOffset { dx } => ("position_offset", Some(dx), None, None),
            AttackKind::VelocityScale { k } => ("velocity_scale", None, Some(k), None),
            AttackKind::DropLeaders => ("drop_leaders", None, None, None),
            AttackKind::ForceAcceleration { af } => ("force_acceleration", None, None, Some(af)),
        };
        Self {
            kind: kind.to_string(),
            dx,
            k,
            af,
            targets: atk.targets.iter().copied().collect(),
            start: atk.start,
            duration: atk.duration,
        }
    }
}

/// Parse and fully validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<LoadedScenario, ScenarioIoError> {
    let doc: ScenarioDoc = serde_json::from_str(text)?;
    let attacks = doc
        .attacks
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.into_attack(i))
        .collect::<Result<Vec<_>, _>>()?;
    let scenario = Scenario {
        road_length: doc.road_length,
        n_vehicles: doc.n_vehicles,
        params: doc.params,
        comm_range: doc.comm_range,
        dt: doc.dt,
        t_end: doc.t_end,
        initial: doc.initial,
        attacks,
        collision_policy: doc.collision_policy,
    };
    scenario.validate()?;
    if !(0.0..=scenario.road_length).contains(&doc.checkpoint) {
        return Err(invalid(
            "checkpoint",
            doc.checkpoint,
            "must lie within [0, road_length]",
        ));
    }
    Ok(LoadedScenario {
        scenario,
        checkpoint: doc.checkpoint,
    })
}

/// Serialize a scenario with all defaults expanded; `parse_scenario` of the
/// result reproduces the input exactly.
pub fn write_scenario(loaded: &LoadedScenario) -> String {
    let sc = &loaded.scenario;
    let doc = ScenarioDoc {
        road_length: sc.road_length,
        n_vehicles: sc.n_vehicles,
        params: sc.params,
        comm_range: sc.comm_range,
        dt: sc.dt,
        t_end: sc.t_end,
        checkpoint: loaded.checkpoint,
        collision_policy: sc.collision_policy,
        initial: sc.initial.clone(),
        attacks: sc.attacks.iter().map(AttackDoc::from_attack).collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("scenario serialization");
    out.push('\n');
    out
}

/// Render a number with the given number of significant digits, plain
/// decimal notation.
fn fmt_sig(v: f64, digits: i32) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Trajectory log as CSV: header `t,id,x,v,a,gap`, one row per (tick,
/// vehicle), numbers at 6 significant digits, gap column empty for the
/// platoon leader.
pub fn write_trajectory_csv(log: &TrajectoryLog) -> String {
    let mut out = String::from("t,id,x,v,a,gap\n");
    for r in &log.records {
        let gap = r.gap.map(|g| fmt_sig(g, 6)).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_sig(r.t, 6),
            r.id,
            fmt_sig(r.x, 6),
            fmt_sig(r.v, 6),
            fmt_sig(r.accel, 6),
            gap
        ));
    }
    out
}

/// Parse a trajectory CSV produced by [`write_trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<TrajectoryLog, ScenarioIoError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "t,id,x,v,a,gap")) => {}
        _ => {
            return Err(ScenarioIoError::Csv {
                line: 1,
                reason: "missing header t,id,x,v,a,gap".to_string(),
            })
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(ScenarioIoError::Csv {
                line: i + 1,
                reason: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let num = |s: &str| {
            s.parse::<f64>().map_err(|e| ScenarioIoError::Csv {
                line: i + 1,
                reason: e.to_string(),
            })
        };
        records.push(LogRecord {
            t: num(fields[0])?,
            id: fields[1].parse().map_err(|e| ScenarioIoError::Csv {
                line: i + 1,
                reason: format!("{e}"),
            })?,
            x: num(fields[2])?,
            v: num(fields[3])?,
            accel: num(fields[4])?,
            gap: if fields[5].is_empty() {
                None
            } else {
                Some(num(fields[5])?)
            },
        });
    }
    Ok(TrajectoryLog { records })
}

/// Run summary as pretty-printed JSON.
pub fn write_summary_json(summary: &RunSummary) -> String {
    let mut out = serde_json::to_string_pretty(summary).expect("summary serialization");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_document_is_the_baseline_scenario() {
        let loaded = parse_scenario("{}").unwrap();
        assert_eq!(loaded.scenario, Scenario::default());
        assert_abs_diff_eq!(loaded.checkpoint, 600.0);
    }

    #[test]
    fn spacing_attack_document() {
        let text = r#"{
            "attacks": [
                {"kind": "position_offset", "dx": 80.0, "targets": [5], "start": 10.0, "duration": 75.0}
            ]
        }"#;
        let loaded = parse_scenario(text).unwrap();
        assert_eq!(loaded.scenario.attacks.len(), 1);
        assert_eq!(
            loaded.scenario.attacks[0].kind,
            AttackKind::PositionOffset { dx: 80.0 }
        );
        assert!(loaded.scenario.attacks[0].targets.contains(&5));
    }

    #[test]
    fn zero_dt_error_names_the_key() {
        let err = parse_scenario(r#"{"dt": 0.0}"#).unwrap_err();
        assert!(err.to_string().contains("dt"), "{err}");
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        assert!(parse_scenario(r#"{"road_len": 500.0}"#).is_err());
    }

    #[test]
    fn unknown_attack_key_is_rejected() {
        let text = r#"{"attacks": [{"kind": "drop_leaders", "targets": [5], "start": 0.0, "duration": 1.0, "oops": 1}]}"#;
        assert!(parse_scenario(text).is_err());
    }

    #[test]
    fn wrong_payload_for_kind_is_rejected() {
        let missing = r#"{"attacks": [{"kind": "position_offset", "targets": [5], "start": 0.0, "duration": 1.0}]}"#;
        assert!(parse_scenario(missing).is_err());
        let extra = r#"{"attacks": [{"kind": "drop_leaders", "dx": 3.0, "targets": [5], "start": 0.0, "duration": 1.0}]}"#;
        assert!(parse_scenario(extra).is_err());
        let unknown = r#"{"attacks": [{"kind": "replay", "targets": [5], "start": 0.0, "duration": 1.0}]}"#;
        let err = parse_scenario(unknown).unwrap_err();
        assert!(err.to_string().contains("kind"), "{err}");
    }

    #[test]
    fn overlapping_initial_positions_rejected() {
        let text = r#"{"n_vehicles": 2, "initial": [{"x": 0.0, "v": 0.0}, {"x": -3.0, "v": 0.0}]}"#;
        let err = parse_scenario(text).unwrap_err();
        assert!(err.to_string().contains("initial"), "{err}");
    }

    #[test]
    fn checkpoint_outside_road_rejected() {
        assert!(parse_scenario(r#"{"checkpoint": 1500.0}"#).is_err());
    }

    #[test]
    fn scenario_round_trip_is_exact() {
        let text = r#"{
            "n_vehicles": 4,
            "dt": 0.05,
            "t_end": 50.0,
            "checkpoint": 400.0,
            "collision_policy": "freeze",
            "initial": [{"x": 0.0, "v": 2.0}, {"x": -12.0, "v": 2.0}, {"x": -24.0, "v": 2.0}, {"x": -36.0, "v": 2.0}],
            "attacks": [
                {"kind": "velocity_scale", "k": 0.1, "targets": [2], "start": 10.0, "duration": 70.0},
                {"kind": "force_acceleration", "af": -2.0, "targets": [3], "start": 30.0, "duration": 10.0}
            ]
        }"#;
        let loaded = parse_scenario(text).unwrap();
        let written = write_scenario(&loaded);
        let reparsed = parse_scenario(&written).unwrap();
        assert_eq!(loaded, reparsed);
    }

    #[test]
    fn empty_log_is_header_only() {
        assert_eq!(write_trajectory_csv(&TrajectoryLog::default()), "t,id,x,v,a,gap\n");
    }

    #[test]
    fn single_record_is_two_lines() {
        let log = TrajectoryLog {
            records: vec![LogRecord {
                t: 0.0,
                id: 1,
                x: 0.0,
                v: 0.0,
                accel: 0.73,
                gap: None,
            }],
        };
        let csv = write_trajectory_csv(&log);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv, "t,id,x,v,a,gap\n0,1,0,0,0.730000,\n");
    }

    #[test]
    fn csv_round_trip_within_rendering_precision() {
        let log = TrajectoryLog {
            records: vec![
                LogRecord { t: 12.3, id: 1, x: 123.456789, v: 9.87654, accel: -0.123456, gap: None },
                LogRecord { t: 12.3, id: 2, x: 103.456789, v: 9.87, accel: 0.5, gap: Some(15.0) },
            ],
        };
        let parsed = parse_trajectory_csv(&write_trajectory_csv(&log)).unwrap();
        assert_eq!(parsed.records.len(), 2);
        for (a, b) in parsed.records.iter().zip(&log.records) {
            assert_eq!(a.id, b.id);
            assert!((a.x - b.x).abs() < 1e-3 * b.x.abs().max(1.0));
            assert!((a.v - b.v).abs() < 1e-4);
            assert!((a.accel - b.accel).abs() < 1e-5);
            assert_eq!(a.gap.is_some(), b.gap.is_some());
        }
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(parse_trajectory_csv("nope\n").is_err());
        assert!(parse_trajectory_csv("t,id,x,v,a,gap\n1,2,3\n").is_err());
        assert!(parse_trajectory_csv("t,id,x,v,a,gap\nx,1,0,0,0,\n").is_err());
    }

    #[test]
    fn fmt_sig_examples() {
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(0.73, 6), "0.730000");
        assert_eq!(fmt_sig(123.456789, 6), "123.457");
        assert_eq!(fmt_sig(-0.00123456789, 6), "-0.00123457");
        assert_eq!(fmt_sig(1000.0, 6), "1000.00");
    }
}
