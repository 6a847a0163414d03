//! Failure indicators: checkpoint arrival times, travel delay against a
//! baseline run, and collision summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{CollisionEvent, TrajectoryLog};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("unknown vehicle id {0}")]
    UnknownVehicle(usize),
}

/// Per-run outcome summary. `arrivals` holds the checkpoint crossing time
/// for each vehicle that reached it; `delays` is present only when a
/// baseline run was supplied and covers vehicles that arrived in both runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub checkpoint: f64,
    pub collisions: Vec<CollisionEvent>,
    pub arrivals: BTreeMap<usize, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delays: Option<BTreeMap<usize, f64>>,
}

/// First time the vehicle's position reaches `checkpoint`, linearly
/// interpolated between the straddling ticks. `None` if the log ends first.
pub fn arrival_time(
    log: &TrajectoryLog,
    vehicle: usize,
    checkpoint: f64,
) -> Result<Option<f64>, MetricsError> {
    let series = log.series(vehicle);
    if series.is_empty() {
        return Err(MetricsError::UnknownVehicle(vehicle));
    }
    let mut prev: Option<&crate::engine::LogRecord> = None;
    for rec in series {
        if rec.x >= checkpoint {
            let t = match prev {
                Some(p) if rec.x > p.x => {
                    p.t + (checkpoint - p.x) / (rec.x - p.x) * (rec.t - p.t)
                }
                _ => rec.t,
            };
            return Ok(Some(t));
        }
        prev = Some(rec);
    }
    Ok(None)
}

/// Attacked-run arrival minus baseline-run arrival at the checkpoint;
/// `None` if the vehicle misses the checkpoint in either run.
pub fn travel_delay(
    baseline: &TrajectoryLog,
    attacked: &TrajectoryLog,
    vehicle: usize,
    checkpoint: f64,
) -> Result<Option<f64>, MetricsError> {
    let base = arrival_time(baseline, vehicle, checkpoint)?;
    let atk = arrival_time(attacked, vehicle, checkpoint)?;
    Ok(match (base, atk) {
        (Some(b), Some(a)) => Some(a - b),
        _ => None,
    })
}

/// Assemble the summary for one run, optionally against a no-attack
/// baseline log of the same platoon.
pub fn summarize(
    log: &TrajectoryLog,
    events: &[CollisionEvent],
    checkpoint: f64,
    baseline: Option<&TrajectoryLog>,
) -> RunSummary {
    let ids = log.vehicle_ids();
    let mut arrivals = BTreeMap::new();
    for &id in &ids {
        if let Ok(Some(t)) = arrival_time(log, id, checkpoint) {
            arrivals.insert(id, t);
        }
    }
    let delays = baseline.map(|base| {
        let mut delays = BTreeMap::new();
        for &id in &ids {
            if let Ok(Some(d)) = travel_delay(base, log, id, checkpoint) {
                delays.insert(id, d);
            }
        }
        delays
    });
    RunSummary {
        checkpoint,
        collisions: events.to_vec(),
        arrivals,
        delays,
    }
}
