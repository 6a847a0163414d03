//! Perception building and attack injection.
//!
//! Every tick, each vehicle's perceived leader list is rebuilt from ground
//! truth: up to `comm_range` vehicles ahead, nearest first, plus a virtual
//! stationary obstacle just past the end of the road when the list has room
//! for it. The obstacle is what makes the platoon leader brake to a stop
//! instead of driving off the segment.
//!
//! Attacks then corrupt either that perceived list (position offset,
//! velocity scaling, dropping all leaders) or the acceleration the
//! controller computed (forced acceleration). Ground truth is never touched.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::VehicleState;
use crate::idm::LeaderObservation;

#[derive(Debug, Error, PartialEq)]
pub enum PerceptionError {
    #[error("unknown vehicle id {0}")]
    UnknownVehicle(usize),
}

/// The attack payload. The first three corrupt perception; the last one
/// overrides the actuation output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackKind {
    /// Shift every observed leader position by `dx` meters.
    PositionOffset { dx: f64 },
    /// Multiply every observed leader velocity by `k` (k >= 0).
    VelocityScale { k: f64 },
    /// Empty the observation list, road-end obstacle included; the target
    /// believes it leads the platoon on an open road.
    DropLeaders,
    /// Replace the computed acceleration with `af` m/s^2.
    ForceAcceleration { af: f64 },
}

/// A scheduled attack: what, whom, and when. Active on the half-open
/// window `[start, start + duration)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attack {
    #[serde(flatten)]
    pub kind: AttackKind,
    pub targets: BTreeSet<usize>,
    pub start: f64,
    pub duration: f64,
}

pub fn attack_active(atk: &Attack, t: f64) -> bool {
    t >= atk.start && t < atk.start + atk.duration
}

/// What one vehicle believes about the road ahead at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionFrame {
    pub subject: usize,
    /// Nearest first by position.
    pub observations: Vec<LeaderObservation>,
}

/// Build the subject's ground-truth perception: the nearest `comm_range`
/// vehicles ahead, and the road-end obstacle (a stationary virtual vehicle
/// at `road_end + l`, so the gap to it is exactly the distance left to the
/// end of the road) whenever every real leader is already in range.
pub fn build_perception(
    states: &[VehicleState],
    subject: usize,
    comm_range: usize,
    road_end: f64,
    l: f64,
) -> Result<PerceptionFrame, PerceptionError> {
    let subject_x = states
        .iter()
        .find(|s| s.id == subject)
        .ok_or(PerceptionError::UnknownVehicle(subject))?
        .x;

    let mut ahead: Vec<LeaderObservation> = states
        .iter()
        .filter(|s| s.x > subject_x)
        .map(|s| LeaderObservation {
            position: s.x,
            velocity: s.v,
        })
        .collect();
    ahead.sort_by(|a, b| a.position.total_cmp(&b.position));

    let all_in_range = ahead.len() <= comm_range;
    ahead.truncate(comm_range);
    if all_in_range {
        ahead.push(LeaderObservation {
            position: road_end + l,
            velocity: 0.0,
        });
    }
    Ok(PerceptionFrame {
        subject,
        observations: ahead,
    })
}

/// Apply every active perception attack targeting the frame's subject, in
/// declaration order, then restore nearest-first ordering.
pub fn apply_perception_attacks(
    frame: PerceptionFrame,
    attacks: &[Attack],
    t: f64,
) -> PerceptionFrame {
    let mut frame = frame;
    for atk in attacks {
        if !attack_active(atk, t) || !atk.targets.contains(&frame.subject) {
            continue;
        }
        match atk.kind {
            AttackKind::PositionOffset { dx } => {
                for obs in &mut frame.observations {
                    obs.position += dx;
                }
            }
            AttackKind::VelocityScale { k } => {
                for obs in &mut frame.observations {
                    obs.velocity *= k;
                }
            }
            AttackKind::DropLeaders => frame.observations.clear(),
            AttackKind::ForceAcceleration { .. } => {}
        }
    }
    frame
        .observations
        .sort_by(|a, b| a.position.total_cmp(&b.position));
    frame
}

/// Override the computed acceleration if an active forced-acceleration
/// attack targets the subject; the last active one wins.
pub fn apply_actuation_attack(accel: f64, subject: usize, attacks: &[Attack], t: f64) -> f64 {
    let mut out = accel;
    for atk in attacks {
        if let AttackKind::ForceAcceleration { af } = atk.kind {
            if attack_active(atk, t) && atk.targets.contains(&subject) {
                out = af;
            }
        }
    }
    out
}
