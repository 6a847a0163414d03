//! Intelligent Driver Model car-following math.
//!
//! The subject vehicle's acceleration is
//! `a * (1 - (v/v0)^delta - (s*/gap)^2)` where the desired gap is
//! `s* = s0 + T*v + v*dv / (2*sqrt(a*b))` and `dv` is the approach rate
//! (subject speed minus leader speed, positive when closing in).
//!
//! In the connected-platoon extension the subject evaluates the law against
//! every leader it can hear from and keeps the minimum, i.e. the most
//! conservative reaction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IdmError {
    #[error("parameter {name} is out of range: {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("non-positive gap {gap} m: the vehicles have already collided")]
    NonPositiveGap { gap: f64 },
    #[error("no finite equilibrium gap at speed {v} m/s (desired speed {v0} m/s)")]
    NoEquilibrium { v: f64, v0: f64 },
}

/// IDM model constants. Defaults are the platoon study values:
/// v0=10, s0=2, T=1.5, a=0.73, b=1.67, delta=4, l=5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdmParams {
    /// Desired velocity on a free road, m/s.
    pub v0: f64,
    /// Minimum standstill gap, m.
    pub s0: f64,
    /// Maximum acceleration, m/s^2.
    pub a: f64,
    /// Comfortable deceleration, m/s^2.
    pub b: f64,
    /// Desired time headway, s.
    #[serde(rename = "T")]
    pub headway: f64,
    /// Acceleration exponent, dimensionless.
    pub delta: f64,
    /// Vehicle length, m.
    pub l: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            v0: 10.0,
            s0: 2.0,
            a: 0.73,
            b: 1.67,
            headway: 1.5,
            delta: 4.0,
            l: 5.0,
        }
    }
}

impl IdmParams {
    pub fn validate(&self) -> Result<(), IdmError> {
        let positive = [
            ("v0", self.v0),
            ("s0", self.s0),
            ("a", self.a),
            ("b", self.b),
            ("T", self.headway),
            ("l", self.l),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(IdmError::InvalidParam { name, value });
            }
        }
        if !(self.delta >= 1.0) || !self.delta.is_finite() {
            return Err(IdmError::InvalidParam {
                name: "delta",
                value: self.delta,
            });
        }
        Ok(())
    }
}

/// What the subject believes about one vehicle ahead of it: longitudinal
/// position and speed, as received over V2V. This is the surface that
/// perception attacks corrupt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaderObservation {
    pub position: f64,
    pub velocity: f64,
}

/// Desired (safe) gap `s*` for the given subject speed and approach rate.
///
/// Applied literally: when `dv` is strongly negative the result may drop
/// below `s0`, or below zero. No clamping.
pub fn desired_gap(v: f64, dv: f64, p: &IdmParams) -> f64 {
    p.s0 + p.headway * v + v * dv / (2.0 * (p.a * p.b).sqrt())
}

/// Free-road acceleration `a * (1 - (v/v0)^delta)`, the law with the
/// interaction term absent. A vehicle that perceives nobody ahead of it
/// drives by this alone.
pub fn free_road_accel(v: f64, p: &IdmParams) -> f64 {
    p.a * (1.0 - (v / p.v0).powf(p.delta))
}

/// Full IDM acceleration against a single leader at distance `gap`.
///
/// Unbounded below (hard braking is permitted), bounded above by `a`.
/// A non-positive gap means the vehicles already collided; the caller is
/// expected to detect that before asking for an acceleration.
pub fn idm_accel(v: f64, dv: f64, gap: f64, p: &IdmParams) -> Result<f64, IdmError> {
    if gap <= 0.0 {
        return Err(IdmError::NonPositiveGap { gap });
    }
    let s_star = desired_gap(v, dv, p);
    Ok(p.a * (1.0 - (v / p.v0).powf(p.delta) - (s_star / gap).powi(2)))
}

/// Multi-leader acceleration: evaluate the IDM against each observed leader
/// as if it were the vehicle directly ahead and keep the minimum. An empty
/// observation list is the free-road case.
///
/// The gap to leader j is `position_j - subject_x - l`, a single vehicle
/// length regardless of how many vehicles sit in between.
pub fn multi_leader_accel(
    subject_x: f64,
    subject_v: f64,
    observations: &[LeaderObservation],
    p: &IdmParams,
) -> Result<f64, IdmError> {
    if observations.is_empty() {
        return Ok(free_road_accel(subject_v, p));
    }
    let mut min_accel = f64::INFINITY;
    for obs in observations {
        let gap = obs.position - subject_x - p.l;
        let dv = subject_v - obs.velocity;
        let accel = idm_accel(subject_v, dv, gap, p)?;
        min_accel = min_accel.min(accel);
    }
    Ok(min_accel)
}

/// The unique gap at which `idm_accel(v, 0, gap)` vanishes:
/// `s*(v, 0) / sqrt(1 - (v/v0)^delta)`. Only defined for `0 < v < v0`.
pub fn equilibrium_gap(v: f64, p: &IdmParams) -> Result<f64, IdmError> {
    if v >= p.v0 {
        return Err(IdmError::NoEquilibrium { v, v0: p.v0 });
    }
    Ok(desired_gap(v, 0.0, p) / (1.0 - (v / p.v0).powf(p.delta)).sqrt())
}
