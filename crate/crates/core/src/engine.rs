//! Discrete-time platoon integration with attack injection, collision
//! detection, and trajectory logging.
//!
//! The update is synchronous: every vehicle's acceleration is computed from
//! the state at time t before any state is written. Velocities are clamped
//! at zero (vehicles never reverse) and positions advance by the
//! trapezoidal rule, `x' = x + (v + v') / 2 * dt`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{
    apply_actuation_attack, apply_perception_attacks, build_perception, Attack, PerceptionError,
};
use crate::idm::{free_road_accel, idm_accel, multi_leader_accel, IdmError, IdmParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("scenario field {key} is invalid ({value}): {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error(transparent)]
    Params(#[from] IdmError),
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    // a non-positive true gap reaching the model means collision detection missed it
    #[error("engine invariant violated: {0}")]
    MissedCollision(#[from] IdmError),
    #[error("engine invariant violated: {0}")]
    Perception(#[from] PerceptionError),
}

/// Ground-truth kinematic state of one vehicle. Id 1 is the platoon leader;
/// higher ids trail behind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: usize,
    pub x: f64,
    pub v: f64,
    pub last_accel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionPolicy {
    /// Stop the run at the first collision; the log is truncated there.
    Halt,
    /// Pin both involved vehicles at zero velocity and keep simulating.
    Freeze,
}

/// Initial kinematic state for one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub x: f64,
    pub v: f64,
}

/// A complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub road_length: f64,
    pub n_vehicles: usize,
    pub params: IdmParams,
    pub comm_range: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Explicit initial (x, v) per vehicle, leader first. `None` selects the
    /// default standstill platoon: vehicle n at x = -3000 - (n-1) * (l + 10),
    /// v = 0. The 3000 m run-up ahead of the road segment gives the platoon
    /// room to stretch out and settle into cruise before the road-end
    /// slowdown.
    pub initial: Option<Vec<InitialState>>,
    pub attacks: Vec<Attack>,
    pub collision_policy: CollisionPolicy,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            road_length: 1000.0,
            n_vehicles: 9,
            params: IdmParams::default(),
            comm_range: 3,
            dt: 0.1,
            t_end: 550.0,
            initial: None,
            attacks: Vec::new(),
            collision_policy: CollisionPolicy::Halt,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn bad(key: &str, value: impl ToString, reason: &str) -> ConfigError {
            ConfigError::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
                reason: reason.to_string(),
            }
        }
        self.params.validate()?;
        if !(self.road_length > 0.0) {
            return Err(bad("road_length", self.road_length, "must be > 0"));
        }
        if self.n_vehicles < 1 {
            return Err(bad("n_vehicles", self.n_vehicles, "must be >= 1"));
        }
        if self.comm_range < 1 {
            return Err(bad("comm_range", self.comm_range, "must be >= 1"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(bad("dt", self.dt, "must be > 0"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(bad("t_end", self.t_end, "must be > 0"));
        }
        if let Some(initial) = &self.initial {
            if initial.len() != self.n_vehicles {
                return Err(bad(
                    "initial",
                    initial.len(),
                    "length must equal n_vehicles",
                ));
            }
            for (i, s) in initial.iter().enumerate() {
                if s.v < 0.0 {
                    return Err(bad(&format!("initial[{i}].v"), s.v, "must be >= 0"));
                }
            }
            for pair in initial.windows(2) {
                let gap = pair[0].x - pair[1].x - self.params.l;
                if gap <= 0.0 {
                    return Err(bad(
                        "initial",
                        format!("{} then {}", pair[0].x, pair[1].x),
                        "positions must be strictly decreasing with a positive gap",
                    ));
                }
            }
        }
        for (i, atk) in self.attacks.iter().enumerate() {
            if !(atk.duration > 0.0) {
                return Err(bad(
                    &format!("attacks[{i}].duration"),
                    atk.duration,
                    "must be > 0",
                ));
            }
            if atk.start < 0.0 {
                return Err(bad(&format!("attacks[{i}].start"), atk.start, "must be >= 0"));
            }
            if atk.targets.is_empty() {
                return Err(bad(&format!("attacks[{i}].targets"), "[]", "must be non-empty"));
            }
            for &target in &atk.targets {
                if target < 1 || target > self.n_vehicles {
                    return Err(bad(
                        &format!("attacks[{i}].targets"),
                        target,
                        "must name an existing vehicle id",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn initial_states(&self) -> Vec<VehicleState> {
        match &self.initial {
            Some(initial) => initial
                .iter()
                .enumerate()
                .map(|(i, s)| VehicleState {
                    id: i + 1,
                    x: s.x,
                    v: s.v,
                    last_accel: 0.0,
                })
                .collect(),
            None => (0..self.n_vehicles)
                .map(|i| VehicleState {
                    id: i + 1,
                    x: -3000.0 - (i as f64) * (self.params.l + 10.0),
                    v: 0.0,
                    last_accel: 0.0,
                })
                .collect(),
        }
    }

    pub fn tick_count(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// A rear-end contact: the physical gap between follower and the vehicle
/// directly ahead reached zero or below at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub t: f64,
    pub follower: usize,
    pub leader: usize,
    pub gap: f64,
}

/// One logged sample: state of one vehicle at one tick. `gap` is the
/// physical gap to the vehicle directly ahead, absent for the platoon
/// leader. `accel` is the acceleration applied over the tick starting at
/// `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub id: usize,
    pub x: f64,
    pub v: f64,
    pub accel: f64,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub records: Vec<LogRecord>,
}

impl TrajectoryLog {
    pub fn vehicle_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.records.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Records for one vehicle in time order.
    pub fn series(&self, id: usize) -> Vec<&LogRecord> {
        self.records.iter().filter(|r| r.id == id).collect()
    }

    pub fn tick_count(&self) -> usize {
        let mut ts: Vec<f64> = self.records.iter().map(|r| r.t).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub log: TrajectoryLog,
    pub collisions: Vec<CollisionEvent>,
}

/// Report every adjacent pair whose physical gap is zero or negative.
pub fn detect_collisions(states: &[VehicleState], l: f64, t: f64) -> Vec<CollisionEvent> {
    states
        .windows(2)
        .filter_map(|pair| {
            let gap = pair[0].x - pair[1].x - l;
            (gap <= 0.0).then_some(CollisionEvent {
                t,
                follower: pair[1].id,
                leader: pair[0].id,
                gap,
            })
        })
        .collect()
}

/// Acceleration command for one vehicle at time t: perception, perception
/// attacks, min-over-leaders IDM, actuation attack.
///
/// An attacked frame can claim a leader overlapping the subject (perceived
/// gap <= 0, where the IDM diverges); the controller reads that as an
/// imminent collision and brakes to a standstill within the tick.
fn command_accel(
    states: &[VehicleState],
    subject: &VehicleState,
    scenario: &Scenario,
    t: f64,
) -> Result<f64, EngineError> {
    let p = &scenario.params;
    let frame = build_perception(states, subject.id, scenario.comm_range, scenario.road_length, p.l)?;
    let frame = apply_perception_attacks(frame, &scenario.attacks, t);

    let attacked = scenario
        .attacks
        .iter()
        .any(|a| crate::attack::attack_active(a, t) && a.targets.contains(&subject.id));
    let overlap = frame
        .observations
        .iter()
        .any(|o| o.position - subject.x - p.l <= 0.0);

    let accel = if overlap && attacked {
        let emergency = if scenario.dt > 0.0 { -subject.v / scenario.dt } else { 0.0 };
        frame
            .observations
            .iter()
            .map(|o| {
                let gap = o.position - subject.x - p.l;
                if gap <= 0.0 {
                    Ok(emergency)
                } else {
                    idm_accel(subject.v, subject.v - o.velocity, gap, p)
                        .map_err(EngineError::MissedCollision)
                }
            })
            .try_fold(f64::INFINITY, |acc, r| r.map(|a| acc.min(a)))?
    } else if frame.observations.is_empty() {
        free_road_accel(subject.v, p)
    } else {
        multi_leader_accel(subject.x, subject.v, &frame.observations, p)
            .map_err(EngineError::MissedCollision)?
    };
    Ok(apply_actuation_attack(accel, subject.id, &scenario.attacks, t))
}

fn compute_accels(
    states: &[VehicleState],
    scenario: &Scenario,
    t: f64,
    frozen: &BTreeSet<usize>,
) -> Result<Vec<f64>, EngineError> {
    states
        .iter()
        .map(|s| {
            if frozen.contains(&s.id) {
                Ok(0.0)
            } else {
                command_accel(states, s, scenario, t)
            }
        })
        .collect()
}

fn integrate(states: &mut [VehicleState], accels: &[f64], dt: f64, frozen: &BTreeSet<usize>) {
    for (s, &accel) in states.iter_mut().zip(accels) {
        if frozen.contains(&s.id) {
            s.v = 0.0;
            s.last_accel = 0.0;
            continue;
        }
        let v_next = (s.v + accel * dt).max(0.0);
        s.x += (s.v + v_next) / 2.0 * dt;
        s.v = v_next;
        s.last_accel = accel;
    }
}

fn log_tick(log: &mut TrajectoryLog, states: &[VehicleState], accels: &[f64], l: f64, t: f64) {
    for (i, s) in states.iter().enumerate() {
        let gap = (i > 0).then(|| states[i - 1].x - s.x - l);
        log.records.push(LogRecord {
            t,
            id: s.id,
            x: s.x,
            v: s.v,
            accel: accels[i],
            gap,
        });
    }
}

/// One synchronous engine tick from time t, without collision-policy
/// bookkeeping: all accelerations from the state at t, then integration,
/// then collision detection on the new positions (stamped t + dt).
pub fn step(
    states: &[VehicleState],
    scenario: &Scenario,
    t: f64,
) -> Result<(Vec<VehicleState>, Vec<CollisionEvent>), EngineError> {
    let frozen = BTreeSet::new();
    let accels = compute_accels(states, scenario, t, &frozen)?;
    let mut next = states.to_vec();
    integrate(&mut next, &accels, scenario.dt, &frozen);
    let events = detect_collisions(&next, scenario.params.l, t + scenario.dt);
    Ok((next, events))
}

/// Run a scenario from t = 0 to t_end under its collision policy.
pub fn run(scenario: &Scenario) -> Result<RunOutput, EngineError> {
    scenario.validate()?;
    let mut states = scenario.initial_states();
    let mut log = TrajectoryLog::default();
    let mut collisions = Vec::new();
    let mut frozen: BTreeSet<usize> = BTreeSet::new();
    let mut seen_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let dt = scenario.dt;
    let ticks = scenario.tick_count();

    for k in 0..=ticks {
        let t = k as f64 * dt;
        let accels = compute_accels(&states, scenario, t, &frozen)?;
        log_tick(&mut log, &states, &accels, scenario.params.l, t);
        if k == ticks {
            break;
        }
        integrate(&mut states, &accels, dt, &frozen);
        let t_next = (k + 1) as f64 * dt;
        let fresh: Vec<CollisionEvent> = detect_collisions(&states, scenario.params.l, t_next)
            .into_iter()
            .filter(|e| !seen_pairs.contains(&(e.follower, e.leader)))
            .collect();
        if fresh.is_empty() {
            continue;
        }
        for e in &fresh {
            seen_pairs.insert((e.follower, e.leader));
        }
        collisions.extend(fresh.iter().copied());
        match scenario.collision_policy {
            CollisionPolicy::Halt => {
                let last: Vec<f64> = states.iter().map(|s| s.last_accel).collect();
                log_tick(&mut log, &states, &last, scenario.params.l, t_next);
                break;
            }
            CollisionPolicy::Freeze => {
                for e in &fresh {
                    frozen.insert(e.follower);
                    frozen.insert(e.leader);
                }
                for s in &mut states {
                    if frozen.contains(&s.id) {
                        s.v = 0.0;
                    }
                }
            }
        }
    }
    Ok(RunOutput { log, collisions })
}
