//! Single-lane platoon simulator for connected autonomous vehicles.
//!
//! Vehicles follow a multi-leader extension of the Intelligent Driver Model:
//! each vehicle evaluates the classical IDM against every leader in its
//! communication range and adopts the most conservative (minimum)
//! acceleration. Scheduled attacks corrupt either the perceived leader list
//! or the computed acceleration, and the engine reports the resulting
//! collisions and travel delays.

pub mod attack;
pub mod engine;
pub mod idm;
pub mod metrics;
pub mod plot;
pub mod scenario_io;

pub use attack::{Attack, AttackKind, PerceptionFrame};
pub use engine::{
    CollisionEvent, CollisionPolicy, LogRecord, RunOutput, Scenario, TrajectoryLog, VehicleState,
};
pub use idm::{IdmParams, LeaderObservation};
pub use metrics::RunSummary;
pub use scenario_io::LoadedScenario;
