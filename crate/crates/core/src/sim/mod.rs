//! Discrete-event enactment of a protocol by policy-driven principals.

mod alignment;
mod engine;
pub mod policy;
mod scenario;

pub use alignment::{check_alignment, AlignmentReport, Misalignment, MisalignmentKind};
pub use engine::{run, validate_scenario, Enactment, SimError};
pub use policy::{enabled, Candidate, GroundAction, Policy, PolicyError};
pub use scenario::{protocol_path, Action, Delay, Network, PolicyKind, PolicySpec, Rule, Scenario};
