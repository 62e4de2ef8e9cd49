//! Commitment protocols: specification, social state, enactment and
//! compliance checking.

pub mod commitment;
pub mod compliance;
pub mod demo;
pub mod dsl;
pub mod eval;
pub mod event;
pub mod lifecycle;
mod ops;
mod progress;
pub mod proposition;
pub mod protocol;
pub mod sim;
mod social;
pub mod state;
pub mod trace;

pub use commitment::{
    Commitment, CommitmentError, CommitmentId, CommitmentKey, Principal, Provenance, Role, Transition,
};
pub use eval::{evaluate, evaluate_with_witness, TruthStatus};
pub use event::{Event, EventKind, Seq};
pub use lifecycle::{transition, CommitmentState, LifecycleError, Stimulus};
pub use proposition::{CommitmentAtom, Env, EventAtom, Proposition, Term, Value};
pub use protocol::{Casting, MeaningClause, MessageSchema, OrderingConstraint, ParamDecl, ParamType, Protocol};
pub use state::{CommitmentFilter, SocialState};
pub use social::{cast_commitment, ApplyError};
pub use trace::{Setup, Trace, TraceError};
pub use compliance::{check, explain, ComplianceReport, Verdict};
pub use sim::{check_alignment, run, AlignmentReport, Enactment, Scenario, SimError};
