//! Domain types shared by every other module.

mod constraint;
mod execution;
mod mask;
mod network;
mod system;

pub use constraint::{Atom, Comparator, ConstraintSet, FeatureDomain, LinExpr, Relation, StateRef};
pub use execution::{simulate, validate_execution, Execution, State, Violation};
pub use mask::{MaskRole, StepMask};
pub use network::{argmax, is_decisive, Layer, Network};
pub use system::ReactiveSystem;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid execution: {0}")]
    InvalidExecution(String),
    #[error("step {step}: feature {feature} is outside its domain")]
    OutOfDomain { step: usize, feature: usize },
    #[error("initial state violates {0}")]
    InitialViolated(String),
    #[error("step {step} ({action}) produced {state}, violating {atom}")]
    TransitionViolated { step: usize, action: String, atom: String, state: String },
    #[error("step function failed: {0}")]
    Step(String),
    #[error("mask has {found} steps, execution has {expected}")]
    MaskLength { expected: usize, found: usize },
    #[error("mask step {step} names feature {feature}, but there are only {features}")]
    MaskFeature { step: usize, feature: usize, features: usize },
}
