//! Formal explanations and contrastive examples for multi-step executions
//! of reactive systems controlled by ReLU networks.
//!
//! All arithmetic is exact. The [`verifier`] decides linear queries over
//! unrolled networks, [`queries`] builds the explanation and contrastive
//! checks, and [`explain`] runs the search methods on top of them.

pub mod envs;
pub mod explain;
pub mod io;
pub mod model;
pub mod oracle;
pub mod queries;
pub mod rational;
pub mod verifier;

pub use explain::{
    method1, method2, method3_minimal, method3_minimum, method4, minimum_hitting_set, CxpCatalog, ExplainError,
    ExplainOptions, ExplainResult, ExplainStats, Guarantee, MethodId, Target,
};
pub use model::{
    Atom, Comparator, ConstraintSet, Execution, FeatureDomain, LinExpr, MaskRole, ModelError, Network,
    ReactiveSystem, State, StateRef, StepMask,
};
pub use queries::Semantics;
pub use rational::Rational;
pub use verifier::{solve, SolveOptions, SolveStats, Verdict};
