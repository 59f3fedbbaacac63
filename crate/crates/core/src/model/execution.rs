use std::fmt;

use super::{ModelError, Network, ReactiveSystem};
use crate::rational::{self, Rational};

pub type State = Vec<Rational>;

/// `k` visited states and the action chosen in each of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub states: Vec<State>,
    pub actions: Vec<usize>,
}

impl Execution {
    pub fn new(states: Vec<State>, actions: Vec<usize>) -> Result<Self, ModelError> {
        if states.is_empty() {
            return Err(ModelError::InvalidExecution("execution is empty".into()));
        }
        if states.len() != actions.len() {
            return Err(ModelError::InvalidExecution(format!(
                "{} states but {} actions",
                states.len(),
                actions.len()
            )));
        }
        Ok(Execution { states, actions })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The first `len` steps.
    pub fn prefix(&self, len: usize) -> Execution {
        Execution {
            states: self.states[..len].to_vec(),
            actions: self.actions[..len].to_vec(),
        }
    }
}

/// The first broken invariant of an execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Shape(String),
    OutOfDomain { step: usize, feature: usize },
    Initial { atom: String },
    Action { step: usize, expected: usize, chosen: usize },
    Transition { step: usize, atom: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "malformed execution: {msg}"),
            Violation::OutOfDomain { step, feature } => {
                write!(f, "step {step}: feature {feature} outside its domain")
            }
            Violation::Initial { atom } => write!(f, "initial predicate violated: {atom}"),
            Violation::Action { step, expected, chosen } => write!(
                f,
                "step {step}: recorded action {chosen} but the network selects {expected}"
            ),
            Violation::Transition { step, atom } => {
                write!(f, "transition {step}->{}: violated {atom}", step + 1)
            }
        }
    }
}

fn describe(index: usize, atom: &super::Atom<super::StateRef>) -> String {
    match &atom.label {
        Some(label) => format!("atom #{index} ({label}): {atom}"),
        None => format!("atom #{index}: {atom}"),
    }
}

/// Checks every execution invariant; steps are reported 1-based.
pub fn validate_execution(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
) -> Result<(), Violation> {
    if exec.states.is_empty() || exec.states.len() != exec.actions.len() {
        return Err(Violation::Shape("state/action count mismatch".into()));
    }
    if sys.check_network(net).is_err() {
        return Err(Violation::Shape("network does not match the system".into()));
    }
    for (i, s) in exec.states.iter().enumerate() {
        if s.len() != sys.feature_count() {
            return Err(Violation::Shape(format!("step {} has {} features", i + 1, s.len())));
        }
        if let Some(feature) = sys.in_domain(s) {
            return Err(Violation::OutOfDomain { step: i + 1, feature });
        }
    }
    if let Some((idx, atom)) = sys.initial_violation(&exec.states[0]) {
        return Err(Violation::Initial { atom: describe(idx, atom) });
    }
    for (i, (s, &a)) in exec.states.iter().zip(&exec.actions).enumerate() {
        let expected = net.classify(s).expect("dimensions checked");
        if expected != a {
            return Err(Violation::Action { step: i + 1, expected, chosen: a });
        }
        if let Some(next) = exec.states.get(i + 1) {
            if let Some((idx, atom)) = sys.transition_violation(s, a, next) {
                return Err(Violation::Transition { step: i + 1, atom: describe(idx, atom) });
            }
        }
    }
    Ok(())
}

/// Rolls out `k` steps from `s1`, choosing actions with the network and
/// successors with `step`. Every successor is checked against the transition
/// constraints of the chosen action.
pub fn simulate<F>(
    sys: &ReactiveSystem,
    net: &Network,
    mut step: F,
    s1: State,
    k: usize,
) -> Result<Execution, ModelError>
where
    F: FnMut(&[Rational], usize) -> Result<State, ModelError>,
{
    if k == 0 {
        return Err(ModelError::InvalidExecution("k must be positive".into()));
    }
    sys.check_network(net)?;
    if let Some(feature) = sys.in_domain(&s1) {
        return Err(ModelError::OutOfDomain { step: 1, feature });
    }
    if let Some((idx, atom)) = sys.initial_violation(&s1) {
        return Err(ModelError::InitialViolated(describe(idx, atom)));
    }
    let mut states = vec![s1];
    let mut actions = Vec::with_capacity(k);
    loop {
        let cur = states.last().expect("nonempty");
        let a = net.classify(cur)?;
        actions.push(a);
        if states.len() == k {
            break;
        }
        let next = step(cur, a)?;
        if let Some(feature) = sys.in_domain(&next) {
            return Err(ModelError::OutOfDomain { step: states.len() + 1, feature });
        }
        if let Some((idx, atom)) = sys.transition_violation(cur, a, &next) {
            return Err(ModelError::TransitionViolated {
                step: states.len(),
                action: sys.actions()[a].clone(),
                atom: describe(idx, atom),
                state: rational::Vector(&next).to_string(),
            });
        }
        states.push(next);
    }
    Ok(Execution { states, actions })
}
