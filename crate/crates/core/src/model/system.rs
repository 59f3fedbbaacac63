use super::{Atom, ConstraintSet, FeatureDomain, ModelError, Network, StateRef};
use crate::rational::Rational;

/// A reactive system `<S, A, I, T>` whose states are feature vectors.
///
/// `transitions[a]` constrains a current/successor state pair when action `a`
/// is taken. The initial predicate only restricts generated executions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactiveSystem {
    domains: Vec<FeatureDomain>,
    actions: Vec<String>,
    initial: ConstraintSet<StateRef>,
    transitions: Vec<ConstraintSet<StateRef>>,
}

impl ReactiveSystem {
    pub fn new(
        domains: Vec<FeatureDomain>,
        actions: Vec<String>,
        initial: ConstraintSet<StateRef>,
        transitions: Vec<ConstraintSet<StateRef>>,
    ) -> Result<Self, ModelError> {
        let m = domains.len();
        if m == 0 {
            return Err(ModelError::InvalidSystem("system has no features".into()));
        }
        if actions.is_empty() {
            return Err(ModelError::InvalidSystem("system has no actions".into()));
        }
        if transitions.len() != actions.len() {
            return Err(ModelError::InvalidSystem(format!(
                "{} actions but {} transition sets",
                actions.len(),
                transitions.len()
            )));
        }
        for d in &domains {
            d.validate()?;
        }
        for atom in &initial.atoms {
            atom.validate()?;
            for v in atom.expr.vars() {
                match v {
                    StateRef::Cur(f) if *f < m => {}
                    _ => {
                        return Err(ModelError::InvalidSystem(format!(
                            "initial predicate references {v}"
                        )))
                    }
                }
            }
        }
        for (a, set) in transitions.iter().enumerate() {
            for atom in &set.atoms {
                atom.validate()?;
                if let Some(v) = atom.expr.vars().find(|v| v.feature() >= m) {
                    return Err(ModelError::InvalidSystem(format!(
                        "transition for action {} references unknown feature {v}",
                        actions[a]
                    )));
                }
            }
        }
        Ok(ReactiveSystem { domains, actions, initial, transitions })
    }

    pub fn feature_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[FeatureDomain] {
        &self.domains
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn initial(&self) -> &ConstraintSet<StateRef> {
        &self.initial
    }

    pub fn transitions(&self) -> &[ConstraintSet<StateRef>] {
        &self.transitions
    }

    pub fn transition(&self, action: usize) -> &ConstraintSet<StateRef> {
        &self.transitions[action]
    }

    /// Checks the pairing invariant between a system and its controller.
    pub fn check_network(&self, net: &Network) -> Result<(), ModelError> {
        if net.input_width() != self.feature_count() {
            return Err(ModelError::DimensionMismatch {
                expected: self.feature_count(),
                found: net.input_width(),
            });
        }
        if net.output_width() != self.action_count() {
            return Err(ModelError::InvalidSystem(format!(
                "network has {} outputs but system has {} actions",
                net.output_width(),
                self.action_count()
            )));
        }
        Ok(())
    }

    pub fn in_domain(&self, state: &[Rational]) -> Option<usize> {
        if state.len() != self.feature_count() {
            return Some(state.len().min(self.feature_count()));
        }
        state
            .iter()
            .zip(&self.domains)
            .position(|(v, d)| !d.contains(v))
    }

    /// First transition atom violated by `(cur, action, next)`.
    pub fn transition_violation(
        &self,
        cur: &[Rational],
        action: usize,
        next: &[Rational],
    ) -> Option<(usize, &Atom<StateRef>)> {
        self.transitions[action].first_violation(|v| match v {
            StateRef::Cur(f) => cur[*f].clone(),
            StateRef::Next(f) => next[*f].clone(),
        })
    }

    pub fn initial_violation(&self, state: &[Rational]) -> Option<(usize, &Atom<StateRef>)> {
        self.initial.first_violation(|v| state[v.feature()].clone())
    }
}
