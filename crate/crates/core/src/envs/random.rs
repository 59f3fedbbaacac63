//! Random small finite systems for property tests.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::agents::random_network;
use crate::model::{
    is_decisive, simulate, Atom, Comparator, ConstraintSet, Execution, FeatureDomain, LinExpr, ModelError, Network,
    ReactiveSystem, State, StateRef,
};
use crate::rational::{int, Rational};

#[derive(Debug, Clone)]
pub struct RandomParams {
    pub max_features: usize,
    pub max_actions: usize,
    pub max_k: usize,
    pub max_hidden_layers: usize,
    pub max_width: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { max_features: 4, max_actions: 3, max_k: 3, max_hidden_layers: 2, max_width: 6 }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub sys: ReactiveSystem,
    pub net: Network,
    pub exec: Execution,
}

fn cur(f: usize) -> StateRef {
    StateRef::Cur(f)
}

fn next(f: usize) -> StateRef {
    StateRef::Next(f)
}

fn random_atom<R: Rng>(rng: &mut R, m: usize) -> Atom<StateRef> {
    let f = rng.random_range(0..m);
    match rng.random_range(0..4) {
        0 => Atom::cmp(LinExpr::var(next(f)).term(cur(f), int(-1)), Comparator::Eq, int(0)).labelled("copy"),
        1 => Atom::pin(next(f), int(rng.random_range(0..=1))).labelled("set"),
        2 => Atom::cmp(LinExpr::var(next(f)).term(cur(f), int(1)), Comparator::Eq, int(1)).labelled("flip"),
        _ => {
            let g = rng.random_range(0..m);
            Atom::cmp(LinExpr::var(next(f)).term(cur(g), int(-1)), Comparator::Ge, int(0)).labelled("follow")
        }
    }
}

pub fn binary_states(m: usize) -> Vec<State> {
    (0..1usize << m)
        .map(|bits| (0..m).map(|f| int(((bits >> (m - 1 - f)) & 1) as i64)).collect())
        .collect()
}

/// A random binary system; transitions are small conjunctions of copy, set,
/// flip and follow atoms.
pub fn random_system<R: Rng>(rng: &mut R, m: usize, actions: usize) -> ReactiveSystem {
    let transitions = (0..actions)
        .map(|_| {
            let n = rng.random_range(0..=m);
            ConstraintSet::new((0..n).map(|_| random_atom(rng, m)).collect())
        })
        .collect();
    ReactiveSystem::new(
        vec![FeatureDomain::binary(); m],
        (0..actions).map(|a| format!("a{a}")).collect(),
        ConstraintSet::empty(),
        transitions,
    )
    .expect("random system is well formed")
}

/// Tries to generate a valid execution whose every step has a strictly
/// unique best action. Returns `None` after a bounded number of attempts.
pub fn random_instance<R: Rng>(rng: &mut R, p: &RandomParams) -> Option<Instance> {
    for _ in 0..50 {
        let m = rng.random_range(2..=p.max_features);
        let actions = rng.random_range(2..=p.max_actions);
        let layers = rng.random_range(1..=p.max_hidden_layers);
        let hidden: Vec<usize> = (0..layers).map(|_| rng.random_range(2..=p.max_width)).collect();
        let sys = random_system(rng, m, actions);
        let net = random_network(rng, m, &hidden, actions);
        let k = rng.random_range(1..=p.max_k);
        let states = binary_states(m);
        for _ in 0..10 {
            let s1 = states.choose(rng).expect("nonempty").clone();
            let step = |s: &[Rational], a: usize| -> Result<State, ModelError> {
                let options: Vec<&State> =
                    states.iter().filter(|t| sys.transition_violation(s, a, t).is_none()).collect();
                options
                    .choose(&mut *rng)
                    .map(|t| (*t).clone())
                    .ok_or_else(|| ModelError::Step("no successor".into()))
            };
            let Ok(exec) = simulate(&sys, &net, step, s1, k) else { continue };
            let decisive = exec
                .states
                .iter()
                .zip(&exec.actions)
                .all(|(s, &a)| is_decisive(&net.forward(s).expect("width checked"), a));
            if decisive {
                return Some(Instance { sys, net, exec });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_execution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut made = 0;
        for _ in 0..20 {
            if let Some(inst) = random_instance(&mut rng, &RandomParams::default()) {
                validate_execution(&inst.sys, &inst.net, &inst.exec).unwrap();
                made += 1;
            }
        }
        assert!(made >= 15);
    }
}
