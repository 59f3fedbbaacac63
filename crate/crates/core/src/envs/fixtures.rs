//! Small hand-checked systems used throughout the tests.

use crate::model::{
    Atom, ConstraintSet, Execution, FeatureDomain, Layer, LinExpr, Network, ReactiveSystem, StateRef,
};
use crate::rational::{frac, int, Rational};

fn row(values: &[Rational]) -> Vec<Rational> {
    values.to_vec()
}

/// Three binary inputs, one hidden ReLU layer, two outputs.
///
/// Class 0 exactly when feature 1 or feature 2 is set. On `[1,1,1]` the
/// hidden layer is `[3/2, 0, 1]` and the output `[4, 1/2]`.
pub fn toy3() -> Network {
    Network::new(vec![
        Layer::new(
            vec![
                row(&[int(0), int(1), int(1)]),
                row(&[int(1), int(-1), int(0)]),
                row(&[int(1), int(1), int(1)]),
            ],
            vec![frac(-1, 2), int(0), int(-2)],
            true,
        ),
        Layer::new(
            vec![row(&[int(2), int(0), int(1)]), row(&[int(0), frac(1, 4), int(0)])],
            vec![int(0), frac(1, 2)],
            false,
        ),
    ])
    .expect("toy3 is well formed")
}

/// A network whose output is constant, `winner` strictly ahead.
pub fn constant_network(inputs: usize, outputs: usize, winner: usize) -> Network {
    let bias = (0..outputs).map(|o| if o == winner { int(1) } else { int(0) }).collect();
    Network::new(vec![Layer::new(vec![vec![int(0); inputs]; outputs], bias, false)])
        .expect("constant network is well formed")
}

fn next_minus_cur(f: usize) -> LinExpr<StateRef> {
    LinExpr::var(StateRef::Next(f)).term(StateRef::Cur(f), int(-1))
}

fn binary_system(transition: Vec<Atom<StateRef>>) -> ReactiveSystem {
    let t = ConstraintSet::new(transition);
    ReactiveSystem::new(
        vec![FeatureDomain::binary(); 3],
        vec!["A".into(), "B".into()],
        ConstraintSet::empty(),
        vec![t.clone(), t],
    )
    .expect("fixture system is well formed")
}

fn copy_execution() -> Execution {
    Execution::new(vec![vec![int(1), int(1), int(1)], vec![int(1), int(0), int(1)]], vec![0, 0])
        .expect("fixture execution is well formed")
}

/// Feature 2 is copied from one state to the next under every action.
///
/// With `toy3` and the execution `(1,1,1) -> (1,0,1)`, pinning feature 2 at
/// the first step already forces both actions.
pub fn copy_example() -> (ReactiveSystem, Network, Execution) {
    let sys = binary_system(vec![Atom::cmp(next_minus_cur(2), crate::model::Comparator::Eq, int(0)).labelled("copy")]);
    (sys, toy3(), copy_execution())
}

/// Same execution, no transition constraints.
pub fn independent_example() -> (ReactiveSystem, Network, Execution) {
    (binary_system(Vec::new()), toy3(), copy_execution())
}

/// Feature 2 of every successor is forced to 1, so step 2 cannot flip.
pub fn spurious_example() -> (ReactiveSystem, Network, Execution) {
    let sys = binary_system(vec![Atom::pin(StateRef::Next(2), int(1)).labelled("force")]);
    (sys, toy3(), copy_execution())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_execution;

    #[test]
    fn toy3_hand_values() {
        let net = toy3();
        let trace = net.trace(&[int(1), int(1), int(1)]).unwrap();
        assert_eq!(trace[0], vec![frac(3, 2), int(0), int(1)]);
        assert_eq!(trace[1], vec![int(4), frac(1, 2)]);
        let expected = [1, 0, 0, 0, 1, 0, 0, 0];
        for (bits, &class) in expected.iter().enumerate() {
            let x: Vec<Rational> = (0..3).map(|f| int(((bits >> (2 - f)) & 1) as i64)).collect();
            let out = net.forward(&x).unwrap();
            assert!(crate::model::is_decisive(&out, class), "input {bits:03b}");
        }
    }

    #[test]
    fn fixture_executions_are_valid() {
        for (sys, net, exec) in [copy_example(), independent_example(), spurious_example()] {
            validate_execution(&sys, &net, &exec).unwrap();
        }
    }
}
