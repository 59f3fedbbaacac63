//! TurtleBot: a robot turning in place toward a target.
//!
//! Features: seven lidar readings (x0..x6) spaced 30 degrees apart, the
//! angle to the target (x7) and the distance to it (x8), all in `[0, 1]`.
//! Only turns have transition constraints; FORWARD ends an execution.

use crate::model::{
    Atom, Comparator, ConstraintSet, FeatureDomain, LinExpr, ModelError, ReactiveSystem, State, StateRef,
};
use crate::rational::{frac, int, Rational};

pub const FORWARD: usize = 0;
pub const LEFT: usize = 1;
pub const RIGHT: usize = 2;
pub const ACTION_NAMES: [&str; 3] = ["FORWARD", "LEFT", "RIGHT"];

/// Constraint families carried by each turn action.
pub const FAMILIES: [&str; 6] = [
    "lidar-bounds",
    "distance-bounds",
    "angle-bounds",
    "sliding-window",
    "turn",
    "distance-invariant",
];

/// The fixed surroundings: twelve lidar readings around the robot, indexed
/// clockwise from the heading at angle 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurtleBotSpec {
    pub ring: [Rational; 12],
    pub distance: Rational,
}

impl Default for TurtleBotSpec {
    fn default() -> Self {
        let tenths = [9, 8, 6, 4, 3, 5, 7, 10, 10, 6, 3, 2];
        TurtleBotSpec { ring: tenths.map(|t| frac(t, 10)), distance: frac(1, 2) }
    }
}

impl TurtleBotSpec {
    /// Heading index of an angle, `round(12·angle) mod 12`.
    fn heading(angle: &Rational) -> i64 {
        (angle * int(12)).round().to_integer().try_into().unwrap_or(0)
    }

    /// Lidar reading `i` at a heading: `ring[(i - heading) mod 12]`.
    pub fn lidar(&self, heading: i64, i: usize) -> Rational {
        self.ring[(i as i64 - heading).rem_euclid(12) as usize].clone()
    }

    /// The state at an angle that is a multiple of 1/12.
    pub fn state(&self, twelfths: i64) -> State {
        let mut s: State = (0..7).map(|i| self.lidar(twelfths, i)).collect();
        s.push(frac(twelfths, 12));
        s.push(self.distance.clone());
        s
    }
}

fn var(r: StateRef) -> LinExpr<StateRef> {
    LinExpr::var(r)
}

fn bounds(f: usize, lo: Rational, label: &str, out: &mut Vec<Atom<StateRef>>) {
    out.push(Atom::cmp(var(StateRef::Cur(f)), Comparator::Ge, lo).labelled(label));
    out.push(Atom::cmp(var(StateRef::Cur(f)), Comparator::Le, int(1)).labelled(label));
}

pub fn transition(action: usize) -> ConstraintSet<StateRef> {
    if action == FORWARD {
        return ConstraintSet::new(vec![Atom::falsum().labelled("forward-ends")]);
    }
    let mut atoms = Vec::new();
    for i in 0..7 {
        bounds(i, frac(1, 5), FAMILIES[0], &mut atoms);
    }
    bounds(8, frac(1, 5), FAMILIES[1], &mut atoms);
    bounds(7, int(0), FAMILIES[2], &mut atoms);
    for i in 1..7 {
        // RIGHT: x_i = x_{i-1}'; LEFT: x_{i-1} = x_i'
        let (cur, next) = if action == RIGHT { (i, i - 1) } else { (i - 1, i) };
        let expr = var(StateRef::Next(next)).term(StateRef::Cur(cur), int(-1));
        atoms.push(Atom::cmp(expr, Comparator::Eq, int(0)).labelled(FAMILIES[3]));
    }
    let turn = if action == RIGHT { frac(-1, 12) } else { frac(1, 12) };
    let expr = var(StateRef::Next(7)).term(StateRef::Cur(7), int(-1));
    atoms.push(Atom::cmp(expr, Comparator::Eq, turn).labelled(FAMILIES[4]));
    let expr = var(StateRef::Next(8)).term(StateRef::Cur(8), int(-1));
    atoms.push(Atom::cmp(expr, Comparator::Eq, int(0)).labelled(FAMILIES[5]));
    ConstraintSet::new(atoms)
}

pub fn turtlebot_system() -> ReactiveSystem {
    let unit = FeatureDomain::interval(int(0), int(1)).expect("unit interval");
    ReactiveSystem::new(
        vec![unit; 9],
        ACTION_NAMES.iter().map(|s| s.to_string()).collect(),
        ConstraintSet::empty(),
        (0..3).map(transition).collect(),
    )
    .expect("turtlebot system is well formed")
}

/// Canonical successor of a turn: shift the lidar window by one slot of the
/// ring, update the angle by 1/12 and keep the distance.
pub fn turtlebot_step(spec: &TurtleBotSpec, state: &[Rational], action: usize) -> Result<State, ModelError> {
    let (delta, shift) = match action {
        RIGHT => (frac(-1, 12), -1),
        LEFT => (frac(1, 12), 1),
        _ => return Err(ModelError::Step("FORWARD ends the execution".into())),
    };
    let angle = &state[7] + delta;
    if angle < int(0) || angle > int(1) {
        return Err(ModelError::Step("angle leaves [0, 1]".into()));
    }
    let heading = TurtleBotSpec::heading(&state[7]) + shift;
    let mut next: State = Vec::with_capacity(9);
    for i in 0..7 {
        // keep the slots the transition relation pins, fill the new one from the ring
        let v = match action {
            RIGHT if i < 6 => state[i + 1].clone(),
            LEFT if i > 0 => state[i - 1].clone(),
            _ => spec.lidar(heading, i),
        };
        next.push(v);
    }
    next.push(angle);
    next.push(state[8].clone());
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_right_turns() {
        let spec = TurtleBotSpec::default();
        let sys = turtlebot_system();
        let mut s = spec.state(12);
        let start = s[7].clone();
        for _ in 0..12 {
            let next = turtlebot_step(&spec, &s, RIGHT).unwrap();
            assert!(sys.transition_violation(&s, RIGHT, &next).is_none());
            s = next;
        }
        assert_eq!(&s[7] - &start, int(-1));
        assert_eq!(s, spec.state(0));
    }

    #[test]
    fn forward_has_no_successor() {
        let spec = TurtleBotSpec::default();
        let s = spec.state(6);
        assert!(turtlebot_step(&spec, &s, FORWARD).is_err());
        let sys = turtlebot_system();
        assert!(sys.transition_violation(&s, FORWARD, &s).is_some());
    }

    #[test]
    fn left_then_right_returns() {
        let spec = TurtleBotSpec::default();
        let s = spec.state(5);
        let l = turtlebot_step(&spec, &s, LEFT).unwrap();
        assert_eq!(l, spec.state(6));
        assert_eq!(turtlebot_step(&spec, &l, RIGHT).unwrap(), s);
    }
}
