//! GridWorld: an agent moving on a square grid toward a fixed target.
//!
//! Features: agent position (x0, x1), target position (x2, x3) and four
//! obstacle sensors UP, DOWN, LEFT, RIGHT (x4..x7). Positions are multiples
//! of `1/size`; sensors read 1 when an obstacle is adjacent in that
//! direction, 1/2 when it is two cells away and 0 otherwise. RIGHT increases
//! x0 and UP increases x1.

use num_traits::Signed;

use crate::model::{
    Atom, Comparator, ConstraintSet, FeatureDomain, LinExpr, ModelError, ReactiveSystem, State, StateRef,
};
use crate::rational::{frac, int, to_text, Rational};

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;
pub const ACTION_NAMES: [&str; 4] = ["UP", "DOWN", "LEFT", "RIGHT"];

/// Names of the constraint families every action carries, in order.
pub const FAMILIES: [&str; 7] = [
    "direction-axis",
    "orthogonal-axis",
    "target",
    "sensor-same-step",
    "sensor-same-sum",
    "sensor-opposite-step",
    "sensor-opposite-sum",
];

/// Grid cells are `(column, row)` pairs, both in `1..=size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridWorldSpec {
    pub size: usize,
    pub obstacles: Vec<(usize, usize)>,
    pub target: (usize, usize),
}

impl Default for GridWorldSpec {
    fn default() -> Self {
        GridWorldSpec { size: 10, obstacles: vec![(3, 3), (3, 4), (6, 7), (7, 7), (8, 2)], target: (9, 9) }
    }
}

impl GridWorldSpec {
    /// The 4x4 layout used for desk-scale experiments.
    pub fn small() -> Self {
        GridWorldSpec { size: 4, obstacles: vec![(2, 3)], target: (4, 4) }
    }

    pub fn unit(&self) -> Rational {
        frac(1, self.size as i64)
    }

    pub fn coordinate(&self, cell: usize) -> Rational {
        frac(cell as i64, self.size as i64)
    }

    /// Cell index of a coordinate value, if it lies on the grid.
    pub fn cell(&self, v: &Rational) -> Option<usize> {
        let scaled = v * Rational::from_integer((self.size as i64).into());
        if !scaled.is_integer() || scaled.is_negative() {
            return None;
        }
        let c: usize = scaled.to_integer().try_into().ok()?;
        (1..=self.size).contains(&c).then_some(c)
    }

    pub fn is_obstacle(&self, cell: (usize, usize)) -> bool {
        self.obstacles.contains(&cell)
    }

    /// Sensor readings `[UP, DOWN, LEFT, RIGHT]` at a cell, from the layout.
    pub fn sensors(&self, cell: (usize, usize)) -> [Rational; 4] {
        let reading = |dx: i64, dy: i64| {
            for dist in 1..=2i64 {
                let x = cell.0 as i64 + dx * dist;
                let y = cell.1 as i64 + dy * dist;
                if x < 1 || y < 1 || x > self.size as i64 || y > self.size as i64 {
                    break;
                }
                if self.is_obstacle((x as usize, y as usize)) {
                    return if dist == 1 { int(1) } else { frac(1, 2) };
                }
            }
            int(0)
        };
        [reading(0, 1), reading(0, -1), reading(-1, 0), reading(1, 0)]
    }

    /// A full state with layout sensors.
    pub fn state(&self, agent: (usize, usize)) -> State {
        let mut s = vec![
            self.coordinate(agent.0),
            self.coordinate(agent.1),
            self.coordinate(self.target.0),
            self.coordinate(self.target.1),
        ];
        s.extend(self.sensors(agent));
        s
    }
}

fn sensor_values() -> Vec<Rational> {
    vec![int(0), frac(1, 2), int(1)]
}

/// (axis feature, sign of the move) for an action.
fn axis(action: usize) -> (usize, i64) {
    match action {
        UP => (1, 1),
        DOWN => (1, -1),
        LEFT => (0, -1),
        RIGHT => (0, 1),
        _ => panic!("unknown action {action}"),
    }
}

fn sensor(action: usize) -> usize {
    4 + action
}

fn opposite(action: usize) -> usize {
    match action {
        UP => DOWN,
        DOWN => UP,
        LEFT => RIGHT,
        _ => LEFT,
    }
}

fn diff(f: usize) -> LinExpr<StateRef> {
    LinExpr::var(StateRef::Next(f)).term(StateRef::Cur(f), int(-1))
}

fn sum(f: usize) -> LinExpr<StateRef> {
    LinExpr::var(StateRef::Next(f)).term(StateRef::Cur(f), int(1))
}

/// Transition constraints of one action, labelled by family.
pub fn transition(spec: &GridWorldSpec, action: usize) -> ConstraintSet<StateRef> {
    let (ax, sign) = axis(action);
    let orth = 1 - ax;
    let same = sensor(action);
    let opp = sensor(opposite(action));
    let half = frac(1, 2);
    let atoms = vec![
        Atom::cmp(diff(ax), Comparator::Eq, spec.unit() * int(sign)).labelled(FAMILIES[0]),
        Atom::cmp(diff(orth), Comparator::Eq, int(0)).labelled(FAMILIES[1]),
        Atom::cmp(diff(2), Comparator::Eq, int(0)).labelled(FAMILIES[2]),
        Atom::cmp(diff(3), Comparator::Eq, int(0)).labelled(FAMILIES[2]),
        Atom::cmp(diff(same), Comparator::Ge, int(0)).labelled(FAMILIES[3]),
        Atom::cmp(diff(same), Comparator::Le, half.clone()).labelled(FAMILIES[3]),
        Atom::member(sum(same), sensor_values()).labelled(FAMILIES[4]),
        Atom::cmp(diff(opp), Comparator::Ge, -half).labelled(FAMILIES[5]),
        Atom::cmp(diff(opp), Comparator::Le, int(0)).labelled(FAMILIES[5]),
        Atom::member(sum(opp), sensor_values()).labelled(FAMILIES[6]),
    ];
    ConstraintSet::new(atoms)
}

pub fn gridworld_system(spec: &GridWorldSpec) -> ReactiveSystem {
    let positions: Vec<Rational> = (1..=spec.size).map(|c| spec.coordinate(c)).collect();
    let pos = FeatureDomain::finite(positions).expect("nonempty grid");
    let sens = FeatureDomain::finite(sensor_values()).expect("nonempty");
    let mut domains = vec![pos; 4];
    domains.extend(vec![sens; 4]);
    let initial = ConstraintSet::new(vec![
        Atom::pin(StateRef::Cur(2), spec.coordinate(spec.target.0)).labelled("target"),
        Atom::pin(StateRef::Cur(3), spec.coordinate(spec.target.1)).labelled("target"),
    ]);
    ReactiveSystem::new(
        domains,
        ACTION_NAMES.iter().map(|s| s.to_string()).collect(),
        initial,
        (0..4).map(|a| transition(spec, a)).collect(),
    )
    .expect("gridworld system is well formed")
}

/// Canonical successor: move one cell, keep the target, read the sensors
/// from the layout and clamp each to the nearest value the transition
/// constraints allow.
pub fn gridworld_step(spec: &GridWorldSpec, state: &[Rational], action: usize) -> Result<State, ModelError> {
    let err = |msg: String| ModelError::Step(msg);
    let cx = spec.cell(&state[0]).ok_or_else(|| err(format!("agent x {} off grid", to_text(&state[0]))))?;
    let cy = spec.cell(&state[1]).ok_or_else(|| err(format!("agent y {} off grid", to_text(&state[1]))))?;
    let (ax, sign) = axis(action);
    let mut cell = [cx as i64, cy as i64];
    cell[ax] += sign;
    if cell[ax] < 1 || cell[ax] > spec.size as i64 {
        return Err(err(format!("{} leaves the grid", ACTION_NAMES[action])));
    }
    let cell = (cell[0] as usize, cell[1] as usize);
    if spec.is_obstacle(cell) {
        return Err(err(format!("{} runs into an obstacle", ACTION_NAMES[action])));
    }
    let truth = spec.sensors(cell);
    let mut next = vec![spec.coordinate(cell.0), spec.coordinate(cell.1), state[2].clone(), state[3].clone()];
    let t = transition(spec, action);
    for (d, truth) in truth.iter().enumerate() {
        let f = 4 + d;
        let feasible: Vec<Rational> = sensor_values()
            .into_iter()
            .filter(|v| {
                t.atoms
                    .iter()
                    .filter(|a| a.expr.vars().any(|r| r.feature() == f))
                    .all(|a| {
                        a.holds(|r| match r {
                            StateRef::Cur(g) => state[*g].clone(),
                            StateRef::Next(_) => v.clone(),
                        })
                    })
            })
            .collect();
        let best = feasible
            .into_iter()
            .min_by(|a, b| (a - truth).abs().cmp(&(b - truth).abs()))
            .ok_or_else(|| err(format!("no feasible reading for sensor {f}")))?;
        next.push(best);
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_moves_x0() {
        let spec = GridWorldSpec::default();
        let mut s = spec.state((3, 4));
        // clear the sensor readings so nothing blocks the move
        for v in s.iter_mut().skip(4) {
            *v = int(0);
        }
        let sys = gridworld_system(&spec);
        let mut next = s.clone();
        next[0] = frac(4, 10);
        assert!(sys.transition_violation(&s, RIGHT, &next).is_none());
        next[1] = frac(5, 10);
        assert!(sys.transition_violation(&s, RIGHT, &next).is_some());
    }

    #[test]
    fn sensor_cannot_drop_when_moving_toward() {
        let spec = GridWorldSpec::default();
        let sys = gridworld_system(&spec);
        let mut s = spec.state((5, 5));
        for v in s.iter_mut().skip(4) {
            *v = int(0);
        }
        s[4 + RIGHT] = frac(1, 2);
        let mut next = s.clone();
        next[0] = frac(6, 10);
        next[4 + RIGHT] = int(0);
        let (_, atom) = sys.transition_violation(&s, RIGHT, &next).unwrap();
        assert_eq!(atom.label.as_deref(), Some("sensor-same-step"));
    }

    #[test]
    fn step_respects_transitions() {
        let spec = GridWorldSpec::small();
        let sys = gridworld_system(&spec);
        for x in 1..=4 {
            for y in 1..=4 {
                if spec.is_obstacle((x, y)) {
                    continue;
                }
                let s = spec.state((x, y));
                for a in 0..4 {
                    if let Ok(next) = gridworld_step(&spec, &s, a) {
                        assert!(sys.transition_violation(&s, a, &next).is_none());
                        assert_eq!(next[2], s[2]);
                        assert_eq!(next[3], s[3]);
                    }
                }
            }
        }
        let top = spec.state((1, 4));
        assert!(gridworld_step(&spec, &top, UP).is_err());
    }
}
