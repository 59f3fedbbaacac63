//! Benchmark systems, canonical step functions, fixture agents and
//! execution generators.

pub mod agents;
pub mod fixtures;
pub mod gridworld;
pub mod random;
pub mod turtlebot;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use agents::{make_fixture_agent, random_network, AgentKind};
pub use gridworld::{gridworld_step, gridworld_system, GridWorldSpec};
pub use turtlebot::{turtlebot_step, turtlebot_system, TurtleBotSpec};

use crate::model::{is_decisive, simulate, Execution, Network};

/// True when every step's action beats all rivals strictly.
pub fn is_tie_free(net: &Network, exec: &Execution) -> bool {
    exec.states
        .iter()
        .zip(&exec.actions)
        .all(|(s, &a)| net.forward(s).map(|out| is_decisive(&out, a)).unwrap_or(false))
}

/// Up to `count` distinct tie-free GridWorld executions of length exactly
/// `k`, from free start cells in seeded order.
pub fn gridworld_executions(spec: &GridWorldSpec, net: &Network, k: usize, count: usize, seed: u64) -> Vec<Execution> {
    let sys = gridworld_system(spec);
    let mut starts: Vec<(usize, usize)> = (1..=spec.size)
        .flat_map(|x| (1..=spec.size).map(move |y| (x, y)))
        .filter(|&c| !spec.is_obstacle(c) && c != spec.target)
        .collect();
    starts.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out: Vec<Execution> = Vec::new();
    for cell in starts {
        if out.len() == count {
            break;
        }
        let step = |s: &[crate::rational::Rational], a: usize| gridworld_step(spec, s, a);
        match simulate(&sys, net, step, spec.state(cell), k) {
            Ok(exec) if is_tie_free(net, &exec) && !out.contains(&exec) => out.push(exec),
            _ => {}
        }
    }
    out
}

/// The TurtleBot execution starting at angle `twelfths / 12`, stopping after
/// `k` steps or at the first FORWARD.
pub fn turtlebot_execution(spec: &TurtleBotSpec, net: &Network, twelfths: i64, k: usize) -> Option<Execution> {
    let sys = turtlebot_system();
    let mut len = k;
    while len >= 1 {
        let step = |s: &[crate::rational::Rational], a: usize| turtlebot_step(spec, s, a);
        if let Ok(exec) = simulate(&sys, net, step, spec.state(twelfths), len) {
            return is_tie_free(net, &exec).then_some(exec);
        }
        len -= 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_execution;

    #[test]
    fn gridworld_generation() {
        let spec = GridWorldSpec::small();
        let sys = gridworld_system(&spec);
        let net = make_fixture_agent(AgentKind::GridWorld, 1);
        let execs = gridworld_executions(&spec, &net, 3, 5, 0);
        assert!(!execs.is_empty());
        for e in &execs {
            assert_eq!(e.len(), 3);
            validate_execution(&sys, &net, e).unwrap();
        }
    }

    #[test]
    fn turtlebot_generation() {
        let spec = TurtleBotSpec::default();
        let net = make_fixture_agent(AgentKind::TurtleBot, 1);
        let exec = turtlebot_execution(&spec, &net, 11, 4).unwrap();
        validate_execution(&turtlebot_system(), &net, &exec).unwrap();
        assert!(exec.actions[..exec.len() - 1].iter().all(|&a| a == turtlebot::RIGHT));
    }
}
