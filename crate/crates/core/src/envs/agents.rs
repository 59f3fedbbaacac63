//! Hand-structured fixture agents with a seeded perturbation.
//!
//! These stand in for trained policies: the structure makes rollouts head
//! for the target, the perturbation makes every seed a different network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Layer, Network};
use crate::rational::{frac, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    GridWorld,
    TurtleBot,
}

fn jitter(rng: &mut ChaCha8Rng) -> Rational {
    frac(rng.random_range(-2..=2), 32)
}

fn perturbed_identity(rng: &mut ChaCha8Rng, n: usize) -> Layer {
    let weights = (0..n)
        .map(|i| (0..n).map(|j| if i == j { int(1) + jitter(rng) } else { jitter(rng) / int(2) }).collect())
        .collect();
    Layer::new(weights, vec![int(0); n], true)
}

/// Distinct small biases so that equal scores are rare.
fn tie_breakers(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let mut picked: Vec<i64> = Vec::new();
    while picked.len() < n {
        let v = rng.random_range(-8..=8);
        if !picked.contains(&v) {
            picked.push(v);
        }
    }
    picked.into_iter().map(|v| frac(v, 256)).collect()
}

/// 8 -> 8 -> 8 -> 4 policy: move toward the target, avoid sensed obstacles.
fn gridworld_agent(rng: &mut ChaCha8Rng) -> Network {
    let mut w1 = vec![vec![int(0); 8]; 8];
    // target right, left, up, down
    for (u, (a, b)) in [(2, 0), (0, 2), (3, 1), (1, 3)].into_iter().enumerate() {
        w1[u][a] = int(1);
        w1[u][b] = int(-1);
    }
    for s in 0..4 {
        w1[4 + s][4 + s] = int(1);
    }
    let l1 = Layer::new(w1, vec![int(0); 8], true);
    let l2 = perturbed_identity(rng, 8);
    // outputs UP, DOWN, LEFT, RIGHT read units up, down, left, right and
    // the matching sensor
    let unit_for = [2, 3, 1, 0];
    let penalty = int(4);
    let mut w3 = vec![vec![int(0); 8]; 4];
    for (a, &u) in unit_for.iter().enumerate() {
        w3[a][u] = int(1) + jitter(rng);
        w3[a][4 + a] = -penalty.clone();
    }
    let l3 = Layer::new(w3, tie_breakers(rng, 4), false);
    Network::new(vec![l1, l2, l3]).expect("gridworld agent is well formed")
}

/// 9 -> 8 -> 8 -> 3 policy: turn toward angle 1/2, then go forward.
fn turtlebot_agent(rng: &mut ChaCha8Rng) -> Network {
    let mut w1 = vec![vec![int(0); 9]; 8];
    w1[0][7] = int(1);
    w1[1][7] = int(-1);
    for u in 2..8 {
        w1[u][u - 2] = int(1);
    }
    let b1 = {
        let mut b = vec![int(0); 8];
        b[0] = frac(-1, 2);
        b[1] = frac(1, 2);
        b
    };
    let l1 = Layer::new(w1, b1, true);
    let l2 = perturbed_identity(rng, 8);
    let mut w3 = vec![vec![int(0); 8]; 3];
    w3[0][0] = int(-1);
    w3[0][1] = int(-1);
    w3[1][1] = int(2) + jitter(rng);
    w3[2][0] = int(2) + jitter(rng);
    for w in w3.iter_mut() {
        for u in 2..8 {
            w[u] = jitter(rng) / int(4);
        }
    }
    let mut b3 = tie_breakers(rng, 3);
    b3[0] += frac(1, 8);
    let l3 = Layer::new(w3, b3, false);
    Network::new(vec![l1, l2, l3]).expect("turtlebot agent is well formed")
}

pub fn make_fixture_agent(kind: AgentKind, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        AgentKind::GridWorld => gridworld_agent(&mut rng),
        AgentKind::TurtleBot => turtlebot_agent(&mut rng),
    }
}

/// Random ReLU network with weights and biases in `{-2, -3/2, …, 2}`.
pub fn random_network<R: Rng>(rng: &mut R, inputs: usize, hidden: &[usize], outputs: usize) -> Network {
    let mut layers = Vec::new();
    let mut width = inputs;
    let draw = |rng: &mut R| frac(rng.random_range(-4..=4), 2);
    for (l, &h) in hidden.iter().chain(std::iter::once(&outputs)).enumerate() {
        let weights = (0..h).map(|_| (0..width).map(|_| draw(rng)).collect()).collect();
        let bias = (0..h).map(|_| draw(rng)).collect();
        layers.push(Layer::new(weights, bias, l < hidden.len()));
        width = h;
    }
    Network::new(layers).expect("random network is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_reproducible() {
        for kind in [AgentKind::GridWorld, AgentKind::TurtleBot] {
            assert_eq!(make_fixture_agent(kind, 7), make_fixture_agent(kind, 7));
            assert_ne!(make_fixture_agent(kind, 7), make_fixture_agent(kind, 8));
        }
    }

    #[test]
    fn shapes() {
        let g = make_fixture_agent(AgentKind::GridWorld, 1);
        assert_eq!((g.input_width(), g.hidden_widths(), g.output_width()), (8, vec![8, 8], 4));
        let t = make_fixture_agent(AgentKind::TurtleBot, 1);
        assert_eq!((t.input_width(), t.hidden_widths(), t.output_width()), (9, vec![8, 8], 3));
    }
}
