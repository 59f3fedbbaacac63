//! Shared instance builders for the criterion benchmarks.

use std::collections::BTreeSet;

use kxp_core::envs::{gridworld_executions, gridworld_system, make_fixture_agent, AgentKind, GridWorldSpec};
use kxp_core::{Execution, Network, ReactiveSystem};

pub struct Case {
    pub sys: ReactiveSystem,
    pub net: Network,
    pub exec: Execution,
}

/// A 4x4 GridWorld execution of length `k` from fixture agent 0.
pub fn gridworld_case(k: usize) -> Case {
    let spec = GridWorldSpec::small();
    let net = make_fixture_agent(AgentKind::GridWorld, 0);
    let exec = gridworld_executions(&spec, &net, k, 1, 0).pop().expect("fixture agent yields an execution");
    Case { sys: gridworld_system(&spec), net, exec }
}

/// A deterministic hitting-set family over `0..universe`.
pub fn family(universe: usize, members: usize) -> Vec<BTreeSet<usize>> {
    (0..members)
        .map(|i| (0..3).map(|j| (i * 7 + j * 5 + i * j) % universe).collect())
        .collect()
}
