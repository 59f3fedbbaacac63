use std::fs;
use std::path::PathBuf;

use clap::Args;
use kxp_core::envs::{
    gridworld_executions, gridworld_system, make_fixture_agent, turtlebot_execution, turtlebot_system, AgentKind,
    GridWorldSpec, TurtleBotSpec,
};
use kxp_core::io::{self, ExecutionDoc, NetworkDoc, SystemDoc};
use kxp_core::model::validate_execution;
use kxp_core::{Execution, Network, ReactiveSystem};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Env, Failure};

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "gridworld-small")]
    pub env: Env,
    /// Execution length.
    #[arg(long)]
    pub k: usize,
    /// Chooses the start state.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed of the fixture agent, ignored with --network.
    #[arg(long, default_value_t = 1)]
    pub agent_seed: u64,
    /// Use this network instead of a fixture agent.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Start seeds to try before giving up.
    #[arg(long, default_value_t = 10)]
    pub retries: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn system_for(env: Env) -> ReactiveSystem {
    match env {
        Env::Gridworld => gridworld_system(&GridWorldSpec::default()),
        Env::GridworldSmall => gridworld_system(&GridWorldSpec::small()),
        Env::Turtlebot => turtlebot_system(),
    }
}

pub fn agent_for(env: Env, seed: u64) -> Network {
    match env {
        Env::Turtlebot => make_fixture_agent(AgentKind::TurtleBot, seed),
        _ => make_fixture_agent(AgentKind::GridWorld, seed),
    }
}

/// One execution of length exactly `k`, trying `retries` start seeds.
pub fn generate(env: Env, net: &Network, k: usize, seed: u64, retries: u64) -> Option<Execution> {
    match env {
        Env::Gridworld | Env::GridworldSmall => {
            let spec = if env == Env::Gridworld { GridWorldSpec::default() } else { GridWorldSpec::small() };
            (0..retries).find_map(|r| gridworld_executions(&spec, net, k, 1, seed.wrapping_add(r)).pop())
        }
        Env::Turtlebot => {
            let spec = TurtleBotSpec::default();
            let mut angles: Vec<i64> = (0..=12).collect();
            angles.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            angles.into_iter().find_map(|t| turtlebot_execution(&spec, net, t, k).filter(|e| e.len() == k))
        }
    }
}

pub fn run(a: &GenArgs) -> Result<u8, Failure> {
    if a.k == 0 {
        return Err(Failure::input("--k must be positive"));
    }
    let sys = system_for(a.env);
    let net = match &a.network {
        Some(p) => io::load_network(p)?,
        None => agent_for(a.env, a.agent_seed),
    };
    sys.check_network(&net).map_err(|e| Failure::input(e.to_string()))?;
    let exec = generate(a.env, &net, a.k, a.seed, a.retries.max(1))
        .ok_or_else(|| Failure::generation(format!("no tie-free execution of length {} found", a.k)))?;
    fs::create_dir_all(&a.out)?;
    io::write_json(&a.out.join("system.json"), &SystemDoc::from(&sys))?;
    io::write_json(&a.out.join("network.json"), &NetworkDoc::from(&net))?;
    for len in 1..=a.k {
        let prefix = exec.prefix(len);
        validate_execution(&sys, &net, &prefix).map_err(|e| Failure::generation(e.to_string()))?;
        let path = a.out.join(format!("exec-k{len}.json"));
        io::write_json(&path, &ExecutionDoc::from(&prefix))?;
        println!("{}", path.display());
    }
    Ok(0)
}
