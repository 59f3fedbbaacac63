//! Complete decision procedure for network queries.
//!
//! [`solve`] answers whether some exact rational assignment satisfies every
//! atom, at least one case of every disjunction and the semantics of every
//! network copy. Search branches on disjunction cases, membership values and
//! ReLU phases, with an exact simplex deciding each node. SAT witnesses are
//! always re-checked against the query before they are returned.

mod delta;
mod query;
mod search;
mod simplex;

use std::time::Duration;

use serde::Serialize;

pub use query::{Disjunction, NetworkCopy, Query, VarDecl, VarId};

use crate::model::{Atom, Network, ReactiveSystem, StateRef};
use crate::rational::{self, Rational};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Enumerate exhaustively once the remaining finite space is this small.
    pub enum_threshold: u64,
    /// Maximum number of branches before giving up.
    pub max_splits: Option<u64>,
    pub timeout: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { enum_threshold: 4096, max_splits: None, timeout: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub relu_splits: u64,
    pub lp_calls: u64,
    pub pivots: u64,
    pub membership_branches: u64,
    pub disjunction_branches: u64,
    pub enumerated_points: u64,
    pub wall_time_s: f64,
}

impl SolveStats {
    pub fn splits(&self) -> u64 {
        self.relu_splits + self.membership_branches + self.disjunction_branches
    }

    pub fn absorb(&mut self, other: &SolveStats) {
        self.nodes += other.nodes;
        self.relu_splits += other.relu_splits;
        self.lp_calls += other.lp_calls;
        self.pivots += other.pivots;
        self.membership_branches += other.membership_branches;
        self.disjunction_branches += other.disjunction_branches;
        self.enumerated_points += other.enumerated_points;
        self.wall_time_s += other.wall_time_s;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub values: Vec<Rational>,
}

impl Witness {
    pub fn value(&self, v: VarId) -> &Rational {
        &self.values[v.0]
    }

    pub fn block(&self, vars: &[VarId]) -> Vec<Rational> {
        vars.iter().map(|v| self.values[v.0].clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(Witness),
    Unsat,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Sat(w) => Some(w),
            Verdict::Unsat => None,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum VerifyError {
    #[error("verifier budget exhausted after {} nodes", .0.nodes)]
    Timeout(SolveStats),
    #[error("malformed query: {0}")]
    Malformed(String),
    #[error("internal verifier error: {0}")]
    Internal(String),
}

/// Decides a query. Complete when no budget is set.
pub fn solve(q: &Query<'_>, opts: &SolveOptions) -> Result<(Verdict, SolveStats), VerifyError> {
    q.validate().map_err(VerifyError::Malformed)?;
    let started = std::time::Instant::now();
    let compiled = search::compile(q);
    let mut s = search::Search::new(q, &compiled, opts);
    let found = s.run()?;
    let mut stats = s.stats.clone();
    stats.pivots = s.pivots();
    stats.wall_time_s = started.elapsed().as_secs_f64();
    log::trace!("solve: {} vars, {} nets, sat={}", q.var_count(), q.network_count(), found.is_some());
    Ok(match found {
        Some(w) => (Verdict::Sat(w), stats),
        None => (Verdict::Unsat, stats),
    })
}

/// Exact check of an assignment against every part of a query.
pub fn check_witness(q: &Query<'_>, values: &[Rational]) -> Result<(), String> {
    if values.len() != q.var_count() {
        return Err(format!("expected {} values, got {}", q.var_count(), values.len()));
    }
    for (i, decl) in q.vars().iter().enumerate() {
        if let Some(d) = &decl.domain {
            if !d.contains(&values[i]) {
                return Err(format!("{} = {} outside its domain", decl.name, rational::to_text(&values[i])));
            }
        }
    }
    for copy in q.networks() {
        let input: Vec<Rational> = copy.inputs.iter().map(|v| values[v.0].clone()).collect();
        let trace = copy.net.trace(&input).map_err(|e| e.to_string())?;
        let targets = copy.hidden.iter().chain(std::iter::once(&copy.outputs));
        for (layer_vals, vars) in trace.iter().zip(targets) {
            for (x, v) in layer_vals.iter().zip(vars) {
                if values[v.0] != *x {
                    return Err(format!("network {}: {} disagrees with evaluation", copy.label, q.vars()[v.0].name));
                }
            }
        }
    }
    let holds = |a: &Atom<VarId>| a.holds(|v| values[v.0].clone());
    if let Some(a) = q.atoms().iter().find(|a| !holds(a)) {
        return Err(format!("atom violated: {}", a.map(|v| q.vars()[v.0].name.clone())));
    }
    for d in q.disjunctions() {
        if !d.cases.iter().any(|case| case.iter().all(holds)) {
            return Err(format!("no case of {} holds", d.label));
        }
    }
    Ok(())
}

/// State blocks and network copies of an unrolled execution.
#[derive(Debug, Clone)]
pub struct Unrolled<'n> {
    pub query: Query<'n>,
    pub states: Vec<Vec<VarId>>,
    pub outputs: Vec<Vec<VarId>>,
}

/// Maps a transition atom onto two consecutive state blocks.
pub fn instantiate(atom: &Atom<StateRef>, cur: &[VarId], next: &[VarId]) -> Atom<VarId> {
    atom.map(|r| match r {
        StateRef::Cur(f) => cur[*f],
        StateRef::Next(f) => next[*f],
    })
}

/// `k` state blocks with one network copy each, consecutive blocks linked by
/// the transition relation of the given actions. `actions[i]` links block
/// `i` to block `i + 1`; only the first `k - 1` entries are used.
pub fn encode_unrolled<'n>(sys: &ReactiveSystem, net: &'n Network, actions: &[usize], k: usize) -> Unrolled<'n> {
    assert!(k >= 1, "k must be positive");
    assert!(actions.len() + 1 >= k, "need k - 1 actions");
    let mut query = Query::new();
    let mut states = Vec::with_capacity(k);
    let mut outputs = Vec::with_capacity(k);
    for i in 0..k {
        let block = query.add_block(&format!("x{}", i + 1), sys.domains());
        outputs.push(query.add_network(net, &block, format!("n{}", i + 1)));
        states.push(block);
    }
    for i in 0..k.saturating_sub(1) {
        for atom in &sys.transition(actions[i]).atoms {
            query.assert(instantiate(atom, &states[i], &states[i + 1]));
        }
    }
    Unrolled { query, states, outputs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Comparator, FeatureDomain, Layer, LinExpr};
    use crate::rational::{frac, int};

    fn r(v: i64) -> Rational {
        int(v)
    }

    #[test]
    fn empty_box_is_unsat() {
        let mut q = Query::new();
        let x = q.add_var("x", None);
        q.assert(Atom::cmp(LinExpr::var(x), Comparator::Ge, r(1)));
        q.assert(Atom::cmp(LinExpr::var(x), Comparator::Le, r(0)));
        let (v, _) = solve(&q, &SolveOptions::default()).unwrap();
        assert_eq!(v, Verdict::Unsat);
    }

    #[test]
    fn strict_inequalities() {
        let mut q = Query::new();
        let x = q.add_var("x", None);
        let y = q.add_var("y", None);
        q.assert(Atom::cmp(LinExpr::var(x).term(y, r(-1)), Comparator::Gt, r(0)));
        q.assert(Atom::cmp(LinExpr::var(x), Comparator::Le, r(1)));
        q.assert(Atom::cmp(LinExpr::var(y), Comparator::Ge, r(1)));
        let (v, _) = solve(&q, &SolveOptions::default()).unwrap();
        assert_eq!(v, Verdict::Unsat);

        let mut q = Query::new();
        let x = q.add_var("x", None);
        q.assert(Atom::cmp(LinExpr::var(x), Comparator::Gt, r(0)));
        q.assert(Atom::cmp(LinExpr::var(x), Comparator::Lt, frac(1, 3)));
        let (v, _) = solve(&q, &SolveOptions::default()).unwrap();
        let w = v.witness().unwrap();
        assert!(w.values[0] > r(0) && w.values[0] < frac(1, 3));
    }

    #[test]
    fn disjunction_picks_feasible_case() {
        let mut q = Query::new();
        let x = q.add_var("x", Some(FeatureDomain::interval(r(0), r(10)).unwrap()));
        q.assert_any(
            "either",
            vec![
                vec![Atom::cmp(LinExpr::var(x), Comparator::Ge, r(11))],
                vec![Atom::cmp(LinExpr::var(x), Comparator::Le, r(-1))],
                vec![Atom::pin(x, r(7))],
            ],
        );
        let (v, _) = solve(&q, &SolveOptions::default()).unwrap();
        assert_eq!(v.witness().unwrap().values[0], r(7));
    }

    #[test]
    fn membership_over_sum() {
        let dom = FeatureDomain::finite(vec![r(0), frac(1, 2), r(1)]).unwrap();
        let mut q = Query::new();
        let x = q.add_var("x", Some(dom.clone()));
        let y = q.add_var("y", Some(dom));
        q.assert(Atom::member(LinExpr::var(x).term(y, r(1)), vec![frac(3, 2)]));
        q.assert(Atom::cmp(LinExpr::var(x), Comparator::Gt, r(0)));
        q.assert(Atom::cmp(LinExpr::var(y), Comparator::Gt, frac(1, 2)));
        let (v, _) = solve(&q, &SolveOptions::default()).unwrap();
        assert_eq!(v.witness().unwrap().values, vec![frac(1, 2), r(1)]);
    }

    fn relu_net() -> Network {
        // y = relu(x) - relu(-x) = x on any input
        Network::new(vec![
            Layer::new(vec![vec![r(1)], vec![r(-1)]], vec![r(0), r(0)], true),
            Layer::new(vec![vec![r(1), r(-1)]], vec![r(0)], false),
        ])
        .unwrap()
    }

    #[test]
    fn relu_identity_is_exact() {
        let net = relu_net();
        for cmp in [Comparator::Gt, Comparator::Lt] {
            let mut q = Query::new();
            let x = q.add_var("x", Some(FeatureDomain::interval(r(-5), r(5)).unwrap()));
            let y = q.add_network(&net, &[x], "n");
            q.assert(Atom::cmp(LinExpr::var(y[0]).term(x, r(-1)), cmp, r(0)));
            let (v, _) = solve(&q, &SolveOptions::default()).unwrap();
            assert_eq!(v, Verdict::Unsat);
        }
    }

    #[test]
    fn relu_output_reaches_target() {
        let net = relu_net();
        let mut q = Query::new();
        let x = q.add_var("x", Some(FeatureDomain::interval(r(-5), r(5)).unwrap()));
        let y = q.add_network(&net, &[x], "n");
        q.assert(Atom::pin(y[0], r(-3)));
        let (v, _) = solve(&q, &SolveOptions::default()).unwrap();
        assert_eq!(v.witness().unwrap().values[0], r(-3));
    }

    #[test]
    fn zero_budget_times_out() {
        let net = relu_net();
        let mut q = Query::new();
        let x = q.add_var("x", Some(FeatureDomain::interval(r(-5), r(5)).unwrap()));
        let y = q.add_network(&net, &[x], "n");
        q.assert(Atom::cmp(LinExpr::var(y[0]).term(x, r(-1)), Comparator::Ge, r(1)));
        let opts = SolveOptions { timeout: Some(Duration::ZERO), ..SolveOptions::default() };
        let out = solve(&q, &opts);
        assert!(matches!(out, Err(VerifyError::Timeout(_))), "{out:?}");
    }

    #[test]
    fn malformed_query_is_rejected() {
        let mut q = Query::new();
        q.assert(Atom::pin(VarId(3), r(0)));
        assert!(matches!(solve(&q, &SolveOptions::default()), Err(VerifyError::Malformed(_))));
    }
}
