//! The four explanation methods, single-step routines, the CXP catalog and
//! candidate validation.

mod catalog;
mod methods;
mod mhs;
mod reverse;
mod single;
mod subsets;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use catalog::CxpCatalog;
pub use methods::{method1, method2, method3_minimal, method3_minimum};
pub use mhs::{minimum_hitting_set, MhsError};
pub use reverse::{method4, rie, RieOutcome};
pub use single::{enumerate_cxps_single, greedy_minimal_single, minimum_single};
pub use subsets::subsets;

use crate::model::{is_decisive, validate_execution, Execution, MaskRole, Network, ReactiveSystem, StepMask};
use crate::queries::{self, QueryError, Semantics};
use crate::verifier::{self, SolveOptions, SolveStats, Unrolled, Verdict, VerifyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Minimal,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodId {
    Method1,
    Method2,
    Method3,
    Method4,
}

impl MethodId {
    pub fn number(self) -> u8 {
        match self {
            MethodId::Method1 => 1,
            MethodId::Method2 => 2,
            MethodId::Method3 => 3,
            MethodId::Method4 => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(MethodId::Method1),
            2 => Some(MethodId::Method2),
            3 => Some(MethodId::Method3),
            4 => Some(MethodId::Method4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Guarantee {
    Minimal,
    Minimum,
    None,
}

#[derive(Debug, Clone, Default)]
pub struct ExplainOptions {
    pub semantics: Semantics,
    /// Per-query budget.
    pub solve: SolveOptions,
    /// Budget for a whole method run.
    pub run_timeout: Option<Duration>,
}

/// Counters over every query a run dispatched.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExplainStats {
    pub queries: u64,
    pub sat: u64,
    pub unsat: u64,
    /// Number of queries per network-copy count.
    pub copies: BTreeMap<usize, u64>,
    pub solver: SolveStats,
    pub wall_time_s: f64,
}

impl ExplainStats {
    pub fn max_copies(&self) -> usize {
        self.copies.keys().next_back().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainResult {
    pub method: MethodId,
    pub target: Target,
    pub mask: StepMask,
    pub size: usize,
    pub guarantee: Guarantee,
    pub stats: ExplainStats,
}

#[derive(Debug, thiserror::Error)]
pub enum ExplainError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("step {0}: the recorded action does not win strictly, so it cannot be explained")]
    TiedStep(usize),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("timed out after {queries} queries")]
    Timeout { queries: u64 },
    #[error("verifier: {0}")]
    Verify(String),
    #[error("internal: {0}")]
    Internal(String),
    #[error(transparent)]
    Mhs(#[from] MhsError),
}

/// Query dispatch with shared statistics and the run deadline.
pub(crate) struct Session {
    pub opts: ExplainOptions,
    pub stats: ExplainStats,
    start: Instant,
    deadline: Option<Instant>,
}

impl Session {
    pub fn new(opts: &ExplainOptions) -> Self {
        let start = Instant::now();
        Session {
            opts: opts.clone(),
            stats: ExplainStats::default(),
            start,
            deadline: opts.run_timeout.map(|t| start + t),
        }
    }

    pub fn start_elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn sem(&self) -> Semantics {
        self.opts.semantics
    }

    pub fn run(&mut self, u: &Unrolled<'_>) -> Result<Verdict, ExplainError> {
        let mut solve = self.opts.solve.clone();
        if let Some(deadline) = self.deadline {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(ExplainError::Timeout { queries: self.stats.queries });
            }
            solve.timeout = Some(solve.timeout.map_or(left, |t| t.min(left)));
        }
        *self.stats.copies.entry(u.query.network_count()).or_insert(0) += 1;
        self.stats.queries += 1;
        match verifier::solve(&u.query, &solve) {
            Ok((verdict, st)) => {
                self.stats.solver.absorb(&st);
                if verdict.is_sat() {
                    self.stats.sat += 1;
                } else {
                    self.stats.unsat += 1;
                }
                Ok(verdict)
            }
            Err(VerifyError::Timeout(st)) => {
                self.stats.solver.absorb(&st);
                Err(ExplainError::Timeout { queries: self.stats.queries })
            }
            Err(e) => Err(ExplainError::Verify(e.to_string())),
        }
    }

    pub fn finish(mut self, method: MethodId, target: Target, mask: StepMask, guarantee: Guarantee) -> ExplainResult {
        self.stats.wall_time_s = self.start.elapsed().as_secs_f64();
        ExplainResult { method, target, size: mask.size(), mask, guarantee, stats: self.stats }
    }
}

/// Does the network fail to pick `action` on these outputs?
pub(crate) fn deviates(out: &[crate::rational::Rational], action: usize, sem: Semantics) -> bool {
    match sem {
        Semantics::Weak => !is_decisive(out, action),
        Semantics::Strict => crate::model::argmax(out) != action,
    }
}

/// Rejects executions the system does not produce and steps whose action
/// could be flipped by a tie.
pub(crate) fn check_input(sys: &ReactiveSystem, net: &Network, exec: &Execution, sem: Semantics) -> Result<(), ExplainError> {
    validate_execution(sys, net, exec).map_err(|e| ExplainError::Input(e.to_string()))?;
    for (i, (s, &a)) in exec.states.iter().zip(&exec.actions).enumerate() {
        let out = net.forward(s).map_err(|e| ExplainError::Input(e.to_string()))?;
        let ok = match sem {
            Semantics::Weak => is_decisive(&out, a),
            Semantics::Strict => crate::model::argmax(&out) == a,
        };
        if !ok {
            return Err(ExplainError::TiedStep(i));
        }
    }
    Ok(())
}

/// Is `mask` (pinned features) a k-step explanation? With a catalog the
/// answer is the hitting-set test; otherwise one multi-step query decides.
pub fn validate_candidate(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    mask: &StepMask,
    catalog: Option<&CxpCatalog>,
    opts: &ExplainOptions,
) -> Result<(bool, ExplainStats), ExplainError> {
    mask.validate(exec.len(), sys.feature_count()).map_err(|e| ExplainError::Input(e.to_string()))?;
    let pinned = match mask.role {
        MaskRole::Explanation => mask.clone(),
        MaskRole::Contrastive => mask.complement(sys.feature_count()),
    };
    if let Some(catalog) = catalog {
        return Ok((catalog.is_hit_by(&pinned), ExplainStats::default()));
    }
    let mut session = Session::new(opts);
    let verdict = is_explanation(&mut session, sys, net, exec, &pinned)?;
    session.stats.wall_time_s = session.start.elapsed().as_secs_f64();
    Ok((verdict, session.stats))
}

pub(crate) fn is_explanation(
    session: &mut Session,
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    pinned: &StepMask,
) -> Result<bool, ExplainError> {
    let u = queries::explanation_query_multi(sys, net, exec, pinned, session.sem())?;
    Ok(!session.run(&u)?.is_sat())
}

/// A witness counter-example for `mask`, if there is one.
pub fn counterexample(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    mask: &StepMask,
    opts: &ExplainOptions,
) -> Result<Option<Vec<Vec<crate::rational::Rational>>>, ExplainError> {
    let mut session = Session::new(opts);
    let u = queries::explanation_query_multi(sys, net, exec, mask, session.sem())?;
    Ok(session.run(&u)?.witness().map(|w| u.states.iter().map(|b| w.block(b)).collect()))
}
