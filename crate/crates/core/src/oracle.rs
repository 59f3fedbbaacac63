//! Brute-force reference implementations over finite domains.
//!
//! Nothing here calls the verifier or the explanation algorithms; every
//! answer comes from enumerating states. The semantics match the query
//! builders: a witness deviates first at some step `d`, the states up to `d`
//! are linked by the transitions of the recorded actions, and each state
//! agrees with the execution on its pinned features.

use std::collections::BTreeSet;

use crate::model::{
    argmax, Atom, Execution, MaskRole, Network, ReactiveSystem, State, StateRef, StepMask,
};
use crate::queries::Semantics;
use crate::rational::Rational;
use crate::verifier::{Query, VarId};

/// Default limit on enumerated states.
pub const DEFAULT_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("feature {0} has a continuous domain and is not pinned")]
    NotFinite(usize),
    #[error("enumeration exceeds the cap of {0} evaluations")]
    CapExceeded(u64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Does the network fail to pick `action` on these outputs?
pub fn deviates(out: &[Rational], action: usize, sem: Semantics) -> bool {
    match sem {
        Semantics::Weak => out.iter().enumerate().any(|(r, y)| r != action && *y >= out[action]),
        Semantics::Strict => argmax(out) != action,
    }
}

struct Budget {
    used: u64,
    cap: u64,
}

impl Budget {
    fn spend(&mut self) -> Result<(), OracleError> {
        self.used += 1;
        if self.used > self.cap {
            Err(OracleError::CapExceeded(self.cap))
        } else {
            Ok(())
        }
    }
}

/// Enumerates successor candidates feature by feature, checking each
/// transition atom as soon as its last feature is assigned.
struct StateEnumerator<'a> {
    sys: &'a ReactiveSystem,
    /// Atoms grouped by the feature after which they become decidable.
    by_feature: Vec<Vec<&'a Atom<StateRef>>>,
    /// Atoms over the current state only.
    upfront: Vec<&'a Atom<StateRef>>,
}

impl<'a> StateEnumerator<'a> {
    fn new(sys: &'a ReactiveSystem, atoms: &'a [Atom<StateRef>]) -> Self {
        let m = sys.feature_count();
        let mut by_feature = vec![Vec::new(); m];
        let mut upfront = Vec::new();
        for atom in atoms {
            let last = atom
                .expr
                .vars()
                .filter_map(|r| match r {
                    StateRef::Next(f) => Some(*f),
                    StateRef::Cur(_) => None,
                })
                .max();
            match last {
                Some(f) => by_feature[f].push(atom),
                None => upfront.push(atom),
            }
        }
        StateEnumerator { sys, by_feature, upfront }
    }

    /// Calls `visit` on every state whose features satisfy `choices` and
    /// which, paired with `cur`, satisfies the atoms. Stops early when
    /// `visit` returns `Ok(true)`.
    fn each(
        &self,
        cur: Option<&[Rational]>,
        choices: &[Vec<Rational>],
        budget: &mut Budget,
        visit: &mut dyn FnMut(&State, &mut Budget) -> Result<bool, OracleError>,
    ) -> Result<bool, OracleError> {
        let eval = |atom: &Atom<StateRef>, next: &[Rational]| {
            atom.holds(|r| match r {
                StateRef::Cur(f) => cur.map(|c| c[*f].clone()).unwrap_or_default(),
                StateRef::Next(f) => next[*f].clone(),
            })
        };
        if cur.is_some() && !self.upfront.iter().all(|a| eval(a, &[])) {
            return Ok(false);
        }
        let m = self.sys.feature_count();
        let mut partial: Vec<Rational> = Vec::with_capacity(m);
        self.rec(cur, choices, &mut partial, budget, visit, &eval)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        &self,
        cur: Option<&[Rational]>,
        choices: &[Vec<Rational>],
        partial: &mut Vec<Rational>,
        budget: &mut Budget,
        visit: &mut dyn FnMut(&State, &mut Budget) -> Result<bool, OracleError>,
        eval: &dyn Fn(&Atom<StateRef>, &[Rational]) -> bool,
    ) -> Result<bool, OracleError> {
        let f = partial.len();
        if f == choices.len() {
            budget.spend()?;
            return visit(partial, budget);
        }
        for v in &choices[f] {
            partial.push(v.clone());
            let ok = cur.is_none() || self.by_feature[f].iter().all(|a| eval(a, partial));
            if ok && self.rec(cur, choices, partial, budget, visit, eval)? {
                partial.pop();
                return Ok(true);
            }
            partial.pop();
        }
        Ok(false)
    }
}

/// Candidate values per feature: the recorded value when pinned, the whole
/// domain otherwise.
fn choices(sys: &ReactiveSystem, state: &[Rational], pinned: &BTreeSet<usize>) -> Result<Vec<Vec<Rational>>, OracleError> {
    sys.domains()
        .iter()
        .enumerate()
        .map(|(f, d)| {
            if pinned.contains(&f) {
                Ok(vec![state[f].clone()])
            } else {
                d.values().map(<[Rational]>::to_vec).ok_or(OracleError::NotFinite(f))
            }
        })
        .collect()
}

fn all_values(sys: &ReactiveSystem) -> Result<Vec<Vec<Rational>>, OracleError> {
    sys.domains()
        .iter()
        .enumerate()
        .map(|(f, d)| d.values().map(<[Rational]>::to_vec).ok_or(OracleError::NotFinite(f)))
        .collect()
}

fn check_shapes(sys: &ReactiveSystem, net: &Network, exec: &Execution, mask: Option<&StepMask>) -> Result<(), OracleError> {
    sys.check_network(net).map_err(|e| OracleError::Invalid(e.to_string()))?;
    if exec.states.iter().any(|s| s.len() != sys.feature_count()) {
        return Err(OracleError::Invalid("state width".into()));
    }
    if let Some(mask) = mask {
        mask.validate(exec.len(), sys.feature_count()).map_err(|e| OracleError::Invalid(e.to_string()))?;
    }
    Ok(())
}

/// A sequence `x_1..x_d` linked by the recorded actions, deviating first at
/// its last step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationWitness {
    pub step: usize,
    pub states: Vec<State>,
}

impl DeviationWitness {
    /// `(step, feature)` pairs where the witness differs from the execution.
    pub fn differing(&self, exec: &Execution) -> BTreeSet<(usize, usize)> {
        self.states
            .iter()
            .enumerate()
            .flat_map(|(j, s)| {
                s.iter()
                    .zip(&exec.states[j])
                    .enumerate()
                    .filter(|(_, (a, b))| a != b)
                    .map(move |(f, _)| (j, f))
            })
            .collect()
    }
}

/// Depth-first enumeration of first-deviation witnesses under `pins`.
/// `visit` returning `true` stops the search.
fn search_witnesses(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    pins: &StepMask,
    sem: Semantics,
    cap: u64,
    visit: &mut dyn FnMut(DeviationWitness) -> bool,
) -> Result<bool, OracleError> {
    let k = exec.len();
    let per_step: Vec<Vec<Vec<Rational>>> =
        (0..k).map(|i| choices(sys, &exec.states[i], &pins.steps[i])).collect::<Result<_, _>>()?;
    let enumerators: Vec<StateEnumerator<'_>> =
        (0..k).map(|i| StateEnumerator::new(sys, &sys.transition(exec.actions[i]).atoms)).collect();
    let mut budget = Budget { used: 0, cap };
    let mut prefix: Vec<State> = Vec::with_capacity(k);

    #[allow(clippy::too_many_arguments)]
    fn level(
        i: usize,
        net: &Network,
        exec: &Execution,
        sem: Semantics,
        per_step: &[Vec<Vec<Rational>>],
        enumerators: &[StateEnumerator<'_>],
        prefix: &mut Vec<State>,
        budget: &mut Budget,
        visit: &mut dyn FnMut(DeviationWitness) -> bool,
    ) -> Result<bool, OracleError> {
        // the successor relation is the transition of the previous action
        let prev = if i == 0 { None } else { Some(prefix[i - 1].clone()) };
        let en = if i == 0 { &enumerators[0] } else { &enumerators[i - 1] };
        let mut inner = |x: &State, budget: &mut Budget| -> Result<bool, OracleError> {
            let out = net.forward(x).map_err(|e| OracleError::Invalid(e.to_string()))?;
            prefix.push(x.clone());
            let stop = if deviates(&out, exec.actions[i], sem) {
                visit(DeviationWitness { step: i, states: prefix.clone() })
            } else if i + 1 < exec.len() {
                level(i + 1, net, exec, sem, per_step, enumerators, prefix, budget, visit)?
            } else {
                false
            };
            prefix.pop();
            Ok(stop)
        };
        en.each(prev.as_deref(), &per_step[i], budget, &mut inner)
    }

    level(0, net, exec, sem, &per_step, &enumerators, &mut prefix, &mut budget, visit)
}

/// Every first-deviation witness compatible with the pinned features.
pub fn deviation_witnesses(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    pins: &StepMask,
    sem: Semantics,
    cap: u64,
) -> Result<Vec<DeviationWitness>, OracleError> {
    check_shapes(sys, net, exec, Some(pins))?;
    let pins = match pins.role {
        MaskRole::Explanation => pins.clone(),
        MaskRole::Contrastive => pins.complement(sys.feature_count()),
    };
    let mut out = Vec::new();
    search_witnesses(sys, net, exec, &pins, sem, cap, &mut |w| {
        out.push(w);
        false
    })?;
    Ok(out)
}

/// Does pinning `mask` (explanation role) force every action?
pub fn oracle_is_explanation(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    mask: &StepMask,
    sem: Semantics,
    cap: u64,
) -> Result<bool, OracleError> {
    check_shapes(sys, net, exec, Some(mask))?;
    let pins = match mask.role {
        MaskRole::Explanation => mask.clone(),
        MaskRole::Contrastive => mask.complement(sys.feature_count()),
    };
    let found = search_witnesses(sys, net, exec, &pins, sem, cap, &mut |_| true)?;
    Ok(!found)
}

/// Can freeing `mask` change some action?
pub fn oracle_is_contrastive(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    mask: &StepMask,
    sem: Semantics,
    cap: u64,
) -> Result<bool, OracleError> {
    let freed = mask.clone().with_role(MaskRole::Contrastive);
    oracle_is_explanation(sys, net, exec, &freed, sem, cap).map(|e| !e)
}

/// The minimal sets of differing pairs over all witnesses with nothing
/// pinned. A mask is an explanation exactly when it meets every member.
pub fn deviation_family(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    sem: Semantics,
    cap: u64,
) -> Result<Vec<BTreeSet<(usize, usize)>>, OracleError> {
    let free = StepMask::empty(MaskRole::Explanation, exec.len());
    let mut family: Vec<BTreeSet<(usize, usize)>> = deviation_witnesses(sys, net, exec, &free, sem, cap)?
        .iter()
        .map(|w| w.differing(exec))
        .collect();
    family.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    family.dedup();
    let mut minimal: Vec<BTreeSet<(usize, usize)>> = Vec::new();
    for set in family {
        if !minimal.iter().any(|m| m.is_subset(&set)) {
            minimal.push(set);
        }
    }
    Ok(minimal)
}

/// All minimal contrastive examples, smallest first.
pub fn oracle_minimal_cxps(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    sem: Semantics,
    cap: u64,
) -> Result<Vec<StepMask>, OracleError> {
    Ok(deviation_family(sys, net, exec, sem, cap)?
        .into_iter()
        .map(|set| StepMask::from_pairs(MaskRole::Contrastive, exec.len(), set))
        .collect())
}

/// Smallest explanations by exhaustive ascending search: returns the size
/// and the first minimum mask in (cardinality, lexicographic) order.
pub fn oracle_minimum_explanation(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    sem: Semantics,
    cap: u64,
) -> Result<StepMask, OracleError> {
    let family = deviation_family(sys, net, exec, sem, cap)?;
    let k = exec.len();
    let universe: Vec<(usize, usize)> = (0..k).flat_map(|s| (0..sys.feature_count()).map(move |f| (s, f))).collect();
    let mut budget = Budget { used: 0, cap };
    for size in 0..=universe.len() {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            budget.spend()?;
            let chosen: BTreeSet<(usize, usize)> = idx.iter().map(|&i| universe[i]).collect();
            if family.iter().all(|d| !d.is_disjoint(&chosen)) {
                return Ok(StepMask::from_pairs(MaskRole::Explanation, k, chosen));
            }
            if !next_combination(&mut idx, universe.len()) {
                break;
            }
        }
    }
    Err(OracleError::Invalid("the full mask does not explain the execution".into()))
}

pub fn oracle_minimum_explanation_size(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    sem: Semantics,
    cap: u64,
) -> Result<usize, OracleError> {
    oracle_minimum_explanation(sys, net, exec, sem, cap).map(|m| m.size())
}

/// Advances a sorted index combination; false when exhausted.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Every length-`k` sequence whose actions are the network's choices and
/// whose consecutive states satisfy the transitions of those actions. The
/// initial predicate is not applied.
pub fn oracle_all_sequences(sys: &ReactiveSystem, net: &Network, k: usize, cap: u64) -> Result<Vec<Execution>, OracleError> {
    sys.check_network(net).map_err(|e| OracleError::Invalid(e.to_string()))?;
    if k == 0 {
        return Err(OracleError::Invalid("k must be positive".into()));
    }
    let values = all_values(sys)?;
    let enumerators: Vec<StateEnumerator<'_>> =
        (0..sys.action_count()).map(|a| StateEnumerator::new(sys, &sys.transition(a).atoms)).collect();
    let mut budget = Budget { used: 0, cap };
    let mut out = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn extend(
        net: &Network,
        k: usize,
        values: &[Vec<Rational>],
        enumerators: &[StateEnumerator<'_>],
        states: &mut Vec<State>,
        actions: &mut Vec<usize>,
        budget: &mut Budget,
        out: &mut Vec<Execution>,
    ) -> Result<(), OracleError> {
        let first = states.is_empty();
        let en = if first { &enumerators[0] } else { &enumerators[*actions.last().expect("nonempty")] };
        let cur = states.last().cloned();
        let mut inner = |x: &State, budget: &mut Budget| -> Result<bool, OracleError> {
            let a = net.classify(x).map_err(|e| OracleError::Invalid(e.to_string()))?;
            states.push(x.clone());
            actions.push(a);
            if states.len() == k {
                out.push(Execution { states: states.clone(), actions: actions.clone() });
            } else {
                extend(net, k, values, enumerators, states, actions, budget, out)?;
            }
            states.pop();
            actions.pop();
            Ok(false)
        };
        en.each(cur.as_deref(), values, budget, &mut inner)?;
        Ok(())
    }

    extend(net, k, &values, &enumerators, &mut Vec::new(), &mut Vec::new(), &mut budget, &mut out)?;
    Ok(out)
}

/// Exhaustive evaluation of a verifier query: enumerates every variable that
/// is not computed by a network copy (all must have finite domains),
/// evaluates the networks exactly and checks every atom and disjunction.
/// Returns the first satisfying assignment in enumeration order.
pub fn oracle_query_sat(q: &Query<'_>, cap: u64) -> Result<Option<Vec<Rational>>, OracleError> {
    let n = q.var_count();
    let mut computed = vec![false; n];
    for copy in q.networks() {
        for v in copy.hidden.iter().flatten().chain(&copy.outputs) {
            computed[v.0] = true;
        }
    }
    let mut free: Vec<(usize, Vec<Rational>)> = Vec::new();
    for (i, decl) in q.vars().iter().enumerate() {
        if computed[i] {
            continue;
        }
        let values = decl.domain.as_ref().and_then(|d| d.values()).ok_or(OracleError::NotFinite(i))?;
        free.push((i, values.to_vec()));
    }
    let mut budget = Budget { used: 0, cap };
    let mut values = vec![Rational::default(); n];
    let mut idx = vec![0usize; free.len()];
    loop {
        budget.spend()?;
        for (j, (v, dom)) in free.iter().enumerate() {
            values[*v] = dom[idx[j]].clone();
        }
        for copy in q.networks() {
            let input: Vec<Rational> = copy.inputs.iter().map(|v| values[v.0].clone()).collect();
            let trace = copy.net.trace(&input).map_err(|e| OracleError::Invalid(e.to_string()))?;
            for (layer, vars) in trace.iter().zip(copy.hidden.iter().chain(std::iter::once(&copy.outputs))) {
                for (x, v) in layer.iter().zip(vars) {
                    values[v.0] = x.clone();
                }
            }
        }
        let holds = |a: &Atom<VarId>| a.holds(|v| values[v.0].clone());
        let ok = q.atoms().iter().all(holds) && q.disjunctions().iter().all(|d| d.cases.iter().any(|c| c.iter().all(holds)));
        if ok {
            return Ok(Some(values));
        }
        let mut j = free.len();
        loop {
            if j == 0 {
                return Ok(None);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < free[j].1.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}
