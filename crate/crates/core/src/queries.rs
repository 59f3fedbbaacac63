//! Builders turning explanation and contrastive candidates into verifier
//! queries.
//!
//! Multi-step queries follow the causal reading of an execution: a witness
//! deviates first at some step `d`, so only the transitions into steps
//! `1..=d` (taken with the recorded actions) need to hold. Each `(d, rival)`
//! pair becomes one case of the "some action differs" disjunction. States
//! after `d` stay in the query, pinned where the mask says so, but nothing
//! links them to the deviating prefix.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{Atom, Comparator, Execution, FeatureDomain, LinExpr, MaskRole, Network, ReactiveSystem, StepMask};
use crate::rational::{self, Rational};
use crate::verifier::{instantiate, Query, Unrolled, VarId};

/// How "the network does not pick `c`" is encoded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    /// Some rival scores at least as high as `c`.
    #[default]
    Weak,
    /// The lowest-index argmax differs from `c`.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("feature {feature} out of range (m = {m})")]
    Feature { feature: usize, m: usize },
    #[error("mask has {found} steps, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("step {step} out of range (k = {k})")]
    Step { step: usize, k: usize },
    #[error("class {class} out of range ({actions} outputs)")]
    Class { class: usize, actions: usize },
    #[error("input has {found} features, network expects {expected}")]
    Input { expected: usize, found: usize },
}

/// One case per rival output: "`rival` beats or ties `c`".
pub fn rival_cases(outputs: &[VarId], c: usize, sem: Semantics) -> Vec<Vec<Atom<VarId>>> {
    (0..outputs.len())
        .filter(|&r| r != c)
        .map(|r| {
            let expr = LinExpr::var(outputs[r]).term(outputs[c], rational::int(-1));
            let cmp = match sem {
                Semantics::Strict if r > c => Comparator::Gt,
                _ => Comparator::Ge,
            };
            vec![Atom::cmp(expr, cmp, Rational::from_integer(0.into())).labelled(format!("rival {r}"))]
        })
        .collect()
}

fn check_set(set: &BTreeSet<usize>, m: usize) -> Result<(), QueryError> {
    match set.iter().find(|&&f| f >= m) {
        Some(&feature) => Err(QueryError::Feature { feature, m }),
        None => Ok(()),
    }
}

fn pin_block(q: &mut Query<'_>, block: &[VarId], state: &[Rational], fixed: impl Fn(usize) -> bool) {
    for (f, &v) in block.iter().enumerate() {
        if fixed(f) {
            q.assert(Atom::pin(v, state[f].clone()));
        }
    }
}

fn one_step<'n>(
    net: &'n Network,
    domains: &[FeatureDomain],
    v: &[Rational],
    c: usize,
    fixed: impl Fn(usize) -> bool,
    sem: Semantics,
) -> Result<Unrolled<'n>, QueryError> {
    if v.len() != net.input_width() || domains.len() != v.len() {
        return Err(QueryError::Input { expected: net.input_width(), found: v.len() });
    }
    if c >= net.output_width() {
        return Err(QueryError::Class { class: c, actions: net.output_width() });
    }
    let mut query = Query::new();
    let x = query.add_block("x1", domains);
    pin_block(&mut query, &x, v, fixed);
    let y = query.add_network(net, &x, "n1");
    query.assert_any("not c", rival_cases(&y, c, sem));
    Ok(Unrolled { query, states: vec![x], outputs: vec![y] })
}

/// SAT iff pinning `e` to `v` does not force class `c`.
pub fn explanation_query_single<'n>(
    net: &'n Network,
    domains: &[FeatureDomain],
    v: &[Rational],
    c: usize,
    e: &BTreeSet<usize>,
    sem: Semantics,
) -> Result<Unrolled<'n>, QueryError> {
    check_set(e, v.len())?;
    one_step(net, domains, v, c, |f| e.contains(&f), sem)
}

/// SAT iff freeing `cx` (pinning the rest to `v`) can change class `c`.
pub fn contrastive_query_single<'n>(
    net: &'n Network,
    domains: &[FeatureDomain],
    v: &[Rational],
    c: usize,
    cx: &BTreeSet<usize>,
    sem: Semantics,
) -> Result<Unrolled<'n>, QueryError> {
    check_set(cx, v.len())?;
    one_step(net, domains, v, c, |f| !cx.contains(&f), sem)
}

fn check_mask(sys: &ReactiveSystem, exec: &Execution, mask: &StepMask) -> Result<(), QueryError> {
    if mask.len() != exec.len() {
        return Err(QueryError::Length { expected: exec.len(), found: mask.len() });
    }
    for set in &mask.steps {
        check_set(set, sys.feature_count())?;
    }
    Ok(())
}

/// Pinned features per step, whatever the mask's role.
fn pinned(mask: &StepMask, m: usize) -> StepMask {
    match mask.role {
        MaskRole::Explanation => mask.clone(),
        MaskRole::Contrastive => mask.complement(m),
    }
}

/// Transition atoms from step `l` to step `l + 1` with the recorded action.
fn transition_atoms(sys: &ReactiveSystem, exec: &Execution, states: &[Vec<VarId>], l: usize) -> Vec<Atom<VarId>> {
    sys.transition(exec.actions[l])
        .atoms
        .iter()
        .map(|a| instantiate(a, &states[l], &states[l + 1]))
        .collect()
}

fn deviation_query<'n>(
    sys: &ReactiveSystem,
    net: &'n Network,
    exec: &Execution,
    pins: &StepMask,
    sem: Semantics,
) -> Unrolled<'n> {
    let k = exec.len();
    let mut query = Query::new();
    let mut states = Vec::with_capacity(k);
    let mut outputs = Vec::with_capacity(k);
    for i in 0..k {
        let block = query.add_block(&format!("x{}", i + 1), sys.domains());
        pin_block(&mut query, &block, &exec.states[i], |f| pins.contains(i, f));
        outputs.push(query.add_network(net, &block, format!("n{}", i + 1)));
        states.push(block);
    }
    let mut cases = Vec::new();
    let mut prefix: Vec<Atom<VarId>> = Vec::new();
    for d in 0..k {
        if d > 0 {
            prefix.extend(transition_atoms(sys, exec, &states, d - 1));
        }
        for rival in rival_cases(&outputs[d], exec.actions[d], sem) {
            let mut case = prefix.clone();
            case.extend(rival);
            cases.push(case);
        }
    }
    query.assert_any("some action differs", cases);
    Unrolled { query, states, outputs }
}

/// SAT iff the mask is not a k-step explanation of the execution.
pub fn explanation_query_multi<'n>(
    sys: &ReactiveSystem,
    net: &'n Network,
    exec: &Execution,
    e: &StepMask,
    sem: Semantics,
) -> Result<Unrolled<'n>, QueryError> {
    check_mask(sys, exec, e)?;
    Ok(deviation_query(sys, net, exec, &pinned(e, sys.feature_count()), sem))
}

/// SAT iff the mask is a k-step contrastive example. A mask with the
/// explanation role is read as the set of freed features as well.
pub fn contrastive_query_multi<'n>(
    sys: &ReactiveSystem,
    net: &'n Network,
    exec: &Execution,
    cx: &StepMask,
    sem: Semantics,
) -> Result<Unrolled<'n>, QueryError> {
    check_mask(sys, exec, cx)?;
    let freed = cx.clone().with_role(MaskRole::Contrastive);
    Ok(deviation_query(sys, net, exec, &pinned(&freed, sys.feature_count()), sem))
}

/// Steps `0..=i` with `prefix[j]` pinned at step `j`, transitions with the
/// recorded actions, and a single network copy at step `i`. SAT iff the
/// prefix does not force action `a_i`.
pub fn explanation_query_prefix<'n>(
    sys: &ReactiveSystem,
    net: &'n Network,
    exec: &Execution,
    prefix: &[BTreeSet<usize>],
    i: usize,
    sem: Semantics,
) -> Result<Unrolled<'n>, QueryError> {
    if i >= exec.len() {
        return Err(QueryError::Step { step: i, k: exec.len() });
    }
    if prefix.len() != i + 1 {
        return Err(QueryError::Length { expected: i + 1, found: prefix.len() });
    }
    for set in prefix {
        check_set(set, sys.feature_count())?;
    }
    let mut query = Query::new();
    let mut states = Vec::with_capacity(i + 1);
    for (j, set) in prefix.iter().enumerate() {
        let block = query.add_block(&format!("x{}", j + 1), sys.domains());
        pin_block(&mut query, &block, &exec.states[j], |f| set.contains(&f));
        states.push(block);
    }
    for l in 0..i {
        for atom in transition_atoms(sys, exec, &states, l) {
            query.assert(atom);
        }
    }
    let y = query.add_network(net, &states[i], format!("n{}", i + 1));
    query.assert_any("not a_i", rival_cases(&y, exec.actions[i], sem));
    Ok(Unrolled { query, states, outputs: vec![y] })
}

/// Steps `lo..=i` with `window[j - lo]` freed at step `j` and everything else
/// in the window pinned, transitions inside the window with the recorded
/// actions, and a single network copy at step `i`. SAT iff the freed
/// features can flip `a_i`.
pub fn contrastive_query_window<'n>(
    sys: &ReactiveSystem,
    net: &'n Network,
    exec: &Execution,
    window: &[BTreeSet<usize>],
    lo: usize,
    i: usize,
    sem: Semantics,
) -> Result<Unrolled<'n>, QueryError> {
    if i >= exec.len() || lo > i {
        return Err(QueryError::Step { step: i, k: exec.len() });
    }
    if window.len() != i - lo + 1 {
        return Err(QueryError::Length { expected: i - lo + 1, found: window.len() });
    }
    for set in window {
        check_set(set, sys.feature_count())?;
    }
    let mut query = Query::new();
    let mut states = Vec::with_capacity(window.len());
    for (off, set) in window.iter().enumerate() {
        let j = lo + off;
        let block = query.add_block(&format!("x{}", j + 1), sys.domains());
        pin_block(&mut query, &block, &exec.states[j], |f| !set.contains(&f));
        states.push(block);
    }
    for off in 0..window.len() - 1 {
        let l = lo + off;
        for atom in sys.transition(exec.actions[l]).atoms.iter() {
            query.assert(instantiate(atom, &states[off], &states[off + 1]));
        }
    }
    let y = query.add_network(net, &states[i - lo], format!("n{}", i + 1));
    query.assert_any("not a_i", rival_cases(&y, exec.actions[i], sem));
    Ok(Unrolled { query, states, outputs: vec![y] })
}
