//! Methods 1 to 3.

use std::collections::BTreeSet;

use super::mhs::minimum_hitting_set;
use super::{
    check_input, deviates, is_explanation, single, subsets, ExplainError, ExplainOptions, ExplainResult, Guarantee,
    MethodId, Session, Target,
};
use crate::model::{Execution, MaskRole, Network, ReactiveSystem, StepMask};
use crate::queries::{contrastive_query_multi, explanation_query_multi, explanation_query_prefix};

/// Method 1: every candidate is checked against the whole unrolled
/// execution (k network copies).
pub fn method1(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    target: Target,
    opts: &ExplainOptions,
) -> Result<ExplainResult, ExplainError> {
    check_input(sys, net, exec, opts.semantics)?;
    let mut session = Session::new(opts);
    let (mask, guarantee) = match target {
        Target::Minimal => (greedy_multi(&mut session, sys, net, exec)?, Guarantee::Minimal),
        Target::Minimum => (minimum_multi(&mut session, sys, net, exec)?, Guarantee::Minimum),
    };
    Ok(session.finish(MethodId::Method1, target, mask, guarantee))
}

fn greedy_multi(
    session: &mut Session,
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
) -> Result<StepMask, ExplainError> {
    let m = sys.feature_count();
    let mut e = StepMask::full(MaskRole::Explanation, exec.len(), m);
    for j in 0..exec.len() {
        for f in 0..m {
            let cand = e.without(j, f);
            if is_explanation(session, sys, net, exec, &cand)? {
                e = cand;
            }
        }
    }
    Ok(e)
}

fn minimum_multi(
    session: &mut Session,
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
) -> Result<StepMask, ExplainError> {
    let k = exec.len();
    let mut gamma: Vec<BTreeSet<(usize, usize)>> = Vec::new();
    loop {
        let h = StepMask::from_pairs(MaskRole::Explanation, k, minimum_hitting_set(&gamma)?);
        let u = explanation_query_multi(sys, net, exec, &h, session.sem())?;
        let verdict = session.run(&u)?;
        let Some(w) = verdict.witness() else { return Ok(h) };
        let states: Vec<_> = u.states.iter().map(|b| w.block(b)).collect();
        // pairs after the witness's first deviation play no part
        let mut last = k - 1;
        for (j, x) in states.iter().enumerate() {
            let out = net.forward(x).map_err(|e| ExplainError::Internal(e.to_string()))?;
            if deviates(&out, exec.actions[j], session.sem()) {
                last = j;
                break;
            }
        }
        let differing = (0..=last).flat_map(|j| {
            let (x, s, h) = (&states[j], &exec.states[j], &h);
            (0..x.len()).filter(move |&f| !h.contains(j, f) && x[f] != s[f]).map(move |f| (j, f))
        });
        let mut cx = StepMask::from_pairs(MaskRole::Contrastive, k, differing);
        for (j, f) in cx.pairs().collect::<Vec<_>>() {
            let cand = cx.without(j, f);
            let u = contrastive_query_multi(sys, net, exec, &cand, session.sem())?;
            if session.run(&u)?.is_sat() {
                cx = cand;
            }
        }
        if cx.is_all_empty() {
            return Err(ExplainError::Internal("empty contrastive example from a witness".into()));
        }
        gamma.push(cx.pairs().collect());
    }
}

/// Method 2: independent single-step explanations, concatenated. Sound but
/// carries no minimality guarantee.
pub fn method2(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    target: Target,
    opts: &ExplainOptions,
) -> Result<ExplainResult, ExplainError> {
    check_input(sys, net, exec, opts.semantics)?;
    let mut session = Session::new(opts);
    let mut steps = Vec::with_capacity(exec.len());
    for (s, &a) in exec.states.iter().zip(&exec.actions) {
        let e = match target {
            Target::Minimal => single::greedy(&mut session, net, sys.domains(), s, a)?,
            Target::Minimum => single::minimum(&mut session, net, sys.domains(), s, a)?,
        };
        steps.push(e);
    }
    Ok(session.finish(MethodId::Method2, target, StepMask::new(MaskRole::Explanation, steps), Guarantee::None))
}

fn prefix_explains(
    session: &mut Session,
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    prefix: &[BTreeSet<usize>],
) -> Result<bool, ExplainError> {
    let u = explanation_query_prefix(sys, net, exec, prefix, prefix.len() - 1, session.sem())?;
    Ok(!session.run(&u)?.is_sat())
}

/// Method 3, minimal: sweep the steps in order, deleting features while the
/// prefix query (one network copy) stays UNSAT. Later steps are still fully
/// pinned when a step is processed.
pub fn method3_minimal(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    opts: &ExplainOptions,
) -> Result<ExplainResult, ExplainError> {
    check_input(sys, net, exec, opts.semantics)?;
    let mut session = Session::new(opts);
    let m = sys.feature_count();
    let mut prefix: Vec<BTreeSet<usize>> = Vec::with_capacity(exec.len());
    for _ in 0..exec.len() {
        prefix.push((0..m).collect());
        let i = prefix.len() - 1;
        for f in 0..m {
            prefix[i].remove(&f);
            if !prefix_explains(&mut session, sys, net, exec, &prefix)? {
                prefix[i].insert(f);
            }
        }
    }
    let mask = StepMask::new(MaskRole::Explanation, prefix);
    Ok(session.finish(MethodId::Method3, Target::Minimal, mask, Guarantee::Minimal))
}

struct Search<'a> {
    sys: &'a ReactiveSystem,
    net: &'a Network,
    exec: &'a Execution,
    features: Vec<usize>,
    best: Option<Vec<BTreeSet<usize>>>,
    best_size: usize,
}

impl Search<'_> {
    fn dfs(&mut self, session: &mut Session, prefix: &mut Vec<BTreeSet<usize>>, running: usize) -> Result<(), ExplainError> {
        if prefix.len() == self.exec.len() {
            if running < self.best_size {
                self.best_size = running;
                self.best = Some(prefix.clone());
            }
            return Ok(());
        }
        let mut valid: Vec<BTreeSet<usize>> = Vec::new();
        let features = self.features.clone();
        for cand in subsets(&features, 0, features.len()) {
            if running + cand.len() >= self.best_size {
                break;
            }
            // a superset of a valid subset pins more, so it is valid too
            let ok = valid.iter().any(|v| v.is_subset(&cand)) || {
                prefix.push(cand.clone());
                let r = prefix_explains(session, self.sys, self.net, self.exec, prefix);
                prefix.pop();
                r?
            };
            if ok {
                valid.push(cand.clone());
                let size = cand.len();
                prefix.push(cand);
                self.dfs(session, prefix, running + size)?;
                prefix.pop();
            }
        }
        Ok(())
    }
}

/// Method 3, minimum: depth-first over steps, trying every subset that keeps
/// the prefix query UNSAT, with branch and bound on the running size.
pub fn method3_minimum(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    opts: &ExplainOptions,
) -> Result<ExplainResult, ExplainError> {
    check_input(sys, net, exec, opts.semantics)?;
    let mut session = Session::new(opts);
    let m = sys.feature_count();
    let mut search = Search {
        sys,
        net,
        exec,
        features: (0..m).collect(),
        best: None,
        best_size: exec.len() * m + 1,
    };
    search.dfs(&mut session, &mut Vec::new(), 0)?;
    let best = search.best.ok_or_else(|| ExplainError::Internal("no explanation found".into()))?;
    let mask = StepMask::new(MaskRole::Explanation, best);
    Ok(session.finish(MethodId::Method3, Target::Minimum, mask, Guarantee::Minimum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::fixtures;

    fn opts() -> ExplainOptions {
        ExplainOptions::default()
    }

    #[test]
    fn copy_example_methods() {
        let (sys, net, exec) = fixtures::copy_example();
        let expected = StepMask::from_pairs(MaskRole::Explanation, 2, [(0, 2)]);
        let r = method1(&sys, &net, &exec, Target::Minimum, &opts()).unwrap();
        assert_eq!(r.size, 1);
        assert_eq!(r.mask, expected);
        assert_eq!(r.stats.max_copies(), 2);
        let r = method3_minimal(&sys, &net, &exec, &opts()).unwrap();
        assert_eq!(r.mask, expected);
        assert_eq!(r.stats.copies.keys().collect::<Vec<_>>(), vec![&1]);
        let r = method3_minimum(&sys, &net, &exec, &opts()).unwrap();
        assert_eq!(r.size, 1);
        let r = method2(&sys, &net, &exec, Target::Minimum, &opts()).unwrap();
        assert_eq!(r.size, 2);
        let r = method2(&sys, &net, &exec, Target::Minimal, &opts()).unwrap();
        assert_eq!(r.mask, StepMask::from_pairs(MaskRole::Explanation, 2, [(0, 2), (1, 2)]));
        assert_eq!(r.guarantee, Guarantee::None);
    }

    #[test]
    fn constant_policy_is_all_empty() {
        let (sys, _, exec) = fixtures::copy_example();
        let net = fixtures::constant_network(3, 2, 0);
        for r in [
            method1(&sys, &net, &exec, Target::Minimal, &opts()).unwrap(),
            method1(&sys, &net, &exec, Target::Minimum, &opts()).unwrap(),
            method3_minimal(&sys, &net, &exec, &opts()).unwrap(),
            method3_minimum(&sys, &net, &exec, &opts()).unwrap(),
        ] {
            assert!(r.mask.is_all_empty());
        }
    }

    #[test]
    fn single_step_matches_single_routines() {
        let (sys, net, exec) = fixtures::copy_example();
        let one = exec.prefix(1);
        let (g, _) = single::greedy_minimal_single(&net, sys.domains(), &one.states[0], one.actions[0], &opts()).unwrap();
        let r = method1(&sys, &net, &one, Target::Minimal, &opts()).unwrap();
        assert_eq!(r.mask.steps[0], g);
    }
}
