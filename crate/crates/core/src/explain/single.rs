//! Explanations of a single network decision.

use std::collections::BTreeSet;

use super::{mhs::minimum_hitting_set, subsets, ExplainError, ExplainOptions, ExplainStats, Session};
use crate::model::{is_decisive, Execution, FeatureDomain, Network, ReactiveSystem};
use crate::queries::{contrastive_query_single, explanation_query_single, Semantics};
use crate::rational::Rational;

fn check_decision(net: &Network, v: &[Rational], c: usize, sem: Semantics) -> Result<(), ExplainError> {
    let out = net.forward(v).map_err(|e| ExplainError::Input(e.to_string()))?;
    if c >= out.len() {
        return Err(ExplainError::Input(format!("class {c} out of range")));
    }
    let ok = match sem {
        Semantics::Weak => is_decisive(&out, c),
        Semantics::Strict => crate::model::argmax(&out) == c,
    };
    if ok {
        Ok(())
    } else {
        Err(ExplainError::TiedStep(0))
    }
}

fn finish<T>(mut session: Session, value: T) -> (T, ExplainStats) {
    session.stats.wall_time_s = session.start_elapsed();
    (value, session.stats)
}

pub(crate) fn explains(
    session: &mut Session,
    net: &Network,
    domains: &[FeatureDomain],
    v: &[Rational],
    c: usize,
    e: &BTreeSet<usize>,
) -> Result<bool, ExplainError> {
    let u = explanation_query_single(net, domains, v, c, e, session.sem())?;
    Ok(!session.run(&u)?.is_sat())
}

pub(crate) fn greedy(
    session: &mut Session,
    net: &Network,
    domains: &[FeatureDomain],
    v: &[Rational],
    c: usize,
) -> Result<BTreeSet<usize>, ExplainError> {
    let mut e: BTreeSet<usize> = (0..v.len()).collect();
    for f in 0..v.len() {
        e.remove(&f);
        if !explains(session, net, domains, v, c, &e)? {
            e.insert(f);
        }
    }
    Ok(e)
}

/// Implicit hitting-set loop: the candidate is a minimum hitting set of the
/// contrastive sets found so far; each failed candidate yields a new one.
pub(crate) fn minimum(
    session: &mut Session,
    net: &Network,
    domains: &[FeatureDomain],
    v: &[Rational],
    c: usize,
) -> Result<BTreeSet<usize>, ExplainError> {
    let mut gamma: Vec<BTreeSet<usize>> = Vec::new();
    loop {
        let h = minimum_hitting_set(&gamma)?;
        let u = explanation_query_single(net, domains, v, c, &h, session.sem())?;
        let verdict = session.run(&u)?;
        let Some(w) = verdict.witness() else { return Ok(h) };
        let x = w.block(&u.states[0]);
        let mut cx: BTreeSet<usize> = (0..v.len()).filter(|f| !h.contains(f) && x[*f] != v[*f]).collect();
        for f in cx.clone() {
            cx.remove(&f);
            let u = contrastive_query_single(net, domains, v, c, &cx, session.sem())?;
            if !session.run(&u)?.is_sat() {
                cx.insert(f);
            }
        }
        if cx.is_empty() {
            return Err(ExplainError::Internal("empty contrastive set from a witness".into()));
        }
        gamma.push(cx);
    }
}

/// Minimal explanation by deletion in ascending feature order.
pub fn greedy_minimal_single(
    net: &Network,
    domains: &[FeatureDomain],
    v: &[Rational],
    c: usize,
    opts: &ExplainOptions,
) -> Result<(BTreeSet<usize>, ExplainStats), ExplainError> {
    check_decision(net, v, c, opts.semantics)?;
    let mut session = Session::new(opts);
    let e = greedy(&mut session, net, domains, v, c)?;
    Ok(finish(session, e))
}

/// Minimum-cardinality explanation.
pub fn minimum_single(
    net: &Network,
    domains: &[FeatureDomain],
    v: &[Rational],
    c: usize,
    opts: &ExplainOptions,
) -> Result<(BTreeSet<usize>, ExplainStats), ExplainError> {
    check_decision(net, v, c, opts.semantics)?;
    let mut session = Session::new(opts);
    let e = minimum(&mut session, net, domains, v, c)?;
    Ok(finish(session, e))
}

pub(crate) fn is_contrastive(
    session: &mut Session,
    net: &Network,
    domains: &[FeatureDomain],
    v: &[Rational],
    c: usize,
    cx: &BTreeSet<usize>,
) -> Result<bool, ExplainError> {
    let u = contrastive_query_single(net, domains, v, c, cx, session.sem())?;
    Ok(session.run(&u)?.is_sat())
}

/// All minimal contrastive sets of step `i` on its own, by ascending size.
/// Candidates containing a found set are never dispatched.
pub fn enumerate_cxps_single(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    i: usize,
    opts: &ExplainOptions,
) -> Result<(Vec<BTreeSet<usize>>, ExplainStats), ExplainError> {
    if i >= exec.len() {
        return Err(ExplainError::Input(format!("step {i} out of range")));
    }
    check_decision(net, &exec.states[i], exec.actions[i], opts.semantics)?;
    let mut session = Session::new(opts);
    let features: Vec<usize> = (0..sys.feature_count()).collect();
    let mut found: Vec<BTreeSet<usize>> = Vec::new();
    for cand in subsets(&features, 1, features.len()) {
        if found.iter().any(|c| c.is_subset(&cand)) {
            continue;
        }
        if is_contrastive(&mut session, net, sys.domains(), &exec.states[i], exec.actions[i], &cand)? {
            found.push(cand);
        }
    }
    Ok(finish(session, found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::fixtures;
    use crate::rational::int;

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn toy3_single() {
        let net = fixtures::toy3();
        let domains = vec![FeatureDomain::binary(); 3];
        let opts = ExplainOptions::default();
        // class 0 iff x1 or x2 is set; at (0, 1, 0) pinning x1 suffices
        let v = vec![int(0), int(1), int(0)];
        assert_eq!(net.classify(&v).unwrap(), 0);
        let (g, _) = greedy_minimal_single(&net, &domains, &v, 0, &opts).unwrap();
        let (m, _) = minimum_single(&net, &domains, &v, 0, &opts).unwrap();
        assert_eq!(g, set(&[1]));
        assert_eq!(m, set(&[1]));
    }

    #[test]
    fn constant_network_needs_nothing() {
        let (sys, _, exec) = fixtures::copy_example();
        let net = fixtures::constant_network(3, 2, 0);
        let opts = ExplainOptions::default();
        let (g, _) = greedy_minimal_single(&net, sys.domains(), &exec.states[0], 0, &opts).unwrap();
        assert!(g.is_empty());
        let (m, stats) = minimum_single(&net, sys.domains(), &exec.states[0], 0, &opts).unwrap();
        assert!(m.is_empty());
        assert_eq!(stats.queries, 1);
        let (cx, _) = enumerate_cxps_single(&sys, &net, &exec, 0, &opts).unwrap();
        assert!(cx.is_empty());
    }

    #[test]
    fn copy_example_single_step() {
        let (sys, net, exec) = fixtures::copy_example();
        let opts = ExplainOptions::default();
        let (cx, _) = enumerate_cxps_single(&sys, &net, &exec, 1, &opts).unwrap();
        assert_eq!(cx, vec![set(&[2])]);
        let (m, _) = minimum_single(&net, sys.domains(), &exec.states[1], exec.actions[1], &opts).unwrap();
        assert_eq!(m, set(&[2]));
    }
}
