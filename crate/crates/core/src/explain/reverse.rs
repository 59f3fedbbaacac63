//! Reverse incremental enumeration and Method 4.

use std::collections::BTreeSet;

use super::mhs::minimum_hitting_set;
use super::{
    check_input, deviates, subsets, CxpCatalog, ExplainError, ExplainOptions, ExplainResult, ExplainStats, Guarantee,
    MethodId, Session, Target,
};
use crate::model::{Execution, MaskRole, Network, ReactiveSystem, StepMask};
use crate::queries::{contrastive_query_window, explanation_query_multi};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RieOutcome {
    /// Realisable from the recorded state before the window.
    Independent,
    /// Needs earlier features freed as well.
    Dependent,
    /// Not realisable by any earlier freeing.
    Spurious,
}

struct Ctx<'a> {
    sys: &'a ReactiveSystem,
    net: &'a Network,
    exec: &'a Execution,
    features: Vec<usize>,
}

impl Ctx<'_> {
    fn padded(&self, window: &[BTreeSet<usize>], lo: usize) -> StepMask {
        let mut steps = vec![BTreeSet::new(); self.exec.len()];
        for (off, set) in window.iter().enumerate() {
            steps[lo + off] = set.clone();
        }
        StepMask::new(MaskRole::Contrastive, steps)
    }

    fn window_sat(&self, session: &mut Session, window: &[BTreeSet<usize>], lo: usize, i: usize) -> Result<bool, ExplainError> {
        let u = contrastive_query_window(self.sys, self.net, self.exec, window, lo, i, session.sem())?;
        Ok(session.run(&u)?.is_sat())
    }

    /// `window` covers steps `j..=i` and is known to flip `a_i` when the
    /// state at `j` is unconstrained.
    fn rie(
        &self,
        session: &mut Session,
        window: &[BTreeSet<usize>],
        i: usize,
        j: usize,
        catalog: &mut CxpCatalog,
        out: &mut Vec<StepMask>,
    ) -> Result<RieOutcome, ExplainError> {
        if j == 0 {
            let c = self.padded(window, 0);
            catalog.insert(c.clone());
            out.push(c);
            return Ok(RieOutcome::Independent);
        }
        let mut ext: Vec<BTreeSet<usize>> = Vec::with_capacity(window.len() + 1);
        ext.push(BTreeSet::new());
        ext.extend(window.iter().cloned());
        if self.window_sat(session, &ext, j - 1, i)? {
            let c = self.padded(window, j);
            catalog.insert(c.clone());
            out.push(c);
            return Ok(RieOutcome::Independent);
        }
        let mut local: Vec<BTreeSet<usize>> = Vec::new();
        for cf in subsets(&self.features, 1, self.features.len()) {
            if local.iter().any(|l| l.is_subset(&cf)) {
                continue;
            }
            ext[0] = cf.clone();
            if catalog.covers(&self.padded(&ext, j - 1)) {
                catalog.skipped += 1;
                continue;
            }
            if self.window_sat(session, &ext, j - 1, i)? {
                local.push(cf);
                let deeper = ext.clone();
                self.rie(session, &deeper, i, j - 1, catalog, out)?;
            }
        }
        Ok(if local.is_empty() { RieOutcome::Spurious } else { RieOutcome::Dependent })
    }

    /// Does freeing `c` flip the action at some step up to `last`?
    fn flips_by(&self, session: &mut Session, c: &StepMask, last: usize) -> Result<bool, ExplainError> {
        for d in 0..=last {
            if self.window_sat(session, &c.steps[..=d], 0, d)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Classifies the window mask `window` (steps `j..=i`, 0-based) and returns
/// every full-length contrastive mask the backward search builds from it.
pub fn rie(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    window: &[BTreeSet<usize>],
    i: usize,
    j: usize,
    opts: &ExplainOptions,
) -> Result<(RieOutcome, Vec<StepMask>, ExplainStats), ExplainError> {
    if i >= exec.len() || j > i || window.len() != i - j + 1 {
        return Err(ExplainError::Input(format!("window of {} steps does not span {j}..={i}", window.len())));
    }
    check_input(sys, net, exec, opts.semantics)?;
    let ctx = Ctx { sys, net, exec, features: (0..sys.feature_count()).collect() };
    let mut session = Session::new(opts);
    let mut catalog = CxpCatalog::new();
    let mut out = Vec::new();
    let outcome = ctx.rie(&mut session, window, i, j, &mut catalog, &mut out)?;
    session.stats.wall_time_s = session.start_elapsed();
    Ok((outcome, out, session.stats))
}

/// Method 4: enumerate minimal single-step contrastive sets for every step,
/// extend each backwards, then take a minimum hitting set of the catalog.
///
/// The enumeration skips candidates that contain a catalog member, which can
/// leave a multi-step example out. The hitting set is therefore checked with
/// one full-length query; a counterexample is shrunk to a minimal
/// contrastive example, added to the catalog, and the hitting set recomputed.
pub fn method4(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    opts: &ExplainOptions,
) -> Result<(ExplainResult, CxpCatalog), ExplainError> {
    check_input(sys, net, exec, opts.semantics)?;
    let ctx = Ctx { sys, net, exec, features: (0..sys.feature_count()).collect() };
    let mut session = Session::new(opts);
    let mut catalog = CxpCatalog::new();
    let mut out = Vec::new();
    for i in 0..exec.len() {
        let mut found: Vec<BTreeSet<usize>> = Vec::new();
        for cand in subsets(&ctx.features, 1, ctx.features.len()) {
            if found.iter().any(|c| c.is_subset(&cand)) {
                continue;
            }
            if catalog.covers(&ctx.padded(std::slice::from_ref(&cand), i)) {
                catalog.skipped += 1;
                continue;
            }
            let window = [cand];
            if ctx.window_sat(&mut session, &window, i, i)? {
                let [cand] = window;
                found.push(cand.clone());
                ctx.rie(&mut session, &[cand], i, i, &mut catalog, &mut out)?;
            }
        }
    }
    let k = exec.len();
    loop {
        let h = StepMask::from_pairs(MaskRole::Explanation, k, minimum_hitting_set(&catalog.pair_sets())?);
        let u = explanation_query_multi(sys, net, exec, &h, session.sem())?;
        let verdict = session.run(&u)?;
        let Some(w) = verdict.witness() else {
            let result = session.finish(MethodId::Method4, Target::Minimum, h, Guarantee::Minimum);
            return Ok((result, catalog));
        };
        let states: Vec<_> = u.states.iter().map(|b| w.block(b)).collect();
        let mut last = k - 1;
        for (j, x) in states.iter().enumerate() {
            let out = net.forward(x).map_err(|e| ExplainError::Internal(e.to_string()))?;
            if deviates(&out, exec.actions[j], session.sem()) {
                last = j;
                break;
            }
        }
        let differing = (0..=last).flat_map(|j| {
            let (x, s) = (&states[j], &exec.states[j]);
            (0..x.len()).filter(move |&f| x[f] != s[f]).map(move |f| (j, f))
        });
        let mut c = StepMask::from_pairs(MaskRole::Contrastive, k, differing);
        for (j, f) in c.pairs().collect::<Vec<_>>() {
            let cand = c.without(j, f);
            if ctx.flips_by(&mut session, &cand, last)? {
                c = cand;
            }
        }
        if c.is_all_empty() || !catalog.insert(c) {
            return Err(ExplainError::Internal("counterexample did not extend the catalog".into()));
        }
        catalog.completions += 1;
    }
}
