//! Branch-and-propagate search over a compiled query.
//!
//! Layout of the columns: query variables first, then one slack per distinct
//! multi-term linear expression (atoms, ReLU pre-activations and the
//! `y - Wx` rows). Membership sets live next to the simplex bounds so that a
//! finite domain is simply "the sorted values between lower and upper".

use std::collections::{HashMap, VecDeque};
use std::rc::Rc;
use std::time::Instant;

use num_traits::{One, Signed, Zero};

use super::delta::{delta_bound, DRat};
use super::query::{Query, VarId};
use super::simplex::Simplex;
use super::{check_witness, SolveOptions, SolveStats, VerifyError, Witness};
use crate::model::{Atom, Comparator, FeatureDomain, Relation};
use crate::rational::{self, Rational};

#[derive(Debug, Clone)]
enum Effect {
    Lower(usize, DRat),
    Upper(usize, DRat),
    Member(usize, Rc<Vec<Rational>>),
    False,
}

#[derive(Debug, Clone, Default)]
struct Case {
    effects: Vec<Effect>,
    vars: Vec<usize>,
    infeasible: bool,
}

#[derive(Debug, Clone)]
struct Relu {
    net: usize,
    y: usize,
    /// Slack holding `Wx`; the pre-activation is `z + b`.
    z: usize,
    /// Slack holding `y - Wx`; `y - pre = d - b`.
    d: usize,
    b: Rational,
}

#[derive(Debug, Clone)]
struct NetInfo {
    inputs: Vec<usize>,
    computed: Vec<usize>,
}

type Key = Vec<(usize, Rational)>;

struct Compiler {
    nvars: usize,
    rows: Vec<(usize, Key)>,
    slacks: HashMap<Key, usize>,
}

impl Compiler {
    fn slack(&mut self, key: Key) -> usize {
        if let Some(&s) = self.slacks.get(&key) {
            return s;
        }
        let s = self.nvars + self.rows.len();
        self.rows.push((s, key.clone()));
        self.slacks.insert(key, s);
        s
    }

    /// Fresh slack, never shared.
    fn private_slack(&mut self, key: Key) -> usize {
        let s = self.nvars + self.rows.len();
        self.rows.push((s, key));
        s
    }
}

fn normalize(atom: &Atom<VarId>) -> Key {
    let mut terms: Vec<(usize, Rational)> = Vec::new();
    for (v, a) in &atom.expr.terms {
        match terms.iter_mut().find(|(c, _)| *c == v.0) {
            Some((_, acc)) => *acc += a,
            None => terms.push((v.0, a.clone())),
        }
    }
    terms.retain(|(_, a)| !a.is_zero());
    terms.sort_by_key(|(c, _)| *c);
    terms
}

fn cmp_effects(col: usize, cmp: Comparator, c: Rational, out: &mut Vec<Effect>) {
    match cmp {
        Comparator::Le => out.push(Effect::Upper(col, DRat::real(c))),
        Comparator::Lt => out.push(Effect::Upper(col, DRat::new(c, rational::int(-1)))),
        Comparator::Ge => out.push(Effect::Lower(col, DRat::real(c))),
        Comparator::Gt => out.push(Effect::Lower(col, DRat::new(c, rational::one()))),
        Comparator::Eq => {
            out.push(Effect::Lower(col, DRat::real(c.clone())));
            out.push(Effect::Upper(col, DRat::real(c)));
        }
    }
}

fn compile_atom(comp: &mut Compiler, atom: &Atom<VarId>, out: &mut Vec<Effect>) {
    let key = normalize(atom);
    match (&atom.relation, key.len()) {
        (_, 0) => {
            if !atom.holds(|_| Rational::zero()) {
                out.push(Effect::False);
            }
        }
        (Relation::Cmp(cmp, rhs), 1) => {
            let (col, a) = &key[0];
            let cmp = if a.is_negative() { cmp.flipped() } else { *cmp };
            cmp_effects(*col, cmp, rhs / a, out);
        }
        (Relation::Cmp(cmp, rhs), _) => {
            let s = comp.slack(key);
            cmp_effects(s, *cmp, rhs.clone(), out);
        }
        (Relation::In(values), 1) => {
            let (col, a) = &key[0];
            let mut vals: Vec<Rational> = values.iter().map(|v| v / a).collect();
            vals.sort();
            vals.dedup();
            out.push(Effect::Member(*col, Rc::new(vals)));
        }
        (Relation::In(values), _) => {
            let s = comp.slack(key);
            out.push(Effect::Member(s, Rc::new(values.clone())));
        }
    }
}

fn atom_vars(atom: &Atom<VarId>) -> impl Iterator<Item = usize> + '_ {
    atom.expr.terms.iter().filter(|(_, a)| !a.is_zero()).map(|(v, _)| v.0)
}

pub(crate) struct Compiled {
    nvars: usize,
    ncols: usize,
    rows: Vec<(usize, Key)>,
    base: Vec<Effect>,
    global_vars: Vec<usize>,
    cases: Vec<Vec<Case>>,
    relus: Vec<Relu>,
    nets: Vec<NetInfo>,
    computed: Vec<bool>,
    domains: Vec<Option<FeatureDomain>>,
}

pub(crate) fn compile(q: &Query<'_>) -> Compiled {
    let nvars = q.var_count();
    let mut comp = Compiler { nvars, rows: Vec::new(), slacks: HashMap::new() };
    let mut base = Vec::new();
    for (i, decl) in q.vars().iter().enumerate() {
        match &decl.domain {
            Some(FeatureDomain::Finite(values)) => base.push(Effect::Member(i, Rc::new(values.clone()))),
            Some(FeatureDomain::Interval(lo, hi)) => {
                base.push(Effect::Lower(i, DRat::real(lo.clone())));
                base.push(Effect::Upper(i, DRat::real(hi.clone())));
            }
            None => {}
        }
    }
    let mut global_vars = Vec::new();
    for atom in q.atoms() {
        compile_atom(&mut comp, atom, &mut base);
        global_vars.extend(atom_vars(atom));
    }
    let mut computed = vec![false; nvars];
    let mut relus = Vec::new();
    let mut nets = Vec::new();
    for (n, copy) in q.networks().iter().enumerate() {
        let mut prev: Vec<usize> = copy.inputs.iter().map(|v| v.0).collect();
        let mut computed_cols = Vec::new();
        let layers = copy.net.layers();
        for (l, layer) in layers.iter().enumerate() {
            let outs: Vec<usize> = if l + 1 == layers.len() {
                copy.outputs.iter().map(|v| v.0).collect()
            } else {
                copy.hidden[l].iter().map(|v| v.0).collect()
            };
            for (u, &y) in outs.iter().enumerate() {
                computed[y] = true;
                computed_cols.push(y);
                let mut wx: Key = Vec::new();
                for (i, w) in layer.weights[u].iter().enumerate() {
                    if w.is_zero() {
                        continue;
                    }
                    match wx.iter_mut().find(|(c, _)| *c == prev[i]) {
                        Some((_, acc)) => *acc += w,
                        None => wx.push((prev[i], w.clone())),
                    }
                }
                wx.retain(|(_, a)| !a.is_zero());
                wx.sort_by_key(|(c, _)| *c);
                let b = layer.bias[u].clone();
                if wx.is_empty() {
                    let v = if layer.relu { rational::relu(&b) } else { b };
                    cmp_effects(y, Comparator::Eq, v, &mut base);
                    continue;
                }
                let mut diff: Key = wx.iter().map(|(c, a)| (*c, -a)).collect();
                diff.push((y, rational::one()));
                diff.sort_by_key(|(c, _)| *c);
                let d = comp.private_slack(diff);
                if layer.relu {
                    let z = comp.private_slack(wx);
                    base.push(Effect::Lower(y, DRat::zero()));
                    base.push(Effect::Lower(d, DRat::real(b.clone())));
                    relus.push(Relu { net: n, y, z, d, b });
                } else {
                    cmp_effects(d, Comparator::Eq, b, &mut base);
                }
            }
            prev = outs;
        }
        nets.push(NetInfo { inputs: copy.inputs.iter().map(|v| v.0).collect(), computed: computed_cols });
    }
    let mut cases = Vec::new();
    for disj in q.disjunctions() {
        let mut group = Vec::new();
        for atoms in &disj.cases {
            let mut case = Case::default();
            for atom in atoms {
                compile_atom(&mut comp, atom, &mut case.effects);
                case.vars.extend(atom_vars(atom));
            }
            case.infeasible = case.effects.iter().any(|e| matches!(e, Effect::False));
            case.vars.sort_unstable();
            case.vars.dedup();
            group.push(case);
        }
        cases.push(group);
    }
    let ncols = nvars + comp.rows.len();
    Compiled {
        nvars,
        ncols,
        rows: comp.rows,
        base,
        global_vars,
        cases,
        relus,
        nets,
        computed,
        domains: q.vars().iter().map(|d| d.domain.clone()).collect(),
    }
}

enum Trail {
    Bounds(usize, Option<DRat>, Option<DRat>),
    Finite(usize, Option<Rc<Vec<Rational>>>),
    Choice(usize),
}

struct Conflict;

pub(crate) struct Search<'a, 'n> {
    q: &'a Query<'n>,
    c: &'a Compiled,
    opts: &'a SolveOptions,
    start: Instant,
    lp: Simplex,
    finite: Vec<Option<Rc<Vec<Rational>>>>,
    /// Rows (by index) that mention each column, including its own row.
    col_rows: Vec<Vec<usize>>,
    dirty: Vec<usize>,
    trail: Vec<Trail>,
    choice: Vec<Option<usize>>,
    pub stats: SolveStats,
    witness: Option<Witness>,
}

const GRID: i64 = 1 << 20;

/// True when moving a bound by `gain` is below 1/1024 of `1 + |old|`.
fn negligible(gain: Rational, old: &Rational) -> bool {
    gain * Rational::from_integer(1024.into()) < Rational::one() + old.abs()
}

/// Rounds a bound with a large denominator outward onto a 2^-20 grid.
fn coarsen(v: DRat, up: bool) -> DRat {
    if v.r.denom().bits() <= 24 {
        return v;
    }
    let g = Rational::from_integer(GRID.into());
    let scaled = &v.r * &g;
    let r = if up { scaled.ceil() } else { scaled.floor() } / g;
    // the rounded value is strictly outside r, so the infinitesimal is moot
    DRat::real(r)
}

/// Smallest value `>= lo`, as an index into `values`.
fn first_at_least(values: &[Rational], lo: &DRat) -> usize {
    values.partition_point(|v| DRat::real(v.clone()) < *lo)
}

/// Number of values `<= hi`.
fn count_at_most(values: &[Rational], hi: &DRat) -> usize {
    values.partition_point(|v| DRat::real(v.clone()) <= *hi)
}

impl<'a, 'n> Search<'a, 'n> {
    pub(crate) fn new(q: &'a Query<'n>, c: &'a Compiled, opts: &'a SolveOptions) -> Self {
        let mut lp = Simplex::new(c.ncols);
        let mut col_rows = vec![Vec::new(); c.ncols];
        for (r, (slack, key)) in c.rows.iter().enumerate() {
            lp.add_row(*slack, key);
            col_rows[*slack].push(r);
            for (col, _) in key {
                col_rows[*col].push(r);
            }
        }
        Search {
            q,
            c,
            opts,
            start: Instant::now(),
            lp,
            finite: vec![None; c.ncols],
            col_rows,
            dirty: Vec::new(),
            trail: Vec::new(),
            choice: vec![None; c.cases.len()],
            stats: SolveStats::default(),
            witness: None,
        }
    }

    pub(crate) fn run(&mut self) -> Result<Option<Witness>, VerifyError> {
        let base = self.c.base.clone();
        let ok = base.iter().all(|e| self.apply(e).is_ok());
        self.dirty = (0..self.c.ncols).collect();
        if ok && self.node()? {
            return Ok(self.witness.take());
        }
        Ok(None)
    }

    pub(crate) fn pivots(&self) -> u64 {
        self.lp.pivots
    }

    fn elapsed_check(&mut self) -> Result<(), VerifyError> {
        self.stats.nodes += 1;
        if let Some(max) = self.opts.max_splits {
            if self.stats.splits() > max {
                return Err(self.timeout());
            }
        }
        if let Some(limit) = self.opts.timeout {
            if self.start.elapsed() > limit {
                return Err(self.timeout());
            }
        }
        Ok(())
    }

    fn timeout(&mut self) -> VerifyError {
        self.stats.pivots = self.lp.pivots;
        self.stats.wall_time_s = self.start.elapsed().as_secs_f64();
        VerifyError::Timeout(self.stats.clone())
    }

    // ---- bound bookkeeping ----

    fn save_bounds(&mut self, col: usize) {
        let lo = self.lp.lower(col).cloned();
        let hi = self.lp.upper(col).cloned();
        self.trail.push(Trail::Bounds(col, lo, hi));
    }

    fn tighten_lower(&mut self, col: usize, mut v: DRat) -> Result<bool, Conflict> {
        if let Some(values) = self.finite[col].clone() {
            let i = first_at_least(&values, &v);
            if i == values.len() {
                return Err(Conflict);
            }
            v = DRat::real(values[i].clone());
        }
        if self.lp.lower(col).is_some_and(|lo| *lo >= v) {
            return Ok(false);
        }
        self.save_bounds(col);
        if !self.lp.assert_lower(col, v) {
            return Err(Conflict);
        }
        self.dirty.push(col);
        Ok(true)
    }

    fn tighten_upper(&mut self, col: usize, mut v: DRat) -> Result<bool, Conflict> {
        if let Some(values) = self.finite[col].clone() {
            let n = count_at_most(&values, &v);
            if n == 0 {
                return Err(Conflict);
            }
            v = DRat::real(values[n - 1].clone());
        }
        if self.lp.upper(col).is_some_and(|hi| *hi <= v) {
            return Ok(false);
        }
        self.save_bounds(col);
        if !self.lp.assert_upper(col, v) {
            return Err(Conflict);
        }
        self.dirty.push(col);
        Ok(true)
    }

    /// Bounds implied by propagation are only worth recording when they move
    /// noticeably; tiny steps let denominators grow without helping search.
    /// Dropping a bound is sound, keeping a conflict is required.
    fn derived_lower(&mut self, col: usize, v: DRat) -> Result<bool, Conflict> {
        if self.finite[col].is_none() {
            if self.lp.upper(col).is_some_and(|hi| v > *hi) {
                return Err(Conflict);
            }
            let v = coarsen(v, false);
            if let Some(lo) = self.lp.lower(col) {
                if negligible(&v.r - &lo.r, &lo.r) {
                    return Ok(false);
                }
            }
            return self.tighten_lower(col, v);
        }
        self.tighten_lower(col, v)
    }

    fn derived_upper(&mut self, col: usize, v: DRat) -> Result<bool, Conflict> {
        if self.finite[col].is_none() {
            if self.lp.lower(col).is_some_and(|lo| v < *lo) {
                return Err(Conflict);
            }
            let v = coarsen(v, true);
            if let Some(hi) = self.lp.upper(col) {
                if negligible(&hi.r - &v.r, &hi.r) {
                    return Ok(false);
                }
            }
            return self.tighten_upper(col, v);
        }
        self.tighten_upper(col, v)
    }

    fn apply(&mut self, e: &Effect) -> Result<(), Conflict> {
        match e {
            Effect::Lower(col, v) => self.tighten_lower(*col, v.clone()).map(|_| ()),
            Effect::Upper(col, v) => self.tighten_upper(*col, v.clone()).map(|_| ()),
            Effect::False => Err(Conflict),
            Effect::Member(col, values) => {
                let merged: Rc<Vec<Rational>> = match &self.finite[*col] {
                    Some(old) => Rc::new(old.iter().filter(|v| values.binary_search(v).is_ok()).cloned().collect()),
                    None => values.clone(),
                };
                if merged.is_empty() {
                    return Err(Conflict);
                }
                let old = self.finite[*col].replace(merged.clone());
                self.trail.push(Trail::Finite(*col, old));
                let lo = self.lp.lower(*col).cloned().unwrap_or_else(|| DRat::real(merged[0].clone()));
                let hi = self
                    .lp
                    .upper(*col)
                    .cloned()
                    .unwrap_or_else(|| DRat::real(merged[merged.len() - 1].clone()));
                self.tighten_lower(*col, lo)?;
                self.tighten_upper(*col, hi)?;
                Ok(())
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail entry") {
                Trail::Bounds(col, lo, hi) => self.lp.restore(col, lo, hi),
                Trail::Finite(col, old) => self.finite[col] = old,
                Trail::Choice(g) => self.choice[g] = None,
            }
        }
        self.dirty.clear();
    }

    // ---- propagation ----

    fn propagate_row(&mut self, r: usize) -> Result<(), Conflict> {
        let (slack, key) = &self.c.rows[r];
        let slack = *slack;
        // contribution bounds of each term
        let mut lo_sum = DRat::zero();
        let mut lo_inf = 0usize;
        let mut hi_sum = DRat::zero();
        let mut hi_inf = 0usize;
        let mut mins = Vec::with_capacity(key.len());
        let mut maxs = Vec::with_capacity(key.len());
        for (col, a) in key {
            let (lo, hi) = (self.lp.lower(*col), self.lp.upper(*col));
            let (mn, mx) = if a.is_positive() {
                (lo.map(|v| v.scale(a)), hi.map(|v| v.scale(a)))
            } else {
                (hi.map(|v| v.scale(a)), lo.map(|v| v.scale(a)))
            };
            match &mn {
                Some(v) => lo_sum += v,
                None => lo_inf += 1,
            }
            match &mx {
                Some(v) => hi_sum += v,
                None => hi_inf += 1,
            }
            mins.push(mn);
            maxs.push(mx);
        }
        if lo_inf == 0 {
            self.derived_lower(slack, lo_sum.clone())?;
        }
        if hi_inf == 0 {
            self.derived_upper(slack, hi_sum.clone())?;
        }
        let s_lo = self.lp.lower(slack).cloned();
        let s_hi = self.lp.upper(slack).cloned();
        for (i, (col, a)) in key.iter().enumerate() {
            // a·x >= s_lo - (max of the others)
            let rest_max = match &maxs[i] {
                Some(v) if hi_inf == 0 => Some(&hi_sum - v),
                None if hi_inf == 1 => Some(hi_sum.clone()),
                _ => None,
            };
            let rest_min = match &mins[i] {
                Some(v) if lo_inf == 0 => Some(&lo_sum - v),
                None if lo_inf == 1 => Some(lo_sum.clone()),
                _ => None,
            };
            let inv = a.recip();
            if let (Some(sl), Some(rm)) = (&s_lo, &rest_max) {
                let bound = (sl - rm).scale(&inv);
                if a.is_positive() {
                    self.derived_lower(*col, bound)?;
                } else {
                    self.derived_upper(*col, bound)?;
                }
            }
            if let (Some(sh), Some(rm)) = (&s_hi, &rest_min) {
                let bound = (sh - rm).scale(&inv);
                if a.is_positive() {
                    self.derived_upper(*col, bound)?;
                } else {
                    self.derived_lower(*col, bound)?;
                }
            }
        }
        Ok(())
    }

    fn pre_bounds(&self, relu: &Relu) -> (Option<DRat>, Option<DRat>) {
        let b = DRat::real(relu.b.clone());
        (
            self.lp.lower(relu.z).map(|v| v + &b),
            self.lp.upper(relu.z).map(|v| v + &b),
        )
    }

    fn set_active(&mut self, i: usize) -> Result<bool, Conflict> {
        let relu = self.c.relus[i].clone();
        let a = self.tighten_lower(relu.z, DRat::real(-relu.b.clone()))?;
        let b = self.tighten_upper(relu.d, DRat::real(relu.b.clone()))?;
        Ok(a || b)
    }

    fn set_inactive(&mut self, i: usize) -> Result<bool, Conflict> {
        let relu = self.c.relus[i].clone();
        let a = self.tighten_upper(relu.z, DRat::real(-relu.b.clone()))?;
        let b = self.tighten_upper(relu.y, DRat::zero())?;
        Ok(a || b)
    }

    fn is_active(&self, relu: &Relu) -> bool {
        self.lp.lower(relu.z).is_some_and(|v| *v >= DRat::real(-relu.b.clone()))
            && self.lp.upper(relu.d).is_some_and(|v| *v <= DRat::real(relu.b.clone()))
    }

    fn is_inactive(&self, relu: &Relu) -> bool {
        self.lp.upper(relu.z).is_some_and(|v| *v <= DRat::real(-relu.b.clone()))
            && self.lp.upper(relu.y).is_some_and(|v| *v <= DRat::zero())
    }

    fn propagate_relus(&mut self) -> Result<bool, Conflict> {
        let mut changed = false;
        for i in 0..self.c.relus.len() {
            let relu = self.c.relus[i].clone();
            let (plo, phi) = self.pre_bounds(&relu);
            if plo.as_ref().is_some_and(|v| *v >= DRat::zero())
                || self.lp.lower(relu.y).is_some_and(|v| *v > DRat::zero())
            {
                changed |= self.set_active(i)?;
            } else if phi.as_ref().is_some_and(|v| *v <= DRat::zero())
                || self.lp.upper(relu.y).is_some_and(|v| *v <= DRat::zero())
            {
                changed |= self.set_inactive(i)?;
            }
            if let Some(hi) = phi {
                let cap = if hi > DRat::zero() { hi } else { DRat::zero() };
                changed |= self.derived_upper(relu.y, cap)?;
            }
        }
        Ok(changed)
    }

    fn propagate(&mut self) -> Result<(), Conflict> {
        let budget = 4 * self.c.rows.len() + 50;
        let mut visits = 0usize;
        let mut queued = vec![false; self.c.rows.len()];
        let mut queue = VecDeque::new();
        loop {
            for col in std::mem::take(&mut self.dirty) {
                for &r in &self.col_rows[col] {
                    if !queued[r] {
                        queued[r] = true;
                        queue.push_back(r);
                    }
                }
            }
            if let Some(r) = queue.pop_front() {
                queued[r] = false;
                visits += 1;
                if visits > budget {
                    self.dirty.clear();
                    return Ok(());
                }
                self.propagate_row(r)?;
                continue;
            }
            if !self.propagate_relus()? && self.dirty.is_empty() {
                return Ok(());
            }
        }
    }

    // ---- relevance ----

    fn relevance(&self) -> (Vec<bool>, Vec<bool>) {
        let mut rel = vec![false; self.c.nvars];
        for &v in &self.c.global_vars {
            rel[v] = true;
        }
        for (g, choice) in self.choice.iter().enumerate() {
            if let Some(ci) = choice {
                for &v in &self.c.cases[g][*ci].vars {
                    rel[v] = true;
                }
            }
        }
        let mut net_rel = vec![false; self.c.nets.len()];
        loop {
            let mut changed = false;
            for (n, info) in self.c.nets.iter().enumerate() {
                if !net_rel[n] && info.computed.iter().any(|&v| rel[v]) {
                    net_rel[n] = true;
                    changed = true;
                    for &v in info.inputs.iter().chain(&info.computed) {
                        rel[v] = true;
                    }
                }
            }
            if !changed {
                return (rel, net_rel);
            }
        }
    }

    fn is_fixed(&self, col: usize) -> bool {
        matches!((self.lp.lower(col), self.lp.upper(col)), (Some(a), Some(b)) if a == b)
    }

    fn candidates(&self, col: usize) -> Vec<Rational> {
        let values = self.finite[col].as_ref().expect("finite column");
        let lo = self.lp.lower(col).cloned().unwrap_or_else(|| DRat::real(values[0].clone()));
        let hi = self.lp.upper(col).cloned().unwrap_or_else(|| DRat::real(values[values.len() - 1].clone()));
        let a = first_at_least(values, &lo);
        let b = count_at_most(values, &hi);
        if a >= b {
            Vec::new()
        } else {
            values[a..b].to_vec()
        }
    }

    // ---- search ----

    fn node(&mut self) -> Result<bool, VerifyError> {
        self.elapsed_check()?;
        if self.propagate().is_err() {
            return Ok(false);
        }
        let open = self.choice.iter().position(Option::is_none);
        // small finite leaves are settled by enumeration, which needs no LP
        let relevance = match open {
            Some(_) => None,
            None => {
                let (rel, net_rel) = self.relevance();
                if let Some(found) = self.fast_path(&rel)? {
                    return Ok(found);
                }
                Some((rel, net_rel))
            }
        };
        // disjunction nodes rely on propagation alone; the LP runs once the
        // case split is complete
        if open.is_none() {
            self.stats.lp_calls += 1;
            if !self.lp.check() {
                return Ok(false);
            }
        }
        if let Some(g) = open {
            for ci in 0..self.c.cases[g].len() {
                if self.c.cases[g][ci].infeasible {
                    continue;
                }
                self.stats.disjunction_branches += 1;
                let mark = self.trail.len();
                self.choice[g] = Some(ci);
                self.trail.push(Trail::Choice(g));
                let effects = self.c.cases[g][ci].effects.clone();
                if effects.iter().all(|e| self.apply(e).is_ok()) && self.node()? {
                    return Ok(true);
                }
                self.undo_to(mark);
            }
            return Ok(false);
        }
        let (rel, net_rel) = relevance.expect("all disjunctions decided");
        // membership branching
        let mut best: Option<(usize, Vec<Rational>)> = None;
        for col in 0..self.c.ncols {
            if self.finite[col].is_none() || self.is_fixed(col) {
                continue;
            }
            if col < self.c.nvars && !rel[col] {
                continue;
            }
            let cands = self.candidates(col);
            if best.as_ref().is_none_or(|(_, b)| cands.len() < b.len()) {
                best = Some((col, cands));
            }
        }
        if let Some((col, cands)) = best {
            for v in cands {
                self.stats.membership_branches += 1;
                let mark = self.trail.len();
                let ok = self.tighten_lower(col, DRat::real(v.clone())).is_ok()
                    && self.tighten_upper(col, DRat::real(v)).is_ok();
                if ok && self.node()? {
                    return Ok(true);
                }
                self.undo_to(mark);
            }
            return Ok(false);
        }
        // ReLU branching
        let pick = (0..self.c.relus.len()).find(|&i| {
            let relu = &self.c.relus[i];
            net_rel[relu.net] && !self.is_active(relu) && !self.is_inactive(relu)
        });
        if let Some(i) = pick {
            let relu = self.c.relus[i].clone();
            let pre = self.lp.value(relu.z).r.clone() + &relu.b;
            let order = if pre >= Rational::zero() { [true, false] } else { [false, true] };
            for active in order {
                self.stats.relu_splits += 1;
                let mark = self.trail.len();
                let ok = if active { self.set_active(i).is_ok() } else { self.set_inactive(i).is_ok() };
                if ok && self.node()? {
                    return Ok(true);
                }
                self.undo_to(mark);
            }
            return Ok(false);
        }
        let values = self.leaf_values(&rel);
        self.finish(values)
    }

    /// Concrete values for the query variables from the current LP point.
    fn leaf_values(&self, rel: &[bool]) -> Vec<Rational> {
        let mut delta = rational::one();
        for col in 0..self.c.ncols {
            let v = self.lp.value(col);
            if let Some(lo) = self.lp.lower(col) {
                delta = delta_bound(lo, v, delta);
            }
            if let Some(hi) = self.lp.upper(col) {
                delta = delta_bound(v, hi, delta);
            }
        }
        (0..self.c.nvars)
            .map(|v| {
                let x = self.lp.value(v).at(&delta);
                if rel[v] {
                    return x;
                }
                self.snap(v, x)
            })
            .collect()
    }

    /// Moves an unconstrained variable onto its declared domain.
    fn snap(&self, v: usize, x: Rational) -> Rational {
        match &self.c.domains[v] {
            Some(FeatureDomain::Finite(values)) => values
                .iter()
                .min_by(|a, b| (*a - &x).abs().cmp(&(*b - &x).abs()))
                .cloned()
                .expect("nonempty domain"),
            Some(FeatureDomain::Interval(lo, hi)) => rational::min(&rational::max(&x, lo), hi),
            None => x,
        }
    }

    fn recompute(&self, values: &mut [Rational]) {
        for copy in self.q.networks() {
            let input: Vec<Rational> = copy.inputs.iter().map(|v| values[v.0].clone()).collect();
            let Ok(trace) = copy.net.trace(&input) else { continue };
            let targets = copy.hidden.iter().chain(std::iter::once(&copy.outputs));
            for (layer_vals, vars) in trace.iter().zip(targets) {
                for (x, v) in layer_vals.iter().zip(vars) {
                    values[v.0] = x.clone();
                }
            }
        }
    }

    fn finish(&mut self, mut values: Vec<Rational>) -> Result<bool, VerifyError> {
        self.recompute(&mut values);
        match check_witness(self.q, &values) {
            Ok(()) => {
                self.witness = Some(Witness { values });
                Ok(true)
            }
            Err(e) => Err(VerifyError::Internal(format!("witness failed exact re-check: {e}"))),
        }
    }

    /// Exhaustive enumeration once every relevant free variable is finite
    /// and the remaining space is small.
    fn fast_path(&mut self, rel: &[bool]) -> Result<Option<bool>, VerifyError> {
        let mut free: Vec<(usize, Vec<Rational>)> = Vec::new();
        let mut product: u64 = 1;
        for v in 0..self.c.nvars {
            if !rel[v] || self.c.computed[v] || self.is_fixed(v) {
                continue;
            }
            if self.finite[v].is_none() {
                return Ok(None);
            }
            let cands = self.candidates(v);
            product = product.saturating_mul(cands.len() as u64);
            if product > self.opts.enum_threshold {
                return Ok(None);
            }
            free.push((v, cands));
        }
        if free.iter().any(|(_, c)| c.is_empty()) {
            return Ok(Some(false));
        }
        let mut base = self.leaf_values(rel);
        for v in 0..self.c.nvars {
            if rel[v] && !self.c.computed[v] && self.is_fixed(v) {
                let lo = self.lp.lower(v).expect("fixed");
                if !lo.is_real() {
                    return Ok(None);
                }
                base[v] = lo.r.clone();
            }
        }
        let mut idx = vec![0usize; free.len()];
        loop {
            self.elapsed_check()?;
            self.stats.enumerated_points += 1;
            let mut values = base.clone();
            for (j, (v, cands)) in free.iter().enumerate() {
                values[*v] = cands[idx[j]].clone();
            }
            self.recompute(&mut values);
            if check_witness(self.q, &values).is_ok() {
                self.witness = Some(Witness { values });
                return Ok(Some(true));
            }
            // odometer, last variable fastest
            let mut j = free.len();
            loop {
                if j == 0 {
                    return Ok(Some(false));
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
}
