//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use kxp_core::envs::gridworld::{self, GridWorldSpec};
use kxp_core::envs::random::{random_instance, Instance, RandomParams};
use kxp_core::envs::turtlebot::{self, TurtleBotSpec};
use kxp_core::model::{Atom, MaskRole, StateRef, StepMask};
use kxp_core::oracle::{deviation_witnesses, oracle_is_explanation, oracle_minimum_explanation, DEFAULT_CAP};
use kxp_core::rational::{frac, int, Rational};
use kxp_core::{ReactiveSystem, Semantics};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEM: Semantics = Semantics::Weak;

/// `count` random binary instances from a fixed seed.
pub fn random_instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = RandomParams::default();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if let Some(inst) = random_instance(&mut rng, &params) {
            out.push(inst);
        }
    }
    out
}

pub fn all_pairs(k: usize, m: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (0..m).map(move |f| (i, f))).collect()
}

/// A random explanation: the oracle minimum plus random extra pairs.
pub fn random_explanation<R: Rng>(rng: &mut R, inst: &Instance) -> StepMask {
    let (k, m) = (inst.exec.len(), inst.sys.feature_count());
    let mut mask = oracle_minimum_explanation(&inst.sys, &inst.net, &inst.exec, SEM, DEFAULT_CAP).expect("finite");
    for (i, f) in all_pairs(k, m) {
        if rng.random_bool(0.5) {
            mask.steps[i].insert(f);
        }
    }
    mask
}

fn random_subset<R: Rng>(rng: &mut R, set: &BTreeSet<usize>) -> BTreeSet<usize> {
    set.iter().copied().filter(|_| rng.random_bool(0.5)).collect()
}

/// Removing features from step `i` of an explanation never lets an
/// earlier action change. Returns a description of the first violation.
pub fn prefix_kept<R: Rng>(rng: &mut R, inst: &Instance) -> Result<(), String> {
    let k = inst.exec.len();
    let e = random_explanation(rng, inst);
    let i = rng.random_range(0..k);
    let mut weakened = e.clone();
    let removed = random_subset(rng, &e.steps[i]);
    weakened.steps[i] = &e.steps[i] - &removed;
    let ws = deviation_witnesses(&inst.sys, &inst.net, &inst.exec, &weakened, SEM, DEFAULT_CAP).expect("finite");
    match ws.iter().find(|w| w.step < i) {
        Some(w) => Err(format!("mask {weakened}: action {} changed after weakening step {i}", w.step)),
        None => Ok(()),
    }
}

/// With every later step fully pinned, any deviation after weakening step
/// `i` happens exactly at `i`.
pub fn first_change<R: Rng>(rng: &mut R, inst: &Instance) -> Result<(), String> {
    let (k, m) = (inst.exec.len(), inst.sys.feature_count());
    let mut e = random_explanation(rng, inst);
    let i = rng.random_range(0..k);
    for j in i + 1..k {
        e.steps[j] = (0..m).collect();
    }
    let removed = random_subset(rng, &e.steps[i]);
    e.steps[i] = &e.steps[i] - &removed;
    let ws = deviation_witnesses(&inst.sys, &inst.net, &inst.exec, &e, SEM, DEFAULT_CAP).expect("finite");
    match ws.iter().find(|w| w.step != i) {
        Some(w) => Err(format!("mask {e}: first change at {} instead of {i}", w.step)),
        None => Ok(()),
    }
}

/// Shape of a minimal contrastive example relative to its first flippable
/// step: nonempty there, empty afterwards, contiguous before.
pub fn cxp_shape(inst: &Instance, c: &StepMask) -> Result<(), String> {
    let ws = deviation_witnesses(&inst.sys, &inst.net, &inst.exec, c, SEM, DEFAULT_CAP).expect("finite");
    let Some(i) = ws.iter().map(|w| w.step).min() else {
        return Err(format!("{c} changes no action"));
    };
    if c.steps[i].is_empty() {
        return Err(format!("{c}: empty at first flippable step {i}"));
    }
    if c.steps[i + 1..].iter().any(|s| !s.is_empty()) {
        return Err(format!("{c}: nonempty after step {i}"));
    }
    let first = c.steps.iter().position(|s| !s.is_empty()).expect("nonempty at i");
    if c.steps[first..=i].iter().any(|s| s.is_empty()) {
        return Err(format!("{c}: gap between steps {first} and {i}"));
    }
    Ok(())
}

/// Is the oracle convinced that `mask` is an explanation?
pub fn oracle_explains(inst: &Instance, mask: &StepMask) -> bool {
    oracle_is_explanation(&inst.sys, &inst.net, &inst.exec, mask, SEM, DEFAULT_CAP).expect("finite")
}

/// Random family of nonempty subsets of `0..universe`.
pub fn random_family<R: Rng>(rng: &mut R, universe: usize) -> Vec<BTreeSet<usize>> {
    let members = rng.random_range(0..=10);
    (0..members)
        .map(|_| {
            let size = rng.random_range(1..=universe.min(4));
            let pool: Vec<usize> = (0..universe).collect();
            pool.choose_multiple(rng, size).copied().collect()
        })
        .collect()
}

/// Smallest hitting set size by trying every subset.
pub fn brute_force_mhs(family: &[BTreeSet<usize>], universe: usize) -> usize {
    (0u32..1 << universe)
        .filter(|bits| family.iter().all(|s| s.iter().any(|&e| bits >> e & 1 == 1)))
        .map(|bits| bits.count_ones() as usize)
        .min()
        .expect("the full universe hits everything")
}

/// One checklist entry: `(s, a, s')` restricted to the atoms of one family
/// must evaluate as expected.
pub struct Check {
    pub family: &'static str,
    pub action: usize,
    pub cur: Vec<Rational>,
    pub next: Vec<Rational>,
    pub holds: bool,
}

fn family_holds(sys: &ReactiveSystem, c: &Check) -> bool {
    sys.transition(c.action).atoms.iter().filter(|a| a.label.as_deref() == Some(c.family)).all(|a: &Atom<StateRef>| {
        a.holds(|r| match r {
            StateRef::Cur(f) => c.cur[*f].clone(),
            StateRef::Next(f) => c.next[*f].clone(),
        })
    })
}

fn label_counts(sys: &ReactiveSystem, action: usize, families: &[&str]) -> Vec<usize> {
    families
        .iter()
        .map(|fam| sys.transition(action).atoms.iter().filter(|a| a.label.as_deref() == Some(*fam)).count())
        .collect()
}

/// Every transition atom carries a known family label and each family has
/// the expected number of atoms for every action; then each family accepts
/// and rejects hand-picked transitions. Returns the failures.
pub fn transcription_checklist() -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let mut checked = 0;

    let spec = GridWorldSpec::small();
    let sys = gridworld::gridworld_system(&spec);
    for a in 0..4 {
        checked += 1;
        let counts = label_counts(&sys, a, &gridworld::FAMILIES);
        if counts != [1, 1, 2, 2, 1, 2, 1] {
            failures.push(format!("gridworld {}: family atom counts {counts:?}", gridworld::ACTION_NAMES[a]));
        }
        if counts.iter().sum::<usize>() != sys.transition(a).atoms.len() {
            failures.push(format!("gridworld {}: unlabelled atoms", gridworld::ACTION_NAMES[a]));
        }
    }
    for c in gridworld_checks(&spec) {
        checked += 1;
        if family_holds(&sys, &c) != c.holds {
            failures.push(format!(
                "gridworld {} {}: expected holds={} for {:?} -> {:?}",
                gridworld::ACTION_NAMES[c.action],
                c.family,
                c.holds,
                c.cur,
                c.next
            ));
        }
    }

    let sys = turtlebot::turtlebot_system();
    for a in [turtlebot::LEFT, turtlebot::RIGHT] {
        checked += 1;
        let counts = label_counts(&sys, a, &turtlebot::FAMILIES);
        if counts != [14, 2, 2, 6, 1, 1] {
            failures.push(format!("turtlebot {}: family atom counts {counts:?}", turtlebot::ACTION_NAMES[a]));
        }
        if counts.iter().sum::<usize>() != sys.transition(a).atoms.len() {
            failures.push(format!("turtlebot {}: unlabelled atoms", turtlebot::ACTION_NAMES[a]));
        }
    }
    for c in turtlebot_checks() {
        checked += 1;
        if family_holds(&sys, &c) != c.holds {
            failures.push(format!(
                "turtlebot {} {}: expected holds={}",
                turtlebot::ACTION_NAMES[c.action],
                c.family,
                c.holds
            ));
        }
    }
    (checked, failures)
}

fn gridworld_checks(spec: &GridWorldSpec) -> Vec<Check> {
    let u = spec.unit();
    let half = frac(1, 2);
    let base = |x: i64, y: i64| -> Vec<Rational> {
        let mut s = vec![frac(x, 4), frac(y, 4), frac(4, 4), frac(4, 4)];
        s.extend(vec![int(0); 4]);
        s
    };
    let mut out = Vec::new();
    let fam = &gridworld::FAMILIES;
    for a in 0..4 {
        let (ax, sign) = match a {
            gridworld::UP => (1, 1),
            gridworld::DOWN => (1, -1),
            gridworld::LEFT => (0, -1),
            _ => (0, 1),
        };
        let orth = 1 - ax;
        let same = 4 + a;
        let opp = 4 + [1, 0, 3, 2][a];
        let cur = base(2, 2);
        let moved = |delta: i64| {
            let mut n = cur.clone();
            n[ax] = &n[ax] + &u * int(delta);
            n
        };
        let mut push = |family: &'static str, next: Vec<Rational>, holds: bool| {
            out.push(Check { family, action: a, cur: cur.clone(), next, holds });
        };
        push(fam[0], moved(sign), true);
        push(fam[0], moved(0), false);
        push(fam[0], moved(-sign), false);
        push(fam[1], moved(sign), true);
        let mut n = moved(sign);
        n[orth] = &n[orth] + &u;
        push(fam[1], n, false);
        for t in [2, 3] {
            let mut n = moved(sign);
            n[t] = &n[t] - &u;
            push(fam[2], n, false);
        }
        push(fam[2], moved(sign), true);
        let from = |f: usize, before: Rational, after: Rational| {
            let mut c = cur.clone();
            c[f] = before;
            let mut n = cur.clone();
            n[f] = after;
            (c, n)
        };
        // sensor in the direction of motion: may grow by at most 1/2
        for (b, n_, fam_i, holds) in [
            (int(0), half.clone(), 3, true),
            (half.clone(), int(0), 3, false),
            (int(0), int(1), 3, false),
            (int(0), half.clone(), 4, true),
            (half.clone(), int(1), 4, false),
            (half.clone(), int(0), 5, true),
            (int(0), half.clone(), 5, false),
            (int(1), int(0), 5, false),
            (half.clone(), int(0), 6, true),
            (int(1), int(1), 6, false),
        ] {
            let f = if fam_i <= 4 { same } else { opp };
            let (c, n) = from(f, b, n_);
            out.push(Check { family: fam[fam_i], action: a, cur: c, next: n, holds });
        }
    }
    out
}

fn turtlebot_checks() -> Vec<Check> {
    let spec = TurtleBotSpec::default();
    let fam = &turtlebot::FAMILIES;
    let mut out = Vec::new();
    for a in [turtlebot::LEFT, turtlebot::RIGHT] {
        let cur = spec.state(6);
        let next = turtlebot::turtlebot_step(&spec, &cur, a).expect("turn inside [0, 1]");
        for f in fam.iter() {
            out.push(Check { family: f, action: a, cur: cur.clone(), next: next.clone(), holds: true });
        }
        let tweak = |f: usize, v: Rational, on_cur: bool| {
            let (mut c, mut n) = (cur.clone(), next.clone());
            if on_cur {
                c[f] = v;
            } else {
                n[f] = v;
            }
            (c, n)
        };
        for (fi, f, v, on_cur) in [
            (0, 3, frac(1, 10), true),
            (1, 8, frac(1, 10), true),
            (2, 7, frac(11, 10), true),
            (3, if a == turtlebot::RIGHT { 2 } else { 4 }, frac(1, 3), false),
            (4, 7, frac(1, 2), false),
            (5, 8, frac(3, 5), false),
        ] {
            let (c, n) = tweak(f, v, on_cur);
            out.push(Check { family: fam[fi], action: a, cur: c, next: n, holds: false });
        }
    }
    out
}

/// Applies RIGHT twelve times from angle 1 and returns the change in x7,
/// failing if any step violates the encoded transition relation.
pub fn twelve_right_turns() -> Result<Rational, String> {
    let spec = TurtleBotSpec::default();
    let sys = turtlebot::turtlebot_system();
    let start = spec.state(12);
    let mut s = start.clone();
    for t in 0..12 {
        let n = turtlebot::turtlebot_step(&spec, &s, turtlebot::RIGHT).map_err(|e| format!("turn {t}: {e}"))?;
        if let Some((idx, atom)) = sys.transition_violation(&s, turtlebot::RIGHT, &n) {
            return Err(format!("turn {t}: atom {idx} ({:?}) violated", atom.label));
        }
        s = n;
    }
    Ok(&s[7] - &start[7])
}

pub fn explanation_mask(k: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> StepMask {
    StepMask::from_pairs(MaskRole::Explanation, k, pairs)
}
