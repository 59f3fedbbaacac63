use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{MaskRole, StepMask};

/// Minimal multi-step contrastive examples. No member contains another.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CxpCatalog {
    pub members: Vec<StepMask>,
    /// Candidates never dispatched because they contain a member.
    #[serde(default)]
    pub skipped: u64,
    /// Members dropped when a smaller example arrived.
    #[serde(default)]
    pub discarded: u64,
    /// Members recovered from counterexamples to a hitting set.
    #[serde(default)]
    pub completions: u64,
}

impl CxpCatalog {
    pub fn new() -> Self {
        CxpCatalog::default()
    }

    pub fn from_masks(masks: impl IntoIterator<Item = StepMask>) -> Self {
        let mut c = CxpCatalog::new();
        for m in masks {
            c.insert(m);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Does some member sit inside `mask` (stepwise)?
    pub fn covers(&self, mask: &StepMask) -> bool {
        self.members.iter().any(|c| c.is_subset_of(mask))
    }

    /// Adds `mask` unless a member is contained in it; drops members that
    /// contain it. Returns whether it was added.
    pub fn insert(&mut self, mask: StepMask) -> bool {
        let mask = mask.with_role(MaskRole::Contrastive);
        if self.covers(&mask) {
            return false;
        }
        let before = self.members.len();
        self.members.retain(|c| !mask.is_subset_of(c));
        self.discarded += (before - self.members.len()) as u64;
        self.members.push(mask);
        self.members.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
        true
    }

    /// Does the pinned set meet every member?
    pub fn is_hit_by(&self, pinned: &StepMask) -> bool {
        self.members.iter().all(|c| c.intersects(pinned))
    }

    /// Members as sets of `(step, feature)` pairs.
    pub fn pair_sets(&self) -> Vec<BTreeSet<(usize, usize)>> {
        self.members.iter().map(|c| c.pairs().collect()).collect()
    }
}
