use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskRole {
    /// Features fixed to their recorded values.
    Explanation,
    /// Features freed to range over their domains.
    Contrastive,
}

/// One feature subset per execution step.
///
/// An explanation mask lists the pinned features of every step; a contrastive
/// mask lists the freed ones. Steps are 0-based in the API.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StepMask {
    pub role: MaskRole,
    pub steps: Vec<BTreeSet<usize>>,
}

impl StepMask {
    pub fn new(role: MaskRole, steps: Vec<BTreeSet<usize>>) -> Self {
        StepMask { role, steps }
    }

    pub fn empty(role: MaskRole, k: usize) -> Self {
        StepMask { role, steps: vec![BTreeSet::new(); k] }
    }

    pub fn full(role: MaskRole, k: usize, m: usize) -> Self {
        StepMask { role, steps: vec![(0..m).collect(); k] }
    }

    /// Builds a mask from explicit `(step, feature)` pairs.
    pub fn from_pairs(role: MaskRole, k: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut mask = StepMask::empty(role, k);
        for (s, f) in pairs {
            mask.steps[s].insert(f);
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Total number of selected features across steps.
    pub fn size(&self) -> usize {
        self.steps.iter().map(BTreeSet::len).sum()
    }

    pub fn is_all_empty(&self) -> bool {
        self.steps.iter().all(BTreeSet::is_empty)
    }

    pub fn contains(&self, step: usize, feature: usize) -> bool {
        self.steps[step].contains(&feature)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.steps
            .iter()
            .enumerate()
            .flat_map(|(s, set)| set.iter().map(move |&f| (s, f)))
    }

    /// Stepwise complement within `m` features, with the opposite role.
    pub fn complement(&self, m: usize) -> StepMask {
        let role = match self.role {
            MaskRole::Explanation => MaskRole::Contrastive,
            MaskRole::Contrastive => MaskRole::Explanation,
        };
        StepMask {
            role,
            steps: self
                .steps
                .iter()
                .map(|set| (0..m).filter(|f| !set.contains(f)).collect())
                .collect(),
        }
    }

    /// Stepwise inclusion, ignoring roles.
    pub fn is_subset_of(&self, other: &StepMask) -> bool {
        self.steps.len() == other.steps.len()
            && self.steps.iter().zip(&other.steps).all(|(a, b)| a.is_subset(b))
    }

    pub fn intersects(&self, other: &StepMask) -> bool {
        self.steps
            .iter()
            .zip(&other.steps)
            .any(|(a, b)| !a.is_disjoint(b))
    }

    pub fn without(&self, step: usize, feature: usize) -> StepMask {
        let mut out = self.clone();
        out.steps[step].remove(&feature);
        out
    }

    pub fn with_role(mut self, role: MaskRole) -> StepMask {
        self.role = role;
        self
    }

    pub fn validate(&self, k: usize, m: usize) -> Result<(), ModelError> {
        if self.steps.len() != k {
            return Err(ModelError::MaskLength { expected: k, found: self.steps.len() });
        }
        for (s, set) in self.steps.iter().enumerate() {
            if let Some(&f) = set.iter().find(|&&f| f >= m) {
                return Err(ModelError::MaskFeature { step: s, feature: f, features: m });
            }
        }
        Ok(())
    }
}

impl fmt::Display for StepMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, set) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if set.is_empty() {
                write!(f, "∅")?;
            } else {
                let items: Vec<String> = set.iter().map(usize::to_string).collect();
                write!(f, "{{{}}}", items.join(","))?;
            }
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_and_size() {
        let e = StepMask::from_pairs(MaskRole::Explanation, 2, [(0, 2)]);
        assert_eq!(e.size(), 1);
        let c = e.complement(3);
        assert_eq!(c.role, MaskRole::Contrastive);
        assert_eq!(c.size(), 5);
        assert_eq!(c.complement(3), e);
        assert_eq!(e.to_string(), "({2}, ∅)");
    }

    #[test]
    fn subset_is_stepwise() {
        let a = StepMask::from_pairs(MaskRole::Contrastive, 2, [(1, 0)]);
        let b = StepMask::from_pairs(MaskRole::Contrastive, 2, [(1, 0), (0, 1)]);
        let c = StepMask::from_pairs(MaskRole::Contrastive, 2, [(0, 0)]);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        assert!(!a.is_subset_of(&c));
        assert!(!a.intersects(&c));
    }

    #[test]
    fn validation() {
        let e = StepMask::from_pairs(MaskRole::Explanation, 2, [(1, 3)]);
        assert!(e.validate(2, 4).is_ok());
        assert!(matches!(e.validate(2, 3), Err(ModelError::MaskFeature { .. })));
        assert!(matches!(e.validate(3, 4), Err(ModelError::MaskLength { .. })));
    }
}
