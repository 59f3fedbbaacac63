//! Exact minimum hitting sets by branch and bound.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MhsError {
    #[error("family member {0} is empty and cannot be hit")]
    EmptyMember(usize),
}

/// A smallest set meeting every member of `family`.
///
/// Branches on the elements of the smallest unhit member, most frequent
/// first; ties go to the smaller element, so the answer is deterministic.
/// The bound is a greedy packing of pairwise disjoint unhit members.
pub fn minimum_hitting_set<T: Ord + Clone>(family: &[BTreeSet<T>]) -> Result<BTreeSet<T>, MhsError> {
    if let Some(i) = family.iter().position(BTreeSet::is_empty) {
        return Err(MhsError::EmptyMember(i));
    }
    let sets = reduce(family);
    let mut best = greedy(&sets);
    let mut chosen = BTreeSet::new();
    branch(&sets, &mut chosen, &mut best);
    Ok(best)
}

/// Drops duplicates and members that contain another member.
fn reduce<T: Ord + Clone>(family: &[BTreeSet<T>]) -> Vec<BTreeSet<T>> {
    let mut sorted: Vec<&BTreeSet<T>> = family.iter().collect();
    sorted.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sorted.dedup();
    let mut out: Vec<BTreeSet<T>> = Vec::new();
    for s in sorted {
        if !out.iter().any(|m| m.is_subset(s)) {
            out.push(s.clone());
        }
    }
    out
}

fn frequencies<'a, T: Ord>(sets: impl Iterator<Item = &'a BTreeSet<T>>) -> BTreeMap<&'a T, usize> {
    let mut freq = BTreeMap::new();
    for s in sets {
        for e in s {
            *freq.entry(e).or_insert(0) += 1;
        }
    }
    freq
}

fn greedy<T: Ord + Clone>(sets: &[BTreeSet<T>]) -> BTreeSet<T> {
    let mut hit = BTreeSet::new();
    loop {
        let open = sets.iter().filter(|s| s.is_disjoint(&hit));
        let freq = frequencies(open);
        // max_by_key keeps the last maximum; iterate in reverse so the
        // smallest element wins ties
        let Some((e, _)) = freq.iter().rev().max_by_key(|(_, n)| **n) else {
            return hit;
        };
        hit.insert((*e).clone());
    }
}

fn lower_bound<T: Ord>(open: &[&BTreeSet<T>]) -> usize {
    let mut used: BTreeSet<&T> = BTreeSet::new();
    let mut count = 0;
    for s in open {
        if s.iter().all(|e| !used.contains(e)) {
            used.extend(s.iter());
            count += 1;
        }
    }
    count
}

fn branch<T: Ord + Clone>(sets: &[BTreeSet<T>], chosen: &mut BTreeSet<T>, best: &mut BTreeSet<T>) {
    let open: Vec<&BTreeSet<T>> = sets.iter().filter(|s| s.is_disjoint(chosen)).collect();
    if open.is_empty() {
        if chosen.len() < best.len() {
            *best = chosen.clone();
        }
        return;
    }
    if chosen.len() + lower_bound(&open) >= best.len() {
        return;
    }
    let pivot = open.iter().min_by_key(|s| s.len()).expect("nonempty");
    let freq = frequencies(open.iter().copied());
    let mut order: Vec<&T> = pivot.iter().collect();
    order.sort_by(|a, b| freq[b].cmp(&freq[a]).then_with(|| a.cmp(b)));
    for e in order {
        chosen.insert(e.clone());
        branch(sets, chosen, best);
        chosen.remove(e);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(items: &[u32]) -> BTreeSet<u32> {
        items.iter().copied().collect()
    }

    #[test]
    fn small_families() {
        assert_eq!(minimum_hitting_set(&[s(&[1]), s(&[2])]).unwrap(), s(&[1, 2]));
        assert_eq!(minimum_hitting_set(&[s(&[1, 2]), s(&[2, 3])]).unwrap(), s(&[2]));
        assert_eq!(minimum_hitting_set::<u32>(&[]).unwrap(), s(&[]));
        assert_eq!(minimum_hitting_set(&[s(&[1]), s(&[])]), Err(MhsError::EmptyMember(1)));
    }

    #[test]
    fn greedy_is_not_optimal_here() {
        // greedy picks 1 first and needs three elements; optimum is {2, 3}
        let fam = [s(&[1, 2]), s(&[1, 3]), s(&[2, 4]), s(&[3, 5]), s(&[2, 6]), s(&[3, 7])];
        assert_eq!(minimum_hitting_set(&fam).unwrap(), s(&[2, 3]));
    }
}
