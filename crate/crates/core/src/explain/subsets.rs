//! Subsets in ascending cardinality, lexicographic within a cardinality.

use std::collections::BTreeSet;

pub struct Subsets<'a, T> {
    items: &'a [T],
    idx: Vec<usize>,
    size: usize,
    max: usize,
    done: bool,
}

/// All subsets of `items` with `min..=max` elements.
pub fn subsets<T>(items: &[T], min: usize, max: usize) -> Subsets<'_, T> {
    let max = max.min(items.len());
    Subsets { items, idx: (0..min).collect(), size: min, max, done: min > max }
}

impl<T: Clone + Ord> Iterator for Subsets<'_, T> {
    type Item = BTreeSet<T>;

    fn next(&mut self) -> Option<BTreeSet<T>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.items[i].clone()).collect();
        let n = self.items.len();
        let k = self.size;
        let mut advanced = false;
        for i in (0..k).rev() {
            if self.idx[i] < n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            self.size += 1;
            self.idx = (0..self.size).collect();
            self.done = self.size > self.max;
        }
        Some(out)
    }
}
