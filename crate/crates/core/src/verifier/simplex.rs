//! Exact bounded-variable simplex for feasibility checks.
//!
//! Every constraint is a row `slack = Σ a·x` with bounds on the slack column;
//! the tableau never changes shape after construction, only bounds do. Bound
//! changes are cheap to undo, which is what the branching search needs.
//! Pivoting follows Bland's rule (smallest column index first), so the
//! procedure terminates and is deterministic.

use num_traits::{One, Signed, Zero};

use super::delta::DRat;
use crate::rational::Rational;

#[derive(Debug, Clone)]
struct Row {
    basic: usize,
    /// Sorted by column; nonbasic columns only.
    coeffs: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    rows: Vec<Row>,
    basic_row: Vec<Option<usize>>,
    lower: Vec<Option<DRat>>,
    upper: Vec<Option<DRat>>,
    value: Vec<DRat>,
    pub pivots: u64,
}

fn coeff_of(coeffs: &[(usize, Rational)], col: usize) -> Option<&Rational> {
    coeffs
        .binary_search_by_key(&col, |(c, _)| *c)
        .ok()
        .map(|i| &coeffs[i].1)
}

/// `a + factor·b` over sparse sorted vectors, dropping zeros.
fn axpy(a: &[(usize, Rational)], factor: &Rational, b: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, factor * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + factor * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl Simplex {
    pub fn new(columns: usize) -> Self {
        Simplex {
            rows: Vec::new(),
            basic_row: vec![None; columns],
            lower: vec![None; columns],
            upper: vec![None; columns],
            value: vec![DRat::zero(); columns],
            pivots: 0,
        }
    }

    /// Adds `slack = Σ a·x`. Must be called before any bound is asserted.
    pub fn add_row(&mut self, slack: usize, expr: &[(usize, Rational)]) {
        assert!(self.basic_row[slack].is_none(), "slack already basic");
        let mut coeffs: Vec<(usize, Rational)> = Vec::new();
        let mut sorted = expr.to_vec();
        sorted.sort_by_key(|(c, _)| *c);
        for (c, a) in sorted {
            if a.is_zero() {
                continue;
            }
            match self.basic_row[c] {
                Some(r) => {
                    let sub = self.rows[r].coeffs.clone();
                    coeffs = axpy(&coeffs, &a, &sub);
                }
                None => coeffs = axpy(&coeffs, &Rational::one(), &[(c, a)]),
            }
        }
        let mut v = DRat::zero();
        for (c, a) in &coeffs {
            v += &self.value[*c].scale(a);
        }
        self.value[slack] = v;
        self.basic_row[slack] = Some(self.rows.len());
        self.rows.push(Row { basic: slack, coeffs });
    }

    pub fn lower(&self, col: usize) -> Option<&DRat> {
        self.lower[col].as_ref()
    }

    pub fn upper(&self, col: usize) -> Option<&DRat> {
        self.upper[col].as_ref()
    }

    pub fn value(&self, col: usize) -> &DRat {
        &self.value[col]
    }

    /// Tightens the lower bound. Returns `false` on an immediate conflict.
    pub fn assert_lower(&mut self, col: usize, v: DRat) -> bool {
        if let Some(lo) = &self.lower[col] {
            if *lo >= v {
                return true;
            }
        }
        if let Some(hi) = &self.upper[col] {
            if v > *hi {
                return false;
            }
        }
        if self.basic_row[col].is_none() && self.value[col] < v {
            self.update(col, v.clone());
        }
        self.lower[col] = Some(v);
        true
    }

    pub fn assert_upper(&mut self, col: usize, v: DRat) -> bool {
        if let Some(hi) = &self.upper[col] {
            if *hi <= v {
                return true;
            }
        }
        if let Some(lo) = &self.lower[col] {
            if v < *lo {
                return false;
            }
        }
        if self.basic_row[col].is_none() && self.value[col] > v {
            self.update(col, v.clone());
        }
        self.upper[col] = Some(v);
        true
    }

    /// Restores bounds saved before a tightening. Loosening never breaks the
    /// current assignment of nonbasic columns.
    pub fn restore(&mut self, col: usize, lower: Option<DRat>, upper: Option<DRat>) {
        self.lower[col] = lower;
        self.upper[col] = upper;
    }

    fn update(&mut self, col: usize, v: DRat) {
        let diff = &v - &self.value[col];
        for row in &self.rows {
            if let Some(a) = coeff_of(&row.coeffs, col) {
                let delta = diff.scale(a);
                self.value[row.basic] += &delta;
            }
        }
        self.value[col] = v;
    }

    fn pivot_and_update(&mut self, r: usize, entering: usize, target: DRat) {
        let leaving = self.rows[r].basic;
        let a = coeff_of(&self.rows[r].coeffs, entering).expect("entering column in row").clone();
        let theta = (&target - &self.value[leaving]).scale(&a.recip());
        self.value[leaving] = target;
        self.value[entering] += &theta;
        for (i, row) in self.rows.iter().enumerate() {
            if i == r {
                continue;
            }
            if let Some(c) = coeff_of(&row.coeffs, entering) {
                let delta = theta.scale(c);
                self.value[row.basic] += &delta;
            }
        }
        self.pivot(r, entering);
    }

    fn pivot(&mut self, r: usize, entering: usize) {
        self.pivots += 1;
        let leaving = self.rows[r].basic;
        let row = std::mem::take(&mut self.rows[r].coeffs);
        let a = coeff_of(&row, entering).expect("entering column in row").clone();
        let inv = a.recip();
        // entering = inv·leaving − Σ_{k≠entering} (t_k/a)·x_k
        let mut new_coeffs: Vec<(usize, Rational)> = row
            .iter()
            .filter(|(c, _)| *c != entering)
            .map(|(c, t)| (*c, -(t * &inv)))
            .collect();
        let pos = new_coeffs.partition_point(|(c, _)| *c < leaving);
        new_coeffs.insert(pos, (leaving, inv));
        for (i, other) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            if let Some(c) = coeff_of(&other.coeffs, entering).cloned() {
                let without: Vec<(usize, Rational)> =
                    other.coeffs.iter().filter(|(col, _)| *col != entering).cloned().collect();
                other.coeffs = axpy(&without, &c, &new_coeffs);
            }
        }
        self.rows[r] = Row { basic: entering, coeffs: new_coeffs };
        self.basic_row[leaving] = None;
        self.basic_row[entering] = Some(r);
    }

    fn below_lower(&self, col: usize) -> bool {
        matches!(&self.lower[col], Some(lo) if self.value[col] < *lo)
    }

    fn above_upper(&self, col: usize) -> bool {
        matches!(&self.upper[col], Some(hi) if self.value[col] > *hi)
    }

    /// Restores feasibility of all basic columns. Returns `false` when the
    /// current bounds admit no solution.
    pub fn check(&mut self) -> bool {
        loop {
            let mut violated: Option<(usize, usize)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let b = row.basic;
                if (self.below_lower(b) || self.above_upper(b)) && violated.is_none_or(|(_, vb)| b < vb) {
                    violated = Some((r, b));
                }
            }
            let Some((r, b)) = violated else {
                return true;
            };
            let increase = self.below_lower(b);
            let entering = self.rows[r].coeffs.iter().find(|(c, a)| {
                let can_up = self.upper[*c].as_ref().is_none_or(|hi| self.value[*c] < *hi);
                let can_down = self.lower[*c].as_ref().is_none_or(|lo| self.value[*c] > *lo);
                if increase == a.is_positive() {
                    can_up
                } else {
                    can_down
                }
            });
            let Some(entering) = entering.map(|(c, _)| *c) else {
                return false;
            };
            let target = if increase {
                self.lower[b].clone().expect("violated lower bound")
            } else {
                self.upper[b].clone().expect("violated upper bound")
            };
            self.pivot_and_update(r, entering, target);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn real(v: i64) -> DRat {
        DRat::real(int(v))
    }

    #[test]
    fn empty_box_is_infeasible() {
        let mut s = Simplex::new(1);
        assert!(s.assert_lower(0, real(1)));
        assert!(!s.assert_upper(0, real(0)));
    }

    #[test]
    fn finds_point_in_triangle() {
        // x, y >= 0, x + y <= 1, x - y >= 1/2
        let mut s = Simplex::new(4);
        s.add_row(2, &[(0, int(1)), (1, int(1))]);
        s.add_row(3, &[(0, int(1)), (1, int(-1))]);
        assert!(s.assert_lower(0, real(0)));
        assert!(s.assert_lower(1, real(0)));
        assert!(s.assert_upper(2, real(1)));
        assert!(s.assert_lower(3, DRat::real(frac(1, 2))));
        assert!(s.check());
        let x = s.value(0).r.clone();
        let y = s.value(1).r.clone();
        assert!(&x + &y <= int(1));
        assert!(&x - &y >= frac(1, 2));
        assert!(y >= int(0));
        // tighten into infeasibility: x - y >= 2
        let saved = (s.lower(3).cloned(), s.upper(3).cloned());
        assert!(s.assert_lower(3, real(2)));
        assert!(!s.check());
        s.restore(3, saved.0, saved.1);
        assert!(s.check());
    }

    #[test]
    fn strict_bounds_use_delta() {
        // x > 0, x < 1 is feasible; x > 0, x <= 0 is not
        let mut s = Simplex::new(2);
        s.add_row(1, &[(0, int(1))]);
        assert!(s.assert_lower(1, DRat::new(int(0), int(1))));
        assert!(s.assert_upper(1, DRat::new(int(1), int(-1))));
        assert!(s.check());
        assert!(!s.assert_upper(0, real(0)) || !s.check());
    }
}
