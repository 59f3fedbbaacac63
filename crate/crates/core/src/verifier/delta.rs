//! Rationals extended with a symbolic infinitesimal, `r + d·δ`.
//!
//! Strict bounds `x > c` become `x >= c + δ`; comparison is lexicographic and
//! a concrete positive δ is chosen only when a witness is extracted.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DRat {
    pub r: Rational,
    pub d: Rational,
}

impl DRat {
    pub fn new(r: Rational, d: Rational) -> Self {
        DRat { r, d }
    }

    pub fn real(r: Rational) -> Self {
        DRat { r, d: Rational::zero() }
    }

    pub fn zero() -> Self {
        DRat::real(Rational::zero())
    }

    pub fn is_real(&self) -> bool {
        self.d.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> DRat {
        let d = if self.d.is_zero() { Rational::zero() } else { &self.d * c };
        DRat { r: &self.r * c, d }
    }

    /// Value at a concrete δ.
    pub fn at(&self, delta: &Rational) -> Rational {
        &self.r + &self.d * delta
    }
}

impl Ord for DRat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.r.cmp(&other.r).then_with(|| self.d.cmp(&other.d))
    }
}

impl PartialOrd for DRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DRat {
    type Output = DRat;
    fn add(self, o: &DRat) -> DRat {
        let d = if o.d.is_zero() { self.d.clone() } else { &self.d + &o.d };
        DRat { r: &self.r + &o.r, d }
    }
}

impl Sub for &DRat {
    type Output = DRat;
    fn sub(self, o: &DRat) -> DRat {
        let d = if o.d.is_zero() { self.d.clone() } else { &self.d - &o.d };
        DRat { r: &self.r - &o.r, d }
    }
}

impl AddAssign<&DRat> for DRat {
    fn add_assign(&mut self, o: &DRat) {
        self.r += &o.r;
        if !o.d.is_zero() {
            self.d += &o.d;
        }
    }
}

impl Mul<&Rational> for &DRat {
    type Output = DRat;
    fn mul(self, c: &Rational) -> DRat {
        self.scale(c)
    }
}

impl Neg for DRat {
    type Output = DRat;
    fn neg(self) -> DRat {
        DRat { r: -self.r, d: -self.d }
    }
}

/// Largest δ in `(0, 1]` keeping `lhs <= rhs` true once both are
/// instantiated, given that it holds symbolically.
pub fn delta_bound(lhs: &DRat, rhs: &DRat, current: Rational) -> Rational {
    // lhs.r + lhs.d·δ <= rhs.r + rhs.d·δ  <=>  (lhs.d - rhs.d)·δ <= rhs.r - lhs.r
    let slope = &lhs.d - &rhs.d;
    let gap = &rhs.r - &lhs.r;
    if slope.is_positive() && gap.is_positive() {
        let limit = gap / slope;
        if limit < current {
            return limit;
        }
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn ordering_is_lexicographic() {
        let a = DRat::new(int(1), int(0));
        let b = DRat::new(int(1), int(1));
        let c = DRat::new(frac(3, 2), int(-5));
        assert!(a < b && b < c);
    }

    #[test]
    fn delta_keeps_strict_bounds() {
        // x = 1 + δ must stay below 2 - δ
        let x = DRat::new(int(1), int(1));
        let hi = DRat::new(int(2), int(-1));
        let d = delta_bound(&x, &hi, int(1));
        assert!(x.at(&d) <= hi.at(&d));
        assert!(d > int(0));
    }
}
