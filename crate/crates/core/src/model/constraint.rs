use std::fmt;

use num_traits::{Signed, Zero};

use super::ModelError;
use crate::rational::{self, Rational};

/// The values a single feature may take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureDomain {
    /// Strictly increasing, nonempty list of admissible values.
    Finite(Vec<Rational>),
    /// Closed interval `[lower, upper]`.
    Interval(Rational, Rational),
}

impl FeatureDomain {
    pub fn finite(mut values: Vec<Rational>) -> Result<Self, ModelError> {
        values.sort();
        values.dedup();
        if values.is_empty() {
            return Err(ModelError::InvalidDomain("finite domain is empty".into()));
        }
        Ok(FeatureDomain::Finite(values))
    }

    pub fn interval(lower: Rational, upper: Rational) -> Result<Self, ModelError> {
        if lower > upper {
            return Err(ModelError::InvalidDomain(format!(
                "interval [{}, {}] is empty",
                rational::to_text(&lower),
                rational::to_text(&upper)
            )));
        }
        Ok(FeatureDomain::Interval(lower, upper))
    }

    pub fn binary() -> Self {
        FeatureDomain::Finite(vec![rational::zero(), rational::one()])
    }

    pub fn contains(&self, v: &Rational) -> bool {
        match self {
            FeatureDomain::Finite(values) => values.binary_search(v).is_ok(),
            FeatureDomain::Interval(lo, hi) => lo <= v && v <= hi,
        }
    }

    pub fn lower(&self) -> &Rational {
        match self {
            FeatureDomain::Finite(values) => &values[0],
            FeatureDomain::Interval(lo, _) => lo,
        }
    }

    pub fn upper(&self) -> &Rational {
        match self {
            FeatureDomain::Finite(values) => values.last().expect("nonempty"),
            FeatureDomain::Interval(_, hi) => hi,
        }
    }

    pub fn values(&self) -> Option<&[Rational]> {
        match self {
            FeatureDomain::Finite(values) => Some(values),
            FeatureDomain::Interval(..) => None,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        match self {
            FeatureDomain::Finite(values) => {
                if values.is_empty() || values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ModelError::InvalidDomain(
                        "finite domain must be nonempty and strictly sorted".into(),
                    ));
                }
            }
            FeatureDomain::Interval(lo, hi) => {
                if lo > hi {
                    return Err(ModelError::InvalidDomain("interval lower > upper".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Comparator::Le => lhs <= rhs,
            Comparator::Lt => lhs < rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Gt => lhs > rhs,
        }
    }

    /// Comparator after multiplying both sides by a negative number.
    pub fn flipped(self) -> Self {
        match self {
            Comparator::Le => Comparator::Ge,
            Comparator::Lt => Comparator::Gt,
            Comparator::Eq => Comparator::Eq,
            Comparator::Ge => Comparator::Le,
            Comparator::Gt => Comparator::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Lt => "<",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "<=" => Comparator::Le,
            "<" => Comparator::Lt,
            "=" | "==" => Comparator::Eq,
            ">=" => Comparator::Ge,
            ">" => Comparator::Gt,
            _ => return None,
        })
    }
}

/// Linear combination `sum(coeff * var)`; no constant term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinExpr<V> {
    pub terms: Vec<(V, Rational)>,
}

impl<V: Clone + PartialEq> LinExpr<V> {
    pub fn new() -> Self {
        LinExpr { terms: Vec::new() }
    }

    pub fn var(v: V) -> Self {
        LinExpr { terms: vec![(v, rational::one())] }
    }

    pub fn term(mut self, v: V, coeff: Rational) -> Self {
        self.add_term(v, coeff);
        self
    }

    pub fn add_term(&mut self, v: V, coeff: Rational) {
        if let Some(slot) = self.terms.iter_mut().find(|(w, _)| *w == v) {
            slot.1 += coeff;
        } else {
            self.terms.push((v, coeff));
        }
        self.terms.retain(|(_, c)| !c.is_zero());
    }

    pub fn eval(&self, mut value: impl FnMut(&V) -> Rational) -> Rational {
        let mut acc = rational::zero();
        for (v, c) in &self.terms {
            acc += c * value(v);
        }
        acc
    }

    pub fn map<W>(&self, mut f: impl FnMut(&V) -> W) -> LinExpr<W> {
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (f(v), c.clone())).collect(),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &V> {
        self.terms.iter().map(|(v, _)| v)
    }
}

impl<V: Clone + PartialEq> Default for LinExpr<V> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    Cmp(Comparator, Rational),
    In(Vec<Rational>),
}

/// `expr <cmp> rhs` or `expr ∈ {values}`, optionally labelled so violations
/// can be reported by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom<V> {
    pub expr: LinExpr<V>,
    pub relation: Relation,
    pub label: Option<String>,
}

impl<V: Clone + PartialEq> Atom<V> {
    pub fn cmp(expr: LinExpr<V>, cmp: Comparator, rhs: Rational) -> Self {
        Atom { expr, relation: Relation::Cmp(cmp, rhs), label: None }
    }

    pub fn member(expr: LinExpr<V>, mut values: Vec<Rational>) -> Self {
        values.sort();
        values.dedup();
        Atom { expr, relation: Relation::In(values), label: None }
    }

    /// `v = value`.
    pub fn pin(v: V, value: Rational) -> Self {
        Atom::cmp(LinExpr::var(v), Comparator::Eq, value)
    }

    /// `0 >= 1`: never holds.
    pub fn falsum() -> Self {
        Atom::cmp(LinExpr::new(), Comparator::Ge, rational::one())
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn holds(&self, value: impl FnMut(&V) -> Rational) -> bool {
        let lhs = self.expr.eval(value);
        match &self.relation {
            Relation::Cmp(cmp, rhs) => cmp.holds(&lhs, rhs),
            Relation::In(values) => values.binary_search(&lhs).is_ok(),
        }
    }

    pub fn map<W: Clone + PartialEq>(&self, f: impl FnMut(&V) -> W) -> Atom<W> {
        Atom {
            expr: self.expr.map(f),
            relation: self.relation.clone(),
            label: self.label.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if let Relation::In(values) = &self.relation {
            if values.is_empty() {
                return Err(ModelError::InvalidConstraint("membership set is empty".into()));
            }
        }
        Ok(())
    }
}

impl<V: fmt::Display> fmt::Display for Atom<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.expr.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (v, c)) in self.expr.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mag != rational::one() {
                write!(f, "{}*", rational::to_text(&mag))?;
            }
            write!(f, "{v}")?;
        }
        match &self.relation {
            Relation::Cmp(cmp, rhs) => write!(f, " {} {}", cmp.symbol(), rational::to_text(rhs))?,
            Relation::In(values) => {
                let vals: Vec<_> = values.iter().map(rational::to_text).collect();
                write!(f, " in {{{}}}", vals.join(", "))?
            }
        }
        if let Some(label) = &self.label {
            write!(f, "  # {label}")?;
        }
        Ok(())
    }
}

/// Conjunction of atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet<V> {
    pub atoms: Vec<Atom<V>>,
}

impl<V: Clone + PartialEq> ConstraintSet<V> {
    pub fn new(atoms: Vec<Atom<V>>) -> Self {
        ConstraintSet { atoms }
    }

    pub fn empty() -> Self {
        ConstraintSet { atoms: Vec::new() }
    }

    /// First atom that fails under `value`, if any.
    pub fn first_violation(&self, mut value: impl FnMut(&V) -> Rational) -> Option<(usize, &Atom<V>)> {
        self.atoms
            .iter()
            .enumerate()
            .find(|(_, a)| !a.holds(&mut value))
    }

    pub fn holds(&self, value: impl FnMut(&V) -> Rational) -> bool {
        self.first_violation(value).is_none()
    }
}

/// A feature of the current state (`Cur`) or the successor state (`Next`) in a
/// transition constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateRef {
    Cur(usize),
    Next(usize),
}

impl StateRef {
    pub fn feature(self) -> usize {
        match self {
            StateRef::Cur(f) | StateRef::Next(f) => f,
        }
    }

    /// Parses `x3` (current) or `x3'` (successor).
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let (body, next) = match s.strip_suffix('\'') {
            Some(b) => (b, true),
            None => (s, false),
        };
        let idx: usize = body.strip_prefix('x')?.parse().ok()?;
        Some(if next { StateRef::Next(idx) } else { StateRef::Cur(idx) })
    }
}

impl fmt::Display for StateRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateRef::Cur(i) => write!(f, "x{i}"),
            StateRef::Next(i) => write!(f, "x{i}'"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn membership_over_sum() {
        let atom = Atom::member(
            LinExpr::var(StateRef::Cur(4)).term(StateRef::Next(4), int(1)),
            vec![int(0), frac(1, 2), int(1)],
        );
        let eval = |a: &Rational, b: &Rational| {
            atom.holds(|v| if *v == StateRef::Cur(4) { a.clone() } else { b.clone() })
        };
        assert!(eval(&frac(1, 2), &frac(1, 2)));
        assert!(!eval(&frac(1, 2), &int(1)));
        assert!(eval(&int(0), &int(0)));
    }

    #[test]
    fn state_ref_round_trip() {
        for r in [StateRef::Cur(0), StateRef::Next(7)] {
            assert_eq!(StateRef::parse(&r.to_string()), Some(r));
        }
        assert_eq!(StateRef::parse("y1"), None);
    }

    #[test]
    fn atom_display() {
        let atom = Atom::cmp(
            LinExpr::var(StateRef::Next(0)).term(StateRef::Cur(0), int(-1)),
            Comparator::Eq,
            frac(1, 4),
        )
        .labelled("direction-axis");
        assert_eq!(atom.to_string(), "x0' - x0 = 1/4  # direction-axis");
    }

    #[test]
    fn domain_validation() {
        assert!(FeatureDomain::finite(vec![]).is_err());
        assert!(FeatureDomain::interval(int(1), int(0)).is_err());
        let d = FeatureDomain::finite(vec![int(1), int(0), int(1)]).unwrap();
        assert_eq!(d.values().unwrap(), &[int(0), int(1)]);
        assert!(FeatureDomain::Finite(vec![int(1), int(0)]).validate().is_err());
    }
}
