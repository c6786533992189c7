//! Closed-form bound formulas: the classical two-sided envelope on joint
//! cdfs with given marginals, the improved envelope that folds in known
//! lower-orthant values, and the pointwise-sharp upper formulas for the two
//! relaxed classes.

use thiserror::Error;

use crate::measures::DiscreteMarginal;
use crate::numeric::{clamp01, max2, min2, pos_part, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("constraint bounds must satisfy 0 <= lower <= upper <= 1 (got {lower}, {upper})")]
    InvalidPi { lower: String, upper: String },
}

/// A prescribed lower-orthant value band: the joint cdf at `corner` is known
/// to lie in `[pi_lower, pi_upper]` (equal bounds encode exact knowledge).
#[derive(Debug, Clone, PartialEq)]
pub struct OrthantConstraint<T> {
    corner: Vec<T>,
    pi_lower: T,
    pi_upper: T,
}

impl<T: Scalar> OrthantConstraint<T> {
    pub fn new(corner: Vec<T>, pi_lower: T, pi_upper: T) -> Result<Self, BoundsError> {
        let tol = T::default_tol();
        let ok = pi_lower >= -tol.clone()
            && pi_upper.clone() - T::one() <= tol.clone()
            && pi_lower.clone() - pi_upper.clone() <= tol;
        if !ok {
            return Err(BoundsError::InvalidPi {
                lower: pi_lower.render(),
                upper: pi_upper.render(),
            });
        }
        Ok(Self { corner, pi_lower, pi_upper })
    }

    /// Exact knowledge `F(corner) = pi`.
    pub fn equality(corner: Vec<T>, pi: T) -> Result<Self, BoundsError> {
        Self::new(corner, pi.clone(), pi)
    }

    pub fn corner(&self) -> &[T] {
        &self.corner
    }

    pub fn pi_lower(&self) -> &T {
        &self.pi_lower
    }

    pub fn pi_upper(&self) -> &T {
        &self.pi_upper
    }

    pub fn dimension(&self) -> usize {
        self.corner.len()
    }

    pub fn is_equality(&self) -> bool {
        self.pi_lower == self.pi_upper
    }
}

/// A finite (possibly empty) collection of orthant constraints; corners need
/// not be distinct.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSet<T> {
    constraints: Vec<OrthantConstraint<T>>,
}

impl<T: Scalar> ConstraintSet<T> {
    pub fn new(constraints: Vec<OrthantConstraint<T>>) -> Self {
        Self { constraints }
    }

    pub fn empty() -> Self {
        Self { constraints: Vec::new() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &OrthantConstraint<T>> {
        self.constraints.iter()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn get(&self, i: usize) -> &OrthantConstraint<T> {
        &self.constraints[i]
    }

    pub fn check_dimension(&self, d: usize) -> Result<(), BoundsError> {
        for c in &self.constraints {
            if c.dimension() != d {
                return Err(BoundsError::DimensionMismatch { expected: d, got: c.dimension() });
            }
        }
        Ok(())
    }
}

fn check_point<T: Scalar>(marginals: &[DiscreteMarginal<T>], x: &[T]) -> Result<(), BoundsError> {
    if marginals.len() != x.len() || marginals.is_empty() {
        return Err(BoundsError::DimensionMismatch { expected: marginals.len(), got: x.len() });
    }
    Ok(())
}

fn min_marginal_cdf<T: Scalar>(marginals: &[DiscreteMarginal<T>], x: &[T]) -> T {
    marginals
        .iter()
        .zip(x)
        .map(|(m, t)| m.cdf(t))
        .reduce(min2)
        .expect("nonempty dimension")
}

/// The classical envelope: `lower = (sum_i F_i(x_i) - (d-1))^+` and
/// `upper = min_i F_i(x_i)`.
pub fn classical_fh_bounds<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    x: &[T],
) -> Result<(T, T), BoundsError> {
    check_point(marginals, x)?;
    let d = marginals.len();
    let sum: T = marginals.iter().zip(x).map(|(m, t)| m.cdf(t)).sum();
    let lower = pos_part(sum - T::from_int(d as i64 - 1));
    let upper = min_marginal_cdf(marginals, x);
    Ok((clamp01(lower), clamp01(upper)))
}

/// Improved upper envelope: the classical upper bound intersected with
/// `min_s { pi_upper(s) + sum_i (F_i(x_i) - F_i(s_i))^+ }` over the
/// constraints; with no constraints this is the classical upper bound.
pub fn improved_fh_upper<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    x: &[T],
) -> Result<T, BoundsError> {
    check_point(marginals, x)?;
    constraints.check_dimension(x.len())?;
    let mut best = min_marginal_cdf(marginals, x);
    for c in constraints.iter() {
        let shift: T = marginals
            .iter()
            .zip(x)
            .zip(c.corner())
            .map(|((m, xi), si)| pos_part(m.cdf(xi) - m.cdf(si)))
            .sum();
        best = min2(best, c.pi_upper().clone() + shift);
    }
    Ok(clamp01(best))
}

/// Improved lower envelope: the classical lower bound joined with
/// `max_s { pi_lower(s) - sum_i (F_i(s_i) - F_i(x_i))^+ }`.
pub fn improved_fh_lower<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    x: &[T],
) -> Result<T, BoundsError> {
    check_point(marginals, x)?;
    constraints.check_dimension(x.len())?;
    let mut best = classical_fh_bounds(marginals, x)?.0;
    for c in constraints.iter() {
        let shift: T = marginals
            .iter()
            .zip(x)
            .zip(c.corner())
            .map(|((m, xi), si)| pos_part(m.cdf(si) - m.cdf(xi)))
            .sum();
        best = max2(best, c.pi_lower().clone() - shift);
    }
    Ok(clamp01(best))
}

/// Exact maximum of the joint cdf at `x` over the order-0 relaxed class.
/// Numerically identical to [`improved_fh_upper`]; kept separate because it
/// carries the attainment guarantee (the transport LP over the order-0 class
/// reaches this value).
pub fn sharp_upper_order0<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    x: &[T],
) -> Result<T, BoundsError> {
    improved_fh_upper(marginals, constraints, x)
}

/// Exact maximum of the joint cdf at `x` over the order-1 relaxed class:
/// `min_i F_i(x_i)` intersected with `min { pi_upper(s) : x <= s }`, the
/// inner minimum over an empty set being dropped.
pub fn sharp_upper_order1<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    x: &[T],
) -> Result<T, BoundsError> {
    check_point(marginals, x)?;
    constraints.check_dimension(x.len())?;
    let mut best = min_marginal_cdf(marginals, x);
    for c in constraints.iter() {
        let dominated = x.iter().zip(c.corner()).all(|(xi, si)| xi <= si);
        if dominated {
            best = min2(best, c.pi_upper().clone());
        }
    }
    Ok(clamp01(best))
}
