//! Attaining distributions for the sharpness results, class-membership
//! verification, and the bundled counterexample instance showing that the
//! improved upper envelope is not pointwise sharp once the marginals are
//! pinned exactly.

use thiserror::Error;

use crate::bounds::{sharp_upper_order1, ConstraintSet, OrthantConstraint};
use crate::measures::{
    dominates_order0, DiscreteMarginal, JointMeasure, MeasureError, ProductGrid,
};
use crate::numeric::{max2, min2, Scalar};
use crate::transport::{build_primal, FrechetClass, PayoffGrid, TransportError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("transport error: {0}")]
    Transport(#[from] TransportError),
    #[error("measure error: {0}")]
    Measure(#[from] MeasureError),
}

/// Which class a measure is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    Exact,
    Order0,
    Order1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    MarginalOrder0,
    MarginalOrder1,
    MarginalEquality,
    OrthantUpper,
    OrthantLower,
    OrthantEquality,
    Mass,
}

#[derive(Debug, Clone)]
pub struct Violation<T> {
    pub kind: ViolationKind,
    pub location: String,
    pub magnitude: T,
}

/// Outcome of a membership check: passed iff no violations were recorded
/// (beyond the tolerance; exactly, in rational mode).
#[derive(Debug, Clone)]
pub struct MembershipReport<T> {
    pub class_kind: ClassKind,
    pub passed: bool,
    pub violations: Vec<Violation<T>>,
}

/// Checks a joint measure against a class: marginal conditions per axis,
/// orthant-value conditions per constraint, and the total-mass condition.
/// The candidate may live on any grid; comparisons use coordinates, not
/// grid indices.
pub fn verify_membership<T: Scalar>(
    mu: &JointMeasure<T>,
    class_kind: ClassKind,
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    tol: &T,
) -> Result<MembershipReport<T>, ConstructionError> {
    if mu.dimension() != marginals.len() {
        return Err(ConstructionError::DimensionMismatch {
            expected: marginals.len(),
            got: mu.dimension(),
        });
    }
    constraints
        .check_dimension(marginals.len())
        .map_err(|_| ConstructionError::DimensionMismatch {
            expected: marginals.len(),
            got: 0,
        })?;

    let mut violations = Vec::new();
    let total = mu.total_mass();
    match class_kind {
        ClassKind::Exact | ClassKind::Order1 => {
            let gap = (total.clone() - T::one()).abs();
            if gap > *tol {
                violations.push(Violation {
                    kind: ViolationKind::Mass,
                    location: format!("total mass {}", total.render()),
                    magnitude: gap,
                });
            }
        }
        ClassKind::Order0 => {
            let excess = total.clone() - T::one();
            if excess > *tol {
                violations.push(Violation {
                    kind: ViolationKind::Mass,
                    location: format!("total mass {}", total.render()),
                    magnitude: excess,
                });
            }
        }
    }

    for (axis, target) in marginals.iter().enumerate() {
        let candidate = mu.marginal(axis)?;
        match class_kind {
            ClassKind::Exact => {
                // atomwise equality including zero mass off the target support
                let mut points = target.support();
                for p in candidate.support() {
                    if !points.contains(&p) {
                        points.push(p);
                    }
                }
                for p in points {
                    let gap = (candidate.mass_at(&p) - target.mass_at(&p)).abs();
                    if gap > *tol {
                        violations.push(Violation {
                            kind: ViolationKind::MarginalEquality,
                            location: format!("axis {axis} at {}", p.render()),
                            magnitude: gap,
                        });
                    }
                }
            }
            ClassKind::Order0 => {
                if !dominates_order0(&candidate, target) {
                    let worst = candidate
                        .atoms()
                        .iter()
                        .map(|(p, m)| (p.clone(), m.clone() - target.mass_at(p)))
                        .max_by(|(_, a), (_, b)| a.total_cmp(b))
                        .expect("nonempty support");
                    if worst.1 > *tol {
                        violations.push(Violation {
                            kind: ViolationKind::MarginalOrder0,
                            location: format!("axis {axis} at {}", worst.0.render()),
                            magnitude: worst.1,
                        });
                    }
                }
            }
            ClassKind::Order1 => {
                for (p, _) in candidate.atoms().iter().chain(target.atoms().iter()) {
                    let gap = candidate.cdf(p) - target.cdf(p);
                    if gap > *tol {
                        violations.push(Violation {
                            kind: ViolationKind::MarginalOrder1,
                            location: format!("axis {axis} at {}", p.render()),
                            magnitude: gap,
                        });
                    }
                }
            }
        }
    }

    for (i, c) in constraints.iter().enumerate() {
        let value = mu.cdf(c.corner())?;
        let above = value.clone() - c.pi_upper().clone();
        let below = c.pi_lower().clone() - value.clone();
        match class_kind {
            ClassKind::Exact => {
                let kind = if c.is_equality() {
                    ViolationKind::OrthantEquality
                } else if above > *tol {
                    ViolationKind::OrthantUpper
                } else {
                    ViolationKind::OrthantLower
                };
                let gap = max2(above, below);
                if gap > *tol {
                    violations.push(Violation {
                        kind,
                        location: format!("constraint {i}"),
                        magnitude: gap,
                    });
                }
            }
            ClassKind::Order0 | ClassKind::Order1 => {
                if above > *tol {
                    violations.push(Violation {
                        kind: ViolationKind::OrthantUpper,
                        location: format!("constraint {i}"),
                        magnitude: above,
                    });
                }
            }
        }
    }

    Ok(MembershipReport { class_kind, passed: violations.is_empty(), violations })
}

/// Attaining measure for the order-1 sharp upper bound at `x`: couples
/// two-point marginals (mass at `x_j`, remainder at a point past every
/// support, corner, and query coordinate) through the minimum of their cdfs.
/// Its cdf at `x` equals [`sharp_upper_order1`] and it passes order-1
/// membership.
pub fn attain_order1<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    x: &[T],
) -> Result<JointMeasure<T>, ConstructionError> {
    if marginals.len() != x.len() || marginals.is_empty() {
        return Err(ConstructionError::DimensionMismatch {
            expected: marginals.len(),
            got: x.len(),
        });
    }
    let bound = sharp_upper_order1(marginals, constraints, x)
        .map_err(|_| ConstructionError::DimensionMismatch { expected: x.len(), got: 0 })?;
    // r exceeds every support point, constraint coordinate, and query coordinate
    let mut r = x[0].clone();
    for v in x.iter().skip(1) {
        r = max2(r, v.clone());
    }
    for m in marginals {
        for (p, _) in m.atoms() {
            r = max2(r, p.clone());
        }
    }
    for c in constraints.iter() {
        for s in c.corner() {
            r = max2(r, s.clone());
        }
    }
    r += T::one();

    let min_marginal = marginals
        .iter()
        .zip(x)
        .map(|(m, t)| m.cdf(t))
        .reduce(min2)
        .expect("nonempty dimension");
    // step level per axis: the marginal cdf at x_j when the bound comes from
    // the marginals, the binding orthant value otherwise
    let levels: Vec<T> = if bound == min_marginal {
        marginals.iter().zip(x).map(|(m, t)| m.cdf(t)).collect()
    } else {
        vec![bound.clone(); x.len()]
    };

    let axes: Vec<Vec<T>> = x.iter().map(|t| vec![t.clone(), r.clone()]).collect();
    let grid = ProductGrid::new(axes)?;
    let measure = JointMeasure::from_cdf(grid, |y| {
        y.iter()
            .zip(x)
            .zip(&levels)
            .map(|((yj, xj), level)| {
                if yj < xj {
                    T::zero()
                } else if yj < &r {
                    level.clone()
                } else {
                    T::one()
                }
            })
            .reduce(min2)
            .expect("nonempty dimension")
    })?;
    Ok(measure)
}

/// Attaining measure for the order-0 sharp upper bound at `x`, produced as
/// an optimal plan of the transport LP for the orthant indicator payoff.
pub fn attain_order0<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    x: &[T],
) -> Result<JointMeasure<T>, ConstructionError> {
    if marginals.len() != x.len() || marginals.is_empty() {
        return Err(ConstructionError::DimensionMismatch {
            expected: marginals.len(),
            got: x.len(),
        });
    }
    let class = FrechetClass::Order0 { marginals: marginals.to_vec() };
    let grid = class.grid()?;
    let payoff = PayoffGrid::lower_orthant_indicator(grid.clone(), x.to_vec())?;
    let lp = build_primal(&class, constraints, &payoff)?;
    let sol = lp.solve().map_err(TransportError::from)?;
    let masses = sol
        .primal
        .iter()
        .map(|m| if *m < T::zero() { T::zero() } else { m.clone() })
        .collect();
    Ok(JointMeasure::new(grid, masses)?)
}

/// The bundled counterexample instance: identical four-atom marginals on
/// both axes, four exactly-known orthant values, and the table measure that
/// witnesses the class being nonempty. The improved upper envelope at (0,1)
/// is 1/10 while no class member exceeds 1/20 there.
pub fn counterexample_instance<T: Scalar>(
) -> (Vec<DiscreteMarginal<T>>, ConstraintSet<T>, JointMeasure<T>) {
    let p = |s: &str| T::parse_number(s).expect("literal");
    let marginal = DiscreteMarginal::probability(vec![
        (p("0"), p("0.1")),
        (p("1"), p("0.2")),
        (p("2"), p("0.05")),
        (p("3"), p("0.65")),
    ])
    .expect("valid literal marginal");
    let constraints = ConstraintSet::new(vec![
        OrthantConstraint::equality(vec![p("0"), p("0")], p("0")).expect("valid"),
        OrthantConstraint::equality(vec![p("0"), p("2")], p("0.1")).expect("valid"),
        OrthantConstraint::equality(vec![p("2"), p("0")], p("0.1")).expect("valid"),
        OrthantConstraint::equality(vec![p("1"), p("1")], p("0.1")).expect("valid"),
    ]);
    let grid = ProductGrid::new(vec![
        vec![p("0"), p("1"), p("2"), p("3")],
        vec![p("0"), p("1"), p("2"), p("3")],
    ])
    .expect("valid grid");
    let rows = [
        ["0", "0.05", "0.05", "0"],
        ["0.05", "0", "0", "0.15"],
        ["0.05", "0", "0", "0"],
        ["0", "0.15", "0", "0.5"],
    ];
    let masses = rows.iter().flatten().map(|s| p(s)).collect();
    let table = JointMeasure::new(grid, masses).expect("valid table measure");
    (vec![marginal.clone(), marginal], constraints, table)
}
