//! Closed-form value and explicit optimal superhedge for the indicator of a
//! lower-orthant box over the order-0 relaxed class. The value formula works
//! in any dimension; the three-form hedge decomposition is specific to
//! dimension 2, where the optimal long-only hedge is a vertical strip, a
//! horizontal strip, or a single orthant position plus the two strips
//! adjacent to it.

use thiserror::Error;

use crate::bounds::ConstraintSet;
use crate::measures::{DiscreteMarginal, ProductGrid};
use crate::numeric::{min2, Scalar};
use crate::transport::{DualVariant, HedgePortfolio};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoxHedgeError {
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the hedge decomposition is only available in dimension 2 (got {0})")]
    DecompositionNeedsDim2(usize),
}

/// A lower-orthant box `(-inf, corner]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthantBox<T> {
    pub corner: Vec<T>,
}

impl<T: Scalar> OrthantBox<T> {
    pub fn new(corner: Vec<T>) -> Self {
        Self { corner }
    }

    pub fn dimension(&self) -> usize {
        self.corner.len()
    }
}

/// Which of the three optimal shapes the hedge takes. The orthant form
/// carries the index of the single constraint it buys; its strips may be
/// empty when the constraint corner covers the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HedgeForm {
    VerticalStrip,
    HorizontalStrip,
    BoxPlusStrips(usize),
}

#[derive(Debug, Clone)]
pub struct BoxHedgeResult<T> {
    pub value: T,
    pub form: HedgeForm,
    pub portfolio: HedgePortfolio<T>,
}

fn check_inputs<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    b: &OrthantBox<T>,
) -> Result<(), BoxHedgeError> {
    let d = marginals.len();
    if b.dimension() != d || d == 0 {
        return Err(BoxHedgeError::DimensionMismatch { expected: d, got: b.dimension() });
    }
    constraints
        .check_dimension(d)
        .map_err(|_| BoxHedgeError::DimensionMismatch { expected: d, got: 0 })?;
    Ok(())
}

/// Maximal box mass over the order-0 class: the cheapest of the per-axis
/// strips and, per constraint, the orthant position plus the interval masses
/// between its corner and the box corner (empty intervals contribute zero).
pub fn box_value<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    b: &OrthantBox<T>,
) -> Result<T, BoxHedgeError> {
    check_inputs(marginals, constraints, b)?;
    let mut best = marginals
        .iter()
        .zip(&b.corner)
        .map(|(m, t)| m.cdf(t))
        .reduce(min2)
        .expect("nonempty dimension");
    for c in constraints.iter() {
        let strips: T = marginals
            .iter()
            .zip(c.corner())
            .zip(&b.corner)
            .map(|((m, a), t)| m.interval_mass(a, t))
            .sum();
        best = min2(best, c.pi_upper().clone() + strips);
    }
    Ok(best)
}

/// Cheapest hedge of the box that uses no vertical-marginal leg: the full
/// horizontal strip, or a constraint whose corner reaches past the box
/// horizontally plus the horizontal strip above it. Dimension 2 only.
pub fn eta_value<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    b: &OrthantBox<T>,
) -> Result<T, BoxHedgeError> {
    if marginals.len() != 2 {
        return Err(BoxHedgeError::DecompositionNeedsDim2(marginals.len()));
    }
    check_inputs(marginals, constraints, b)?;
    Ok(eta_with_choice(marginals, constraints, &b.corner[0], &b.corner[1]).0)
}

/// Settle value at vertical level `level`, together with the selected form.
/// Constraint candidates beat the horizontal strip on ties; tied constraint
/// candidates resolve by stable order on (second corner coordinate, index).
fn eta_with_choice<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    level: &T,
    b2: &T,
) -> (T, HedgeForm) {
    let mut candidates: Vec<(usize, T)> = constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.corner()[0] >= *level)
        .map(|(i, c)| {
            (i, c.pi_upper().clone() + marginals[1].interval_mass(&c.corner()[1], b2))
        })
        .collect();
    candidates.sort_by(|(i, _), (j, _)| {
        constraints.get(*i).corner()[1]
            .total_cmp(&constraints.get(*j).corner()[1])
            .then(i.cmp(j))
    });
    let horizontal = marginals[1].cdf(b2);
    let mut best_value = horizontal;
    let mut best_form = HedgeForm::HorizontalStrip;
    for (i, v) in candidates {
        if v < best_value || (v == best_value && best_form == HedgeForm::HorizontalStrip) {
            best_value = v;
            best_form = HedgeForm::BoxPlusStrips(i);
        }
    }
    (best_value, best_form)
}

/// Canonical portfolio of a form, sampled on the product of the marginal
/// supports.
fn canonical_portfolio<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    b: &OrthantBox<T>,
    form: HedgeForm,
) -> HedgePortfolio<T> {
    let grid = ProductGrid::from_marginals(marginals).expect("valid marginals");
    let strip = |axis: usize, lo: Option<&T>, hi: &T| -> Vec<T> {
        grid.axis(axis)
            .iter()
            .map(|t| {
                let above = lo.map_or(true, |l| t > l);
                if above && t <= hi {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect()
    };
    let zeros = |axis: usize| vec![T::zero(); grid.axis(axis).len()];
    let mut coefficients = vec![T::zero(); constraints.len()];
    let axis_values = match form {
        HedgeForm::VerticalStrip => vec![strip(0, None, &b.corner[0]), zeros(1)],
        HedgeForm::HorizontalStrip => vec![zeros(0), strip(1, None, &b.corner[1])],
        HedgeForm::BoxPlusStrips(i) => {
            coefficients[i] = T::one();
            let a = constraints.get(i).corner();
            vec![
                strip(0, Some(&a[0]), &b.corner[0]),
                strip(1, Some(&a[1]), &b.corner[1]),
            ]
        }
    };
    let mut price: T = marginals
        .iter()
        .zip(&axis_values)
        .map(|(m, vals)| -> T {
            m.atoms()
                .iter()
                .zip(vals)
                .map(|((_, mass), v)| mass.clone() * v.clone())
                .sum()
        })
        .sum();
    for (c, a) in constraints.iter().zip(&coefficients) {
        price += a.clone() * c.pi_upper().clone();
    }
    HedgePortfolio {
        variant: DualVariant::Theta0,
        grid,
        axis_values,
        axis_values_short: None,
        coefficients,
        price,
    }
}

/// Optimal hedge decomposition in dimension 2, selected by the settle-or-peel
/// recursion: at each vertical level either settle with the cheapest hedge
/// that needs no vertical leg (preferred on ties), or peel the rightmost
/// vertical cell of the partition induced by the constraint corners and
/// recurse on the shrunken box. The result is always one of the three forms
/// and its price equals [`box_value`].
pub fn box_hedge<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
    b: &OrthantBox<T>,
) -> Result<BoxHedgeResult<T>, BoxHedgeError> {
    if marginals.len() != 2 {
        return Err(BoxHedgeError::DecompositionNeedsDim2(marginals.len()));
    }
    check_inputs(marginals, constraints, b)?;
    let value = box_value(marginals, constraints, b)?;

    let mut levels: Vec<T> = constraints.iter().map(|c| c.corner()[0].clone()).collect();
    levels.sort_by(|a, bb| a.total_cmp(bb));
    levels.dedup();

    let mut cur = b.corner[0].clone();
    let form = loop {
        let (eta, settle_form) = eta_with_choice(marginals, constraints, &cur, &b.corner[1]);
        let prev = levels.iter().rev().find(|l| **l < cur).cloned();
        let peel_total = match &prev {
            None => marginals[0].cdf(&cur),
            Some(p) => {
                let inner = OrthantBox::new(vec![p.clone(), b.corner[1].clone()]);
                marginals[0].interval_mass(p, &cur) + box_value(marginals, constraints, &inner)?
            }
        };
        if eta <= peel_total {
            break settle_form;
        }
        match prev {
            None => break HedgeForm::VerticalStrip,
            Some(p) => cur = p,
        }
    };

    let portfolio = canonical_portfolio(marginals, constraints, b, form);
    debug_assert!(
        (portfolio.price.clone() - value.clone()).abs() <= T::default_tol(),
        "canonical hedge must price at the box value"
    );
    Ok(BoxHedgeResult { value, form, portfolio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{sharp_upper_order0, OrthantConstraint};
    use crate::lp::LpStatus;
    use crate::measures::tests::table_marginal;
    use crate::transport::{build_primal, FrechetClass, PayoffGrid};
    use num_rational::BigRational;
    use num_traits::Zero;

    type Q = BigRational;

    fn q(s: &str) -> Q {
        Q::parse_number(s).unwrap()
    }

    fn uniform4() -> DiscreteMarginal<Q> {
        DiscreteMarginal::probability(
            (0..4).map(|i| (Q::from_int(i), q("0.25"))).collect(),
        )
        .unwrap()
    }

    fn q0_lp_value(
        marginals: &[DiscreteMarginal<Q>],
        constraints: &ConstraintSet<Q>,
        corner: &[Q],
    ) -> Q {
        let class = FrechetClass::Order0 { marginals: marginals.to_vec() };
        let grid = class.grid().unwrap();
        let payoff = PayoffGrid::lower_orthant_indicator(grid, corner.to_vec()).unwrap();
        let sol = build_primal(&class, constraints, &payoff).unwrap().solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        sol.objective_value
    }

    #[test]
    fn uniform_example_value() {
        let marginals = vec![uniform4(), uniform4()];
        let constraints = ConstraintSet::new(vec![
            OrthantConstraint::new(vec![q("1"), q("3")], q("0"), q("0.3")).unwrap(),
        ]);
        let b = OrthantBox::new(vec![q("2"), q("2")]);
        let v = box_value(&marginals, &constraints, &b).unwrap();
        assert_eq!(v, q("0.55"));
        assert_eq!(v, q0_lp_value(&marginals, &constraints, &b.corner));
    }

    #[test]
    fn box_below_support_has_zero_value() {
        let marginals = vec![uniform4(), uniform4()];
        let b = OrthantBox::new(vec![q("-1"), q("2")]);
        assert_eq!(box_value(&marginals, &ConstraintSet::empty(), &b).unwrap(), Q::zero());
    }

    #[test]
    fn no_constraints_reduces_to_cheapest_strip() {
        let marginals = vec![uniform4(), table_marginal()];
        let b = OrthantBox::new(vec![q("1"), q("2")]);
        let v = box_value(&marginals, &ConstraintSet::empty(), &b).unwrap();
        assert_eq!(v, q("0.35")); // min(0.5, 0.35)
    }

    #[test]
    fn eta_examples() {
        let marginals = vec![uniform4(), uniform4()];
        let b = OrthantBox::new(vec![q("2"), q("2")]);
        // no constraint reaches past the box horizontally
        let c1 = ConstraintSet::new(vec![
            OrthantConstraint::new(vec![q("1"), q("3")], q("0"), q("0.3")).unwrap(),
        ]);
        let eta = eta_value(&marginals, &c1, &b).unwrap();
        assert_eq!(eta, q("0.75"));
        assert!(eta >= box_value(&marginals, &c1, &b).unwrap());

        let c2 = ConstraintSet::new(vec![
            OrthantConstraint::new(vec![q("2"), q("1")], q("0"), q("0.2")).unwrap(),
        ]);
        assert_eq!(eta_value(&marginals, &c2, &b).unwrap(), q("0.45"));

        let low = OrthantBox::new(vec![q("2"), q("-5")]);
        assert_eq!(eta_value(&marginals, &ConstraintSet::empty(), &low).unwrap(), Q::zero());
    }

    #[test]
    fn eta_matches_restricted_dual_lp() {
        // oracle: the superhedge LP with the vertical leg forced to zero
        use crate::lp::{LinearProgram, Relation, Sense};
        let marginals = vec![uniform4(), uniform4()];
        let constraints = ConstraintSet::new(vec![
            OrthantConstraint::new(vec![q("2"), q("1")], q("0"), q("0.2")).unwrap(),
        ]);
        let b = OrthantBox::new(vec![q("2"), q("2")]);
        // variables: f2 per axis-1 point, then one coefficient per constraint
        let axis = marginals[1].support();
        let n = axis.len() + constraints.len();
        let mut objective = vec![Q::zero(); n];
        for (i, t) in axis.iter().enumerate() {
            objective[i] = marginals[1].mass_at(t);
        }
        for (i, c) in constraints.iter().enumerate() {
            objective[axis.len() + i] = c.pi_upper().clone();
        }
        let mut lp = LinearProgram::nonnegative(Sense::Minimize, objective);
        for x0 in marginals[0].support() {
            if x0 > b.corner[0] {
                continue;
            }
            for (i, x1) in axis.iter().enumerate() {
                if *x1 > b.corner[1] {
                    continue;
                }
                let mut row = vec![Q::zero(); n];
                row[i] = Q::from_int(1);
                for (k, c) in constraints.iter().enumerate() {
                    if x0 <= c.corner()[0] && *x1 <= c.corner()[1] {
                        row[axis.len() + k] = Q::from_int(1);
                    }
                }
                lp.push_row(row, Relation::Ge, Q::from_int(1)).unwrap();
            }
        }
        let sol = lp.solve().unwrap();
        assert_eq!(sol.objective_value, eta_value(&marginals, &constraints, &b).unwrap());
    }

    #[test]
    fn hedge_on_uniform_example_buys_the_box() {
        let marginals = vec![uniform4(), uniform4()];
        let constraints = ConstraintSet::new(vec![
            OrthantConstraint::new(vec![q("1"), q("3")], q("0"), q("0.3")).unwrap(),
        ]);
        let b = OrthantBox::new(vec![q("2"), q("2")]);
        let res = box_hedge(&marginals, &constraints, &b).unwrap();
        assert_eq!(res.value, q("0.55"));
        assert_eq!(res.form, HedgeForm::BoxPlusStrips(0));
        assert_eq!(res.portfolio.coefficients, vec![q("1")]);
        // f1 = indicator of (1, 2] on {0,1,2,3}; f2 empty
        assert_eq!(res.portfolio.axis_values[0], vec![q("0"), q("0"), q("1"), q("0")]);
        assert_eq!(res.portfolio.axis_values[1], vec![q("0"); 4]);
        assert_eq!(res.portfolio.price, q("0.55"));
        let grid = res.portfolio.grid.clone();
        let payoff = PayoffGrid::lower_orthant_indicator(grid, b.corner.clone()).unwrap();
        res.portfolio.verify(&payoff, &constraints, &Q::zero()).unwrap();
    }

    #[test]
    fn hedge_without_constraints_picks_cheapest_strip() {
        let marginals = vec![uniform4(), table_marginal()];
        // F1(1) = 0.5 > F2(1) = 0.3: horizontal strip wins
        let b = OrthantBox::new(vec![q("1"), q("1")]);
        let res = box_hedge(&marginals, &ConstraintSet::empty(), &b).unwrap();
        assert_eq!(res.form, HedgeForm::HorizontalStrip);
        assert_eq!(res.value, q("0.3"));
        // flipped: F1(0) = 0.25 < F2(3) = 1
        let b = OrthantBox::new(vec![q("0"), q("3")]);
        let res = box_hedge(&marginals, &ConstraintSet::empty(), &b).unwrap();
        assert_eq!(res.form, HedgeForm::VerticalStrip);
        assert_eq!(res.value, q("0.25"));
        assert_eq!(res.portfolio.price, q("0.25"));
    }

    #[test]
    fn covering_constraint_yields_box_alone() {
        let marginals = vec![uniform4(), uniform4()];
        let constraints = ConstraintSet::new(vec![
            OrthantConstraint::new(vec![q("3"), q("3")], q("0"), q("0.1")).unwrap(),
        ]);
        let b = OrthantBox::new(vec![q("2"), q("2")]);
        let res = box_hedge(&marginals, &constraints, &b).unwrap();
        assert_eq!(res.form, HedgeForm::BoxPlusStrips(0));
        assert_eq!(res.value, q("0.1"));
        // both strips empty
        assert!(res.portfolio.axis_values[0].iter().all(|v| v.is_zero()));
        assert!(res.portfolio.axis_values[1].iter().all(|v| v.is_zero()));
    }

    #[test]
    fn value_equals_sharp_order0_formula() {
        let marginals = vec![uniform4(), table_marginal()];
        let constraints = ConstraintSet::new(vec![
            OrthantConstraint::new(vec![q("1"), q("2")], q("0"), q("0.15")).unwrap(),
            OrthantConstraint::new(vec![q("3"), q("0")], q("0"), q("0.2")).unwrap(),
        ]);
        for a in ["-1", "0", "1.5", "2", "3", "4"] {
            for bb in ["0", "1", "2.5", "3"] {
                let corner = vec![q(a), q(bb)];
                let b = OrthantBox::new(corner.clone());
                assert_eq!(
                    box_value(&marginals, &constraints, &b).unwrap(),
                    sharp_upper_order0(&marginals, &constraints, &corner).unwrap()
                );
            }
        }
    }

    #[test]
    fn three_dim_value_matches_lp() {
        let m3 = DiscreteMarginal::probability(vec![
            (q("0"), q("0.5")),
            (q("1"), q("0.25")),
            (q("2"), q("0.25")),
        ])
        .unwrap();
        let marginals = vec![m3.clone(), m3.clone(), m3];
        let constraints = ConstraintSet::new(vec![
            OrthantConstraint::new(vec![q("0"), q("1"), q("2")], q("0"), q("0.2")).unwrap(),
        ]);
        let b = OrthantBox::new(vec![q("1"), q("1"), q("1")]);
        let v = box_value(&marginals, &constraints, &b).unwrap();
        assert_eq!(v, q0_lp_value(&marginals, &constraints, &b.corner));
    }

    #[test]
    fn decomposition_rejects_other_dimensions() {
        let m = uniform4();
        let b = OrthantBox::new(vec![q("1")]);
        assert!(matches!(
            box_hedge(&[m.clone()], &ConstraintSet::empty(), &b),
            Err(BoxHedgeError::DecompositionNeedsDim2(1))
        ));
        assert!(matches!(
            eta_value(&[m], &ConstraintSet::empty(), &b),
            Err(BoxHedgeError::DecompositionNeedsDim2(1))
        ));
    }

    #[test]
    fn eta_equals_value_iff_first_step_settles() {
        let marginals = vec![uniform4(), uniform4()];
        let sets = [
            vec![OrthantConstraint::new(vec![q("1"), q("3")], q("0"), q("0.3")).unwrap()],
            vec![OrthantConstraint::new(vec![q("3"), q("1")], q("0"), q("0.25")).unwrap()],
            vec![],
        ];
        for cons in sets {
            let constraints = ConstraintSet::new(cons);
            for a in 0..4 {
                for bb in 0..4 {
                    let b = OrthantBox::new(vec![Q::from_int(a), Q::from_int(bb)]);
                    let eta = eta_value(&marginals, &constraints, &b).unwrap();
                    let res = box_hedge(&marginals, &constraints, &b).unwrap();
                    assert!(eta >= res.value);
                    let settled_first = match res.form {
                        HedgeForm::HorizontalStrip => true,
                        HedgeForm::BoxPlusStrips(i) => {
                            constraints.get(i).corner()[0] >= b.corner[0]
                        }
                        HedgeForm::VerticalStrip => false,
                    };
                    assert_eq!(eta == res.value, settled_first, "at ({a},{bb})");
                }
            }
        }
    }
}
