//! Primal transport LPs over the three constrained Frechet classes, their
//! superhedging dual LPs, the price-bound driver that solves both sides,
//! the arbitrage/feasibility check, and the maximum-transport constraint
//! generator.
//!
//! Dual step functions live on the same axis grids as the marginals and the
//! domination inequality is imposed at grid points only; for grid-supported
//! measures this loses nothing.

use thiserror::Error;

use crate::bounds::ConstraintSet;
use crate::lp::{LinearProgram, LpError, LpStatus, Relation, Sense, VarBound};
use crate::measures::{DiscreteMarginal, JointMeasure, MeasureError, ProductGrid};
use crate::numeric::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("payoff grid does not match the class grid on axis {axis}")]
    GridMismatch { axis: usize },
    #[error("cdf envelopes out of order on axis {axis} at t = {at}")]
    EnvelopeOrder { axis: usize, at: String },
    #[error("marginal on axis {axis} must be a probability measure")]
    MarginalNotProbability { axis: usize },
    #[error("the {0} class is empty for this instance")]
    ClassEmpty(&'static str),
    #[error("primal/dual gap {gap} exceeds the tolerance")]
    DualityGap { gap: String },
    #[error("linear program error: {0}")]
    Lp(#[from] LpError),
    #[error("measure error: {0}")]
    Measure(#[from] MeasureError),
}

/// A payoff sampled on a product grid, values in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffGrid<T> {
    grid: ProductGrid<T>,
    values: Vec<T>,
    kind: PayoffKind<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PayoffKind<T> {
    GridSampled,
    LowerOrthantIndicator(Vec<T>),
}

impl<T: Scalar> PayoffGrid<T> {
    pub fn sampled(grid: ProductGrid<T>, values: Vec<T>) -> Result<Self, TransportError> {
        if values.len() != grid.num_points() {
            return Err(TransportError::Measure(MeasureError::MassCountMismatch {
                expected: grid.num_points(),
                got: values.len(),
            }));
        }
        if !T::EXACT && values.iter().any(|v| !v.to_f64().is_finite()) {
            return Err(TransportError::Lp(LpError::NonFinite));
        }
        Ok(Self { grid, values, kind: PayoffKind::GridSampled })
    }

    /// Indicator of the closed lower orthant with the given corner; values
    /// are exactly 0/1, derived from the corner so boundary points are never
    /// misclassified.
    pub fn lower_orthant_indicator(
        grid: ProductGrid<T>,
        corner: Vec<T>,
    ) -> Result<Self, TransportError> {
        if corner.len() != grid.dimension() {
            return Err(TransportError::DimensionMismatch {
                expected: grid.dimension(),
                got: corner.len(),
            });
        }
        let mut values = vec![T::zero(); grid.num_points()];
        for idx in grid.indices() {
            let inside = idx
                .iter()
                .enumerate()
                .all(|(j, &i)| grid.axis(j)[i] <= corner[j]);
            if inside {
                values[grid.flat_index(&idx)] = T::one();
            }
        }
        Ok(Self { grid, values, kind: PayoffKind::LowerOrthantIndicator(corner) })
    }

    pub fn constant(grid: ProductGrid<T>, value: T) -> Self {
        let n = grid.num_points();
        Self { grid, values: vec![value; n], kind: PayoffKind::GridSampled }
    }

    pub fn grid(&self) -> &ProductGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn kind(&self) -> &PayoffKind<T> {
        &self.kind
    }
}

/// Per-axis cdf band: the candidate marginal cdf must lie between the cdfs
/// of `lower_envelope` and `upper_envelope` at every breakpoint. Both
/// envelopes are probability measures.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfBand<T> {
    pub lower_envelope: DiscreteMarginal<T>,
    pub upper_envelope: DiscreteMarginal<T>,
}

impl<T: Scalar> CdfBand<T> {
    pub fn new(
        lower_envelope: DiscreteMarginal<T>,
        upper_envelope: DiscreteMarginal<T>,
    ) -> Result<Self, TransportError> {
        let band = Self { lower_envelope, upper_envelope };
        band.check_order(0)?;
        Ok(band)
    }

    fn check_order(&self, axis: usize) -> Result<(), TransportError> {
        let tol = T::default_tol();
        for (t, _) in self
            .lower_envelope
            .atoms()
            .iter()
            .chain(self.upper_envelope.atoms().iter())
        {
            if self.lower_envelope.cdf(t) > self.upper_envelope.cdf(t) + tol.clone() {
                return Err(TransportError::EnvelopeOrder { axis, at: t.render() });
            }
        }
        Ok(())
    }

    /// Union of the two envelope supports, sorted.
    fn axis_points(&self) -> Vec<T> {
        let mut pts = self.lower_envelope.support();
        for p in self.upper_envelope.support() {
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        pts.sort_by(|a, b| a.total_cmp(b));
        pts
    }
}

/// A constrained Frechet class together with its marginal information.
///
/// `Exact` prescribes the marginals and a two-sided band on each orthant
/// value. `Order0` relaxes to sub-probability plans whose marginals are
/// setwise dominated, with upper orthant bounds only. `Order1Band` keeps
/// probability plans whose marginal cdfs lie in per-axis bands, with lower
/// orthant bounds only.
#[derive(Debug, Clone, PartialEq)]
pub enum FrechetClass<T> {
    Exact { marginals: Vec<DiscreteMarginal<T>> },
    Order0 { marginals: Vec<DiscreteMarginal<T>> },
    Order1Band { bands: Vec<CdfBand<T>> },
}

impl<T: Scalar> FrechetClass<T> {
    pub fn dimension(&self) -> usize {
        match self {
            FrechetClass::Exact { marginals } | FrechetClass::Order0 { marginals } => {
                marginals.len()
            }
            FrechetClass::Order1Band { bands } => bands.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FrechetClass::Exact { .. } => "exact",
            FrechetClass::Order0 { .. } => "order0",
            FrechetClass::Order1Band { .. } => "order1",
        }
    }

    /// The product grid the class lives on: marginal supports, or the union
    /// of envelope supports per axis.
    pub fn grid(&self) -> Result<ProductGrid<T>, TransportError> {
        let axes = match self {
            FrechetClass::Exact { marginals } | FrechetClass::Order0 { marginals } => {
                marginals.iter().map(|m| m.support()).collect()
            }
            FrechetClass::Order1Band { bands } => {
                bands.iter().map(|b| b.axis_points()).collect()
            }
        };
        Ok(ProductGrid::new(axes)?)
    }

    fn validate(&self) -> Result<(), TransportError> {
        let tol = T::default_tol();
        match self {
            FrechetClass::Exact { marginals } | FrechetClass::Order0 { marginals } => {
                for (axis, m) in marginals.iter().enumerate() {
                    if (m.total_mass() - T::one()).abs() > tol {
                        return Err(TransportError::MarginalNotProbability { axis });
                    }
                }
            }
            FrechetClass::Order1Band { bands } => {
                for (axis, b) in bands.iter().enumerate() {
                    for env in [&b.lower_envelope, &b.upper_envelope] {
                        if (env.total_mass() - T::one()).abs() > tol {
                            return Err(TransportError::MarginalNotProbability { axis });
                        }
                    }
                    b.check_order(axis)?;
                }
            }
        }
        Ok(())
    }

    fn check_payoff(&self, payoff: &PayoffGrid<T>) -> Result<(), TransportError> {
        let grid = self.grid()?;
        if grid.dimension() != payoff.grid().dimension() {
            return Err(TransportError::DimensionMismatch {
                expected: grid.dimension(),
                got: payoff.grid().dimension(),
            });
        }
        for j in 0..grid.dimension() {
            if grid.axis(j) != payoff.grid().axis(j) {
                return Err(TransportError::GridMismatch { axis: j });
            }
        }
        Ok(())
    }
}

/// Builds the primal LP: variables are nonnegative masses at grid points,
/// the objective maximizes the expected payoff, and the rows encode the
/// class membership conditions.
pub fn build_primal<T: Scalar>(
    class: &FrechetClass<T>,
    constraints: &ConstraintSet<T>,
    payoff: &PayoffGrid<T>,
) -> Result<LinearProgram<T>, TransportError> {
    class.validate()?;
    class.check_payoff(payoff)?;
    constraints
        .check_dimension(class.dimension())
        .map_err(|_| TransportError::DimensionMismatch {
            expected: class.dimension(),
            got: constraints.iter().map(|c| c.dimension()).max().unwrap_or(0),
        })?;
    let grid = payoff.grid();
    let n = grid.num_points();
    let mut lp = LinearProgram::nonnegative(Sense::Maximize, payoff.values().to_vec());

    // indicator row of a lower orthant
    let orthant_row = |corner: &[T]| -> Vec<T> {
        let mut row = vec![T::zero(); n];
        for idx in grid.indices() {
            let inside = idx
                .iter()
                .enumerate()
                .all(|(j, &i)| grid.axis(j)[i] <= corner[j]);
            if inside {
                row[grid.flat_index(&idx)] = T::one();
            }
        }
        row
    };
    // indicator row of { x : x_j = axis point i }
    let slice_row = |axis: usize, i: usize| -> Vec<T> {
        let mut row = vec![T::zero(); n];
        for idx in grid.indices() {
            if idx[axis] == i {
                row[grid.flat_index(&idx)] = T::one();
            }
        }
        row
    };

    match class {
        FrechetClass::Exact { marginals } => {
            for (axis, m) in marginals.iter().enumerate() {
                for (i, (_, mass)) in m.atoms().iter().enumerate() {
                    lp.push_row(slice_row(axis, i), Relation::Eq, mass.clone())?;
                }
            }
            for c in constraints.iter() {
                let row = orthant_row(c.corner());
                lp.push_row(row.clone(), Relation::Le, c.pi_upper().clone())?;
                lp.push_row(row, Relation::Ge, c.pi_lower().clone())?;
            }
        }
        FrechetClass::Order0 { marginals } => {
            // total mass <= 1 is implied by the atomwise domination rows
            for (axis, m) in marginals.iter().enumerate() {
                for (i, (_, mass)) in m.atoms().iter().enumerate() {
                    lp.push_row(slice_row(axis, i), Relation::Le, mass.clone())?;
                }
            }
            for c in constraints.iter() {
                lp.push_row(orthant_row(c.corner()), Relation::Le, c.pi_upper().clone())?;
            }
        }
        FrechetClass::Order1Band { bands } => {
            lp.push_row(vec![T::one(); n], Relation::Eq, T::one())?;
            for (axis, band) in bands.iter().enumerate() {
                for (i, t) in grid.axis(axis).iter().enumerate() {
                    // cumulative slice: all grid points with x_axis <= t
                    let mut row = vec![T::zero(); n];
                    for idx in grid.indices() {
                        if idx[axis] <= i {
                            row[grid.flat_index(&idx)] = T::one();
                        }
                    }
                    lp.push_row(row.clone(), Relation::Le, band.upper_envelope.cdf(t))?;
                    lp.push_row(row, Relation::Ge, band.lower_envelope.cdf(t))?;
                }
            }
            for c in constraints.iter() {
                lp.push_row(orthant_row(c.corner()), Relation::Ge, c.pi_lower().clone())?;
            }
        }
    }
    Ok(lp)
}

/// Superhedging portfolio: one step-function value per axis point (a short
/// leg `g_j` appears only in the order-1 variant), one coefficient per
/// orthant constraint, and the price.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgePortfolio<T> {
    pub variant: DualVariant,
    pub grid: ProductGrid<T>,
    pub axis_values: Vec<Vec<T>>,
    pub axis_values_short: Option<Vec<Vec<T>>>,
    pub coefficients: Vec<T>,
    pub price: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualVariant {
    Theta,
    Theta0,
    Theta1,
}

impl DualVariant {
    pub fn for_class<T: Scalar>(class: &FrechetClass<T>) -> Self {
        match class {
            FrechetClass::Exact { .. } => DualVariant::Theta,
            FrechetClass::Order0 { .. } => DualVariant::Theta0,
            FrechetClass::Order1Band { .. } => DualVariant::Theta1,
        }
    }
}

impl<T: Scalar> HedgePortfolio<T> {
    /// Payout of the portfolio at the grid point with the given multi-index.
    pub fn payout_at(&self, idx: &[usize], constraints: &ConstraintSet<T>) -> T {
        let mut v = T::zero();
        for (axis, &i) in idx.iter().enumerate() {
            v += self.axis_values[axis][i].clone();
            if let Some(short) = &self.axis_values_short {
                v -= short[axis][i].clone();
            }
        }
        let point = self.grid.point(idx);
        for (c, a) in constraints.iter().zip(&self.coefficients) {
            let inside = point.iter().zip(c.corner()).all(|(x, s)| x <= s);
            if inside {
                v += a.clone();
            }
        }
        v
    }

    /// Verifies domination of the payoff at every grid point plus the sign
    /// shape of the variant, within `tol`.
    pub fn verify(
        &self,
        payoff: &PayoffGrid<T>,
        constraints: &ConstraintSet<T>,
        tol: &T,
    ) -> Result<(), String> {
        for idx in self.grid.indices() {
            let lhs = self.payout_at(&idx, constraints);
            let rhs = payoff.values()[self.grid.flat_index(&idx)].clone();
            if lhs.clone() - rhs.clone() < -tol.clone() {
                return Err(format!(
                    "domination fails at index {idx:?}: {} < {}",
                    lhs.render(),
                    rhs.render()
                ));
            }
        }
        match self.variant {
            DualVariant::Theta => {}
            DualVariant::Theta0 => {
                for vals in &self.axis_values {
                    if vals.iter().any(|v| *v < -tol.clone()) {
                        return Err("negative marginal leg in a long-only hedge".into());
                    }
                }
                if self.coefficients.iter().any(|a| *a < -tol.clone()) {
                    return Err("negative orthant coefficient in a long-only hedge".into());
                }
            }
            DualVariant::Theta1 => {
                for legs in [Some(&self.axis_values), self.axis_values_short.as_ref()] {
                    let Some(legs) = legs else { continue };
                    for vals in legs {
                        for w in vals.windows(2) {
                            if w[1].clone() - w[0].clone() < -tol.clone() {
                                return Err("marginal leg is not nondecreasing".into());
                            }
                        }
                    }
                }
                if self.coefficients.iter().any(|a| *a > tol.clone()) {
                    return Err("positive orthant coefficient in the order-1 hedge".into());
                }
            }
        }
        Ok(())
    }
}

/// Internal layout of the dual LP's variable vector.
struct DualLayout {
    axis_offsets: Vec<usize>,
    axis_sizes: Vec<usize>,
    short_offsets: Vec<usize>, // Theta1 increments of g_j
    coeff_offset: usize,
    ncons: usize,
    variant: DualVariant,
}

fn build_dual_with_layout<T: Scalar>(
    class: &FrechetClass<T>,
    constraints: &ConstraintSet<T>,
    payoff: &PayoffGrid<T>,
) -> Result<(LinearProgram<T>, DualLayout), TransportError> {
    class.validate()?;
    class.check_payoff(payoff)?;
    constraints
        .check_dimension(class.dimension())
        .map_err(|_| TransportError::DimensionMismatch {
            expected: class.dimension(),
            got: constraints.iter().map(|c| c.dimension()).max().unwrap_or(0),
        })?;
    let grid = payoff.grid();
    let d = grid.dimension();
    let ncons = constraints.len();
    let variant = DualVariant::for_class(class);

    // variable layout
    let mut axis_offsets = Vec::with_capacity(d);
    let mut axis_sizes = Vec::with_capacity(d);
    let mut next = 0usize;
    for j in 0..d {
        axis_offsets.push(next);
        axis_sizes.push(grid.axis(j).len());
        next += grid.axis(j).len();
    }
    let mut short_offsets = Vec::new();
    if variant == DualVariant::Theta1 {
        // Theta1 axis block: base value + nondecreasing increments for the
        // long leg, then increments for the short leg (base normalized to 0)
        for j in 0..d {
            short_offsets.push(next);
            next += grid.axis(j).len().saturating_sub(1);
        }
    }
    let coeff_offset = next;
    let nvars = match variant {
        DualVariant::Theta => coeff_offset + 2 * ncons, // a+ then a-
        DualVariant::Theta0 | DualVariant::Theta1 => coeff_offset + ncons,
    };

    // objective: integrate each leg against its pricing measure
    let mut objective = vec![T::zero(); nvars];
    let mut bounds = vec![VarBound::NonNegative; nvars];
    match class {
        FrechetClass::Exact { marginals } => {
            for (j, m) in marginals.iter().enumerate() {
                for (i, (_, mass)) in m.atoms().iter().enumerate() {
                    objective[axis_offsets[j] + i] = mass.clone();
                    bounds[axis_offsets[j] + i] = VarBound::Free;
                }
            }
            for (i, c) in constraints.iter().enumerate() {
                objective[coeff_offset + 2 * i] = c.pi_upper().clone();
                objective[coeff_offset + 2 * i + 1] = -c.pi_lower().clone();
            }
        }
        FrechetClass::Order0 { marginals } => {
            for (j, m) in marginals.iter().enumerate() {
                for (i, (_, mass)) in m.atoms().iter().enumerate() {
                    objective[axis_offsets[j] + i] = mass.clone();
                }
            }
            for (i, c) in constraints.iter().enumerate() {
                objective[coeff_offset + i] = c.pi_upper().clone();
            }
        }
        FrechetClass::Order1Band { bands } => {
            // long leg f_j = base + cumulative increments, priced against the
            // stochastically larger envelope (the one with the lower cdf);
            // short leg g_j has base 0, priced against the other envelope
            for (j, band) in bands.iter().enumerate() {
                let axis = grid.axis(j);
                objective[axis_offsets[j]] = T::one(); // base of f_j
                bounds[axis_offsets[j]] = VarBound::Free;
                for i in 1..axis.len() {
                    objective[axis_offsets[j] + i] =
                        band.lower_envelope.upper_tail_mass(&axis[i]);
                    objective[short_offsets[j] + i - 1] =
                        -band.upper_envelope.upper_tail_mass(&axis[i]);
                }
            }
            for (i, c) in constraints.iter().enumerate() {
                // a_i <= 0 encoded as a_i = -ahat_i with ahat_i >= 0
                objective[coeff_offset + i] = -c.pi_lower().clone();
            }
        }
    }

    let mut lp = LinearProgram::new(Sense::Minimize, objective, bounds)?;

    // one domination row per grid point
    for idx in grid.indices() {
        let point = grid.point(&idx);
        let mut row = vec![T::zero(); nvars];
        match variant {
            DualVariant::Theta | DualVariant::Theta0 => {
                for (j, &i) in idx.iter().enumerate() {
                    row[axis_offsets[j] + i] = T::one();
                }
            }
            DualVariant::Theta1 => {
                for (j, &i) in idx.iter().enumerate() {
                    row[axis_offsets[j]] = T::one(); // base of f_j
                    for k in 1..=i {
                        row[axis_offsets[j] + k] = T::one(); // increments of f_j
                        row[short_offsets[j] + k - 1] = -T::one(); // increments of g_j
                    }
                }
            }
        }
        for (i, c) in constraints.iter().enumerate() {
            let inside = point.iter().zip(c.corner()).all(|(x, s)| x <= s);
            if !inside {
                continue;
            }
            match variant {
                DualVariant::Theta => {
                    row[coeff_offset + 2 * i] = T::one();
                    row[coeff_offset + 2 * i + 1] = -T::one();
                }
                DualVariant::Theta0 => row[coeff_offset + i] = T::one(),
                DualVariant::Theta1 => row[coeff_offset + i] = -T::one(),
            }
        }
        lp.push_row(row, Relation::Ge, payoff.values()[grid.flat_index(&idx)].clone())?;
    }

    let layout = DualLayout { axis_offsets, axis_sizes, short_offsets, coeff_offset, ncons, variant };
    Ok((lp, layout))
}

/// Builds the superhedging dual LP for the class: step-function legs per
/// axis plus orthant coefficients, one domination row per grid point, and
/// the asymmetric price objective.
pub fn build_dual<T: Scalar>(
    class: &FrechetClass<T>,
    constraints: &ConstraintSet<T>,
    payoff: &PayoffGrid<T>,
) -> Result<LinearProgram<T>, TransportError> {
    build_dual_with_layout(class, constraints, payoff).map(|(lp, _)| lp)
}

fn decode_hedge<T: Scalar>(
    solution_vec: &[T],
    layout: &DualLayout,
    grid: &ProductGrid<T>,
    price: T,
) -> HedgePortfolio<T> {
    let mut axis_values = Vec::with_capacity(layout.axis_offsets.len());
    let mut axis_values_short = None;
    match layout.variant {
        DualVariant::Theta | DualVariant::Theta0 => {
            for (off, size) in layout.axis_offsets.iter().zip(&layout.axis_sizes) {
                axis_values.push(solution_vec[*off..*off + size].to_vec());
            }
        }
        DualVariant::Theta1 => {
            let mut shorts = Vec::with_capacity(layout.axis_offsets.len());
            for (j, (off, size)) in layout.axis_offsets.iter().zip(&layout.axis_sizes).enumerate() {
                let mut f = Vec::with_capacity(*size);
                let mut g = Vec::with_capacity(*size);
                let mut facc = solution_vec[*off].clone();
                let mut gacc = T::zero();
                f.push(facc.clone());
                g.push(gacc.clone());
                for i in 1..*size {
                    facc += solution_vec[*off + i].clone();
                    gacc += solution_vec[layout.short_offsets[j] + i - 1].clone();
                    f.push(facc.clone());
                    g.push(gacc.clone());
                }
                axis_values.push(f);
                shorts.push(g);
            }
            axis_values_short = Some(shorts);
        }
    }
    let coefficients = (0..layout.ncons)
        .map(|i| match layout.variant {
            DualVariant::Theta => {
                solution_vec[layout.coeff_offset + 2 * i].clone()
                    - solution_vec[layout.coeff_offset + 2 * i + 1].clone()
            }
            DualVariant::Theta0 => solution_vec[layout.coeff_offset + i].clone(),
            DualVariant::Theta1 => -solution_vec[layout.coeff_offset + i].clone(),
        })
        .collect();
    HedgePortfolio {
        variant: layout.variant,
        grid: grid.clone(),
        axis_values,
        axis_values_short,
        coefficients,
        price,
    }
}

/// Joint outcome of solving the primal transport problem and its
/// superhedging dual for the same payoff: the common optimal value, an
/// optimal transport plan, and an optimal hedge.
#[derive(Debug, Clone)]
pub struct PriceBound<T> {
    pub value: T,
    pub plan: JointMeasure<T>,
    pub hedge: HedgePortfolio<T>,
    pub primal_value: T,
    pub dual_value: T,
}

/// Solves both sides and checks the gap: zero exactly in rational mode,
/// within `gap_tol` in float mode. An infeasible primal is reported as the
/// class being empty.
pub fn price_bound<T: Scalar>(
    class: &FrechetClass<T>,
    constraints: &ConstraintSet<T>,
    payoff: &PayoffGrid<T>,
    gap_tol: &T,
) -> Result<PriceBound<T>, TransportError> {
    let primal = build_primal(class, constraints, payoff)?;
    let psol = primal.solve()?;
    match psol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(TransportError::ClassEmpty(class.name())),
        LpStatus::Unbounded => unreachable!("transport mass is bounded by 1"),
    }
    let (dual, layout) = build_dual_with_layout(class, constraints, payoff)?;
    let dsol = dual.solve()?;
    if dsol.status != LpStatus::Optimal {
        // the dual of a feasible bounded primal is feasible and bounded
        return Err(TransportError::ClassEmpty(class.name()));
    }
    let gap = (psol.objective_value.clone() - dsol.objective_value.clone()).abs();
    if gap > *gap_tol {
        return Err(TransportError::DualityGap { gap: gap.render() });
    }
    let grid = payoff.grid();
    let masses = psol
        .primal
        .iter()
        .map(|m| if *m < T::zero() { T::zero() } else { m.clone() })
        .collect();
    let plan = JointMeasure::new(grid.clone(), masses)?;
    let hedge = decode_hedge(&dsol.primal, &layout, grid, dsol.objective_value.clone());
    Ok(PriceBound {
        value: psol.objective_value.clone(),
        plan,
        hedge,
        primal_value: psol.objective_value,
        dual_value: dsol.objective_value,
    })
}

/// Outcome of the uniform-strong-arbitrage check on the equality class.
#[derive(Debug, Clone)]
pub struct ArbitrageCheck<T> {
    pub arbitrage_free: bool,
    /// A member of the class when it is nonempty.
    pub witness: Option<JointMeasure<T>>,
    /// A portfolio dominating the constant 1 at nonpositive price when the
    /// class is empty.
    pub arbitrage: Option<HedgePortfolio<T>>,
}

/// The class with prescribed marginals and orthant bands is nonempty iff
/// there is no uniform strong arbitrage. Returns a witness plan in the
/// first case and an explicit arbitrage portfolio in the second.
pub fn check_no_uniform_strong_arbitrage<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
    constraints: &ConstraintSet<T>,
) -> Result<ArbitrageCheck<T>, TransportError> {
    let class = FrechetClass::Exact { marginals: marginals.to_vec() };
    let grid = class.grid()?;
    let zero_payoff = PayoffGrid::constant(grid.clone(), T::zero());
    let primal = build_primal(&class, constraints, &zero_payoff)?;
    let psol = primal.solve()?;
    if psol.status == LpStatus::Optimal {
        let masses = psol
            .primal
            .iter()
            .map(|m| if *m < T::zero() { T::zero() } else { m.clone() })
            .collect();
        let witness = JointMeasure::new(grid, masses)?;
        return Ok(ArbitrageCheck { arbitrage_free: true, witness: Some(witness), arbitrage: None });
    }

    // class empty: the superhedge LP for the constant payoff 1 is feasible
    // and unbounded below; walk the improving ray until the price is <= 0
    let one_payoff = PayoffGrid::constant(grid.clone(), T::one());
    let (dual, layout) = build_dual_with_layout(&class, constraints, &one_payoff)?;
    let dsol = dual.solve()?;
    let portfolio = match dsol.status {
        LpStatus::Unbounded => {
            let vertex = dsol.unbounded_vertex.as_ref().expect("ray carries its vertex");
            let ray = &dsol.primal;
            let vertex_price: T = dual
                .objective
                .iter()
                .zip(vertex)
                .map(|(c, x)| c.clone() * x.clone())
                .sum();
            let ray_price: T = dual
                .objective
                .iter()
                .zip(ray)
                .map(|(c, x)| c.clone() * x.clone())
                .sum();
            // minimization ray: ray_price < 0
            let t = if vertex_price > T::zero() {
                vertex_price.clone() / (-ray_price.clone())
            } else {
                T::zero()
            };
            let point: Vec<T> = vertex
                .iter()
                .zip(ray)
                .map(|(v, r)| v.clone() + t.clone() * r.clone())
                .collect();
            let price = vertex_price + t * ray_price;
            decode_hedge(&point, &layout, &grid, price)
        }
        // a finite dual optimum with an infeasible primal cannot happen for
        // this pair; treat a nonpositive optimal price as the certificate
        LpStatus::Optimal => decode_hedge(
            &dsol.primal,
            &layout,
            &grid,
            dsol.objective_value.clone(),
        ),
        LpStatus::Infeasible => unreachable!("superhedge LPs are always feasible"),
    };
    Ok(ArbitrageCheck { arbitrage_free: false, witness: None, arbitrage: Some(portfolio) })
}

/// Equality constraints pinning the law of the coordinatewise maximum: one
/// diagonal corner per atom of `nu_max` carrying its cdf value there.
pub fn max_distribution_constraints<T: Scalar>(
    nu_max: &DiscreteMarginal<T>,
    dimension: usize,
) -> ConstraintSet<T> {
    let constraints = nu_max
        .atoms()
        .iter()
        .map(|(t, _)| {
            crate::bounds::OrthantConstraint::equality(
                vec![t.clone(); dimension],
                nu_max.cdf(t),
            )
            .expect("cdf values are valid probabilities")
        })
        .collect();
    ConstraintSet::new(constraints)
}
