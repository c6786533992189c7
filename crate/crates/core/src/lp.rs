//! Dense linear-program solver used as the brute-force oracle for every
//! duality and sharpness claim. Two-phase primal simplex with Bland's
//! anti-cycling rule; instances are tiny, so robustness wins over speed.
//! Exact in rational mode; float mode uses the global 1e-9 tolerance for
//! pivoting and status decisions.

use thiserror::Error;

use crate::numeric::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("row {row} has {got} coefficients but the objective has {expected}")]
    RowWidthMismatch { row: usize, expected: usize, got: usize },
    #[error("{got} variable bounds for {expected} objective coefficients")]
    BoundsLengthMismatch { expected: usize, got: usize },
    #[error("non-finite coefficient in linear program")]
    NonFinite,
    #[error("simplex iteration limit exceeded")]
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Per-variable bound: lower bound 0 with no upper bound, or fully free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// A dense LP in inequality form over `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub sense: Sense,
    pub objective: Vec<T>,
    pub rows: Vec<LpRow<T>>,
    pub bounds: Vec<VarBound>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver outcome. For `Optimal`, `primal` and `dual` are certificates:
/// the primal is feasible and the dual multipliers (one per row) satisfy
/// `sum_i dual[i] * rhs[i] == objective_value`, exactly in rational mode.
/// For `Unbounded`, `primal` carries an improving ray and
/// `unbounded_vertex` the feasible point it starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub objective_value: T,
    pub primal: Vec<T>,
    pub dual: Vec<T>,
    pub unbounded_vertex: Option<Vec<T>>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(sense: Sense, objective: Vec<T>, bounds: Vec<VarBound>) -> Result<Self, LpError> {
        if objective.len() != bounds.len() {
            return Err(LpError::BoundsLengthMismatch {
                expected: objective.len(),
                got: bounds.len(),
            });
        }
        Ok(Self { sense, objective, rows: Vec::new(), bounds })
    }

    /// All variables nonnegative.
    pub fn nonnegative(sense: Sense, objective: Vec<T>) -> Self {
        let n = objective.len();
        Self { sense, objective, rows: Vec::new(), bounds: vec![VarBound::NonNegative; n] }
    }

    pub fn push_row(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> Result<(), LpError> {
        if coeffs.len() != self.objective.len() {
            return Err(LpError::RowWidthMismatch {
                row: self.rows.len(),
                expected: self.objective.len(),
                got: coeffs.len(),
            });
        }
        self.rows.push(LpRow { coeffs, relation, rhs });
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// `sum_i dual[i] * rhs[i]`; equals the optimum at an optimal dual.
    pub fn dual_objective(&self, dual: &[T]) -> T {
        self.rows
            .iter()
            .zip(dual)
            .map(|(r, y)| r.rhs.clone() * y.clone())
            .sum()
    }

    pub fn solve(&self) -> Result<LpSolution<T>, LpError> {
        self.solve_with_tol(&T::default_tol())
    }

    pub fn solve_with_tol(&self, tol: &T) -> Result<LpSolution<T>, LpError> {
        Simplex::prepare(self)?.run(tol)
    }
}

/// Internal standard form: maximize over equality rows with all variables
/// nonnegative (free user variables are split into positive/negative parts).
struct Simplex<'a, T> {
    lp: &'a LinearProgram<T>,
    // user variable -> internal columns with sign (true = negated part)
    colmap: Vec<Vec<(usize, bool)>>,
    ncols: usize,
    obj: Vec<T>,
    tableau: Vec<Vec<T>>, // m rows of length ncols + 1 (rhs last)
    basis: Vec<usize>,
    id_col: Vec<usize>,   // per row: its unit column (slack or artificial)
    artificial: Vec<bool>, // per column
    flipped: Vec<bool>,   // per row: whether the user row was negated
}

impl<'a, T: Scalar> Simplex<'a, T> {
    fn prepare(lp: &'a LinearProgram<T>) -> Result<Self, LpError> {
        if lp.objective.len() != lp.bounds.len() {
            return Err(LpError::BoundsLengthMismatch {
                expected: lp.objective.len(),
                got: lp.bounds.len(),
            });
        }
        let finite = lp
            .objective
            .iter()
            .chain(lp.rows.iter().flat_map(|r| r.coeffs.iter().chain(std::iter::once(&r.rhs))))
            .all(|v| v.to_f64().is_finite() || T::EXACT);
        if !finite {
            return Err(LpError::NonFinite);
        }

        let mut colmap = Vec::with_capacity(lp.num_vars());
        let mut nstruct = 0;
        for b in &lp.bounds {
            match b {
                VarBound::NonNegative => {
                    colmap.push(vec![(nstruct, false)]);
                    nstruct += 1;
                }
                VarBound::Free => {
                    colmap.push(vec![(nstruct, false), (nstruct + 1, true)]);
                    nstruct += 2;
                }
            }
        }

        let m = lp.num_rows();
        // count extra columns: one slack per inequality row, one artificial
        // per row that ends up Ge/Eq after sign normalization
        let mut relations = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        for row in &lp.rows {
            let flip = row.rhs < T::zero();
            let rel = match (row.relation, flip) {
                (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
                (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
                (Relation::Eq, _) => Relation::Eq,
            };
            relations.push(rel);
            flipped.push(flip);
        }
        let nslack = relations.iter().filter(|r| **r != Relation::Eq).count();
        let nart = relations.iter().filter(|r| **r != Relation::Le).count();
        let ncols = nstruct + nslack + nart;

        let mut tableau = vec![vec![T::zero(); ncols + 1]; m];
        let mut basis = vec![0usize; m];
        let mut id_col = vec![0usize; m];
        let mut artificial = vec![false; ncols];

        let mut next = nstruct;
        for (r, row) in lp.rows.iter().enumerate() {
            for (uvar, coef) in row.coeffs.iter().enumerate() {
                for &(col, neg) in &colmap[uvar] {
                    let mut v = coef.clone();
                    if neg {
                        v = -v;
                    }
                    if flipped[r] {
                        v = -v;
                    }
                    tableau[r][col] = v;
                }
            }
            tableau[r][ncols] = if flipped[r] { -row.rhs.clone() } else { row.rhs.clone() };
            match relations[r] {
                Relation::Le => {
                    tableau[r][next] = T::one();
                    basis[r] = next;
                    id_col[r] = next;
                    next += 1;
                }
                Relation::Ge => {
                    tableau[r][next] = -T::one();
                    next += 1;
                }
                Relation::Eq => {}
            }
        }
        // artificial columns for Ge/Eq rows
        for r in 0..m {
            if relations[r] != Relation::Le {
                tableau[r][next] = T::one();
                basis[r] = next;
                id_col[r] = next;
                artificial[next] = true;
                next += 1;
            }
        }
        debug_assert_eq!(next, ncols);

        let mut obj = vec![T::zero(); ncols];
        for (uvar, coef) in lp.objective.iter().enumerate() {
            let c = match lp.sense {
                Sense::Maximize => coef.clone(),
                Sense::Minimize => -coef.clone(),
            };
            for &(col, neg) in &colmap[uvar] {
                obj[col] = if neg { -c.clone() } else { c.clone() };
            }
        }

        Ok(Self { lp, colmap, ncols, obj, tableau, basis, id_col, artificial, flipped })
    }

    /// Reduced-cost row `z_j - c_j` for the cost vector, objective value last.
    fn cost_row(&self, costs: &[T]) -> Vec<T> {
        let mut row = vec![T::zero(); self.ncols + 1];
        for (j, slot) in row.iter_mut().enumerate() {
            let z: T = self
                .tableau
                .iter()
                .zip(&self.basis)
                .map(|(trow, &b)| costs[b].clone() * trow[j].clone())
                .sum();
            *slot = if j < self.ncols { z - costs[j].clone() } else { z };
        }
        row
    }

    fn pivot(&mut self, r: usize, j: usize, cost_rows: &mut [&mut Vec<T>]) {
        let pivot = self.tableau[r][j].clone();
        for v in self.tableau[r].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        let prow = self.tableau[r].clone();
        for (rr, row) in self.tableau.iter_mut().enumerate() {
            if rr == r {
                continue;
            }
            let factor = row[j].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= factor.clone() * pv.clone();
            }
        }
        for row in cost_rows.iter_mut() {
            let factor = row[j].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= factor.clone() * pv.clone();
            }
        }
        self.basis[r] = j;
    }

    /// Bland entering rule: smallest admissible column with negative reduced cost.
    fn entering(&self, cost: &[T], tol: &T, allow_artificial: bool) -> Option<usize> {
        (0..self.ncols)
            .find(|&j| (allow_artificial || !self.artificial[j]) && cost[j] < -tol.clone())
    }

    /// Bland leaving rule: minimum ratio, ties broken by smallest basic index.
    fn leaving(&self, j: usize, tol: &T) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for r in 0..self.tableau.len() {
            let a = self.tableau[r][j].clone();
            if a <= *tol {
                continue;
            }
            let ratio = self.tableau[r][self.ncols].clone() / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio
                        || (ratio == bratio && self.basis[r] < self.basis[br])
                    {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn run(mut self, tol: &T) -> Result<LpSolution<T>, LpError> {
        let iter_cap = 2000 + 200 * (self.ncols + 1) * (self.tableau.len() + 1);

        // phase 1: drive the artificial variables to zero
        if self.artificial.iter().any(|&a| a) {
            let costs1: Vec<T> = (0..self.ncols)
                .map(|j| if self.artificial[j] { -T::one() } else { T::zero() })
                .collect();
            let mut cost1 = self.cost_row(&costs1);
            let mut cost2 = self.cost_row(&self.negated_internal_obj());
            let mut iters = 0;
            while let Some(j) = self.entering(&cost1, tol, true) {
                let r = self.leaving(j, tol).expect("phase-1 objective is bounded");
                self.pivot(r, j, &mut [&mut cost1, &mut cost2]);
                iters += 1;
                if iters > iter_cap {
                    return Err(LpError::IterationLimit);
                }
            }
            if cost1[self.ncols] < -tol.clone() {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    objective_value: T::zero(),
                    primal: Vec::new(),
                    dual: Vec::new(),
                    unbounded_vertex: None,
                });
            }
            // pivot basic artificials out where a structural pivot exists
            for r in 0..self.tableau.len() {
                if !self.artificial[self.basis[r]] {
                    continue;
                }
                let col = (0..self.ncols).find(|&j| {
                    !self.artificial[j] && self.tableau[r][j].clone().abs() > *tol
                });
                if let Some(j) = col {
                    self.pivot(r, j, &mut [&mut cost1, &mut cost2]);
                }
            }
            self.phase2(cost2, tol, iter_cap)
        } else {
            let cost2 = self.cost_row(&self.negated_internal_obj());
            self.phase2(cost2, tol, iter_cap)
        }
    }

    // cost_row computes z - c; pass the internal objective as the cost vector
    fn negated_internal_obj(&self) -> Vec<T> {
        self.obj.clone()
    }

    fn phase2(mut self, mut cost2: Vec<T>, tol: &T, iter_cap: usize) -> Result<LpSolution<T>, LpError> {
        let mut iters = 0;
        loop {
            let Some(j) = self.entering(&cost2, tol, false) else {
                return Ok(self.extract_optimal(&cost2));
            };
            let Some(r) = self.leaving(j, tol) else {
                return Ok(self.extract_unbounded(j));
            };
            self.pivot(r, j, &mut [&mut cost2]);
            iters += 1;
            if iters > iter_cap {
                return Err(LpError::IterationLimit);
            }
        }
    }

    fn internal_point(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            x[b] = self.tableau[r][self.ncols].clone();
        }
        x
    }

    fn to_user_vector(&self, internal: &[T]) -> Vec<T> {
        self.colmap
            .iter()
            .map(|cols| {
                cols.iter()
                    .map(|&(col, neg)| {
                        if neg {
                            -internal[col].clone()
                        } else {
                            internal[col].clone()
                        }
                    })
                    .sum()
            })
            .collect()
    }

    fn extract_optimal(self, cost2: &[T]) -> LpSolution<T> {
        let primal = self.to_user_vector(&self.internal_point());
        let objective_value: T = self
            .lp
            .objective
            .iter()
            .zip(&primal)
            .map(|(c, x)| c.clone() * x.clone())
            .sum();
        let mut dual = Vec::with_capacity(self.lp.num_rows());
        for r in 0..self.lp.num_rows() {
            let mut y = cost2[self.id_col[r]].clone();
            if self.flipped[r] {
                y = -y;
            }
            if self.lp.sense == Sense::Minimize {
                y = -y;
            }
            dual.push(y);
        }
        LpSolution {
            status: LpStatus::Optimal,
            objective_value,
            primal,
            dual,
            unbounded_vertex: None,
        }
    }

    fn extract_unbounded(self, j: usize) -> LpSolution<T> {
        let mut dir = vec![T::zero(); self.ncols];
        dir[j] = T::one();
        for (r, &b) in self.basis.iter().enumerate() {
            if b != j {
                dir[b] = -self.tableau[r][j].clone();
            }
        }
        let vertex = self.to_user_vector(&self.internal_point());
        let ray = self.to_user_vector(&dir);
        let objective_value: T = self
            .lp
            .objective
            .iter()
            .zip(&vertex)
            .map(|(c, x)| c.clone() * x.clone())
            .sum();
        LpSolution {
            status: LpStatus::Unbounded,
            objective_value,
            primal: ray,
            dual: Vec::new(),
            unbounded_vertex: Some(vertex),
        }
    }
}

/// Checks primal feasibility of a point against every row and bound.
pub fn primal_feasible<T: Scalar>(lp: &LinearProgram<T>, x: &[T], tol: &T) -> bool {
    if x.len() != lp.num_vars() {
        return false;
    }
    let bounds_ok = lp
        .bounds
        .iter()
        .zip(x)
        .all(|(b, v)| *b == VarBound::Free || *v >= -tol.clone());
    bounds_ok
        && lp.rows.iter().all(|row| {
            let lhs: T = row
                .coeffs
                .iter()
                .zip(x)
                .map(|(c, v)| c.clone() * v.clone())
                .sum();
            match row.relation {
                Relation::Le => lhs - row.rhs.clone() <= tol.clone(),
                Relation::Ge => row.rhs.clone() - lhs <= tol.clone(),
                Relation::Eq => (lhs - row.rhs.clone()).abs() <= tol.clone(),
            }
        })
}
