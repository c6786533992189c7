//! Finitely supported marginal and joint measures, cdf evaluation, and the
//! two stochastic-order predicates used by every class definition.

use std::fmt::Debug;

use thiserror::Error;

use crate::numeric::{min2, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("support points must be strictly increasing (offender at position {0})")]
    UnsortedSupport(usize),
    #[error("mass at position {0} is negative")]
    NegativeMass(usize),
    #[error("total mass {0} exceeds 1")]
    MassExceedsOne(String),
    #[error("total mass {0} is not 1 but a probability measure was required")]
    NotProbability(String),
    #[error("support must be nonempty")]
    EmptySupport,
    #[error("axis index {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mass vector has {got} entries but the grid has {expected} points")]
    MassCountMismatch { expected: usize, got: usize },
}

/// A finitely supported (sub-)probability measure on the real line.
///
/// Atoms are kept sorted by support point; masses are nonnegative and sum
/// to at most 1 (exactly 1 when constructed with [`DiscreteMarginal::probability`]).
#[derive(Debug, Clone)]
pub struct DiscreteMarginal<T> {
    atoms: Vec<(T, T)>,
    require_probability: bool,
}

/// Two marginals are the same measure when their atoms agree; the
/// probability flag is a construction-time requirement, not identity.
impl<T: PartialEq> PartialEq for DiscreteMarginal<T> {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl<T: Scalar> DiscreteMarginal<T> {
    pub fn new(atoms: Vec<(T, T)>, require_probability: bool) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::EmptySupport);
        }
        for i in 0..atoms.len() {
            if atoms[i].1 < T::zero() {
                return Err(MeasureError::NegativeMass(i));
            }
            if i > 0 && atoms[i - 1].0 >= atoms[i].0 {
                return Err(MeasureError::UnsortedSupport(i));
            }
        }
        let total: T = atoms.iter().map(|(_, m)| m.clone()).sum();
        let tol = T::default_tol();
        if require_probability {
            if (total.clone() - T::one()).abs() > tol {
                return Err(MeasureError::NotProbability(total.render()));
            }
        } else if total.clone() - T::one() > tol {
            return Err(MeasureError::MassExceedsOne(total.render()));
        }
        Ok(Self { atoms, require_probability })
    }

    /// A probability measure; total mass must be 1.
    pub fn probability(atoms: Vec<(T, T)>) -> Result<Self, MeasureError> {
        Self::new(atoms, true)
    }

    /// A sub-probability measure; total mass must be at most 1.
    pub fn sub_probability(atoms: Vec<(T, T)>) -> Result<Self, MeasureError> {
        Self::new(atoms, false)
    }

    pub fn point_mass(point: T) -> Self {
        Self { atoms: vec![(point, T::one())], require_probability: true }
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn support(&self) -> Vec<T> {
        self.atoms.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn is_probability_required(&self) -> bool {
        self.require_probability
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().map(|(_, m)| m.clone()).sum()
    }

    /// Right-continuous cdf: the mass placed at points `<= t`.
    pub fn cdf(&self, t: &T) -> T {
        self.atoms
            .iter()
            .take_while(|(p, _)| p <= t)
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// Mass of the half-open interval `(lo, hi]`; zero when `lo >= hi`.
    pub fn interval_mass(&self, lo: &T, hi: &T) -> T {
        if lo >= hi {
            return T::zero();
        }
        self.atoms
            .iter()
            .filter(|(p, _)| p > lo && p <= hi)
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// Mass of the closed upper tail `[t, infinity)`.
    pub fn upper_tail_mass(&self, t: &T) -> T {
        self.atoms
            .iter()
            .filter(|(p, _)| p >= t)
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// Mass placed exactly at `point` (zero off the support).
    pub fn mass_at(&self, point: &T) -> T {
        self.atoms
            .iter()
            .find(|(p, _)| p == point)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(T::zero)
    }

    /// Scales every mass by `factor` (which must keep the measure valid).
    pub fn scaled(&self, factor: &T) -> Result<Self, MeasureError> {
        let atoms = self
            .atoms
            .iter()
            .map(|(p, m)| (p.clone(), m.clone() * factor.clone()))
            .collect();
        Self::new(atoms, false)
    }
}

/// 0-th order stochastic dominance for discrete measures: every Borel set
/// gets at most as much mass under `a` as under `b`. Equivalently, `a`'s
/// mass at each point is at most `b`'s mass there; mass of `a` off the
/// support of `b` means `false`.
pub fn dominates_order0<T: Scalar>(a: &DiscreteMarginal<T>, b: &DiscreteMarginal<T>) -> bool {
    a.atoms().iter().all(|(p, m)| *m <= b.mass_at(p))
}

/// First-order comparison in the cdf-pointwise convention: true iff the cdf
/// of `a` is at most the cdf of `b` at every breakpoint of either support.
/// Both inputs must be probability measures.
pub fn dominates_order1<T: Scalar>(a: &DiscreteMarginal<T>, b: &DiscreteMarginal<T>) -> bool {
    let tol = T::default_tol();
    a.atoms()
        .iter()
        .chain(b.atoms().iter())
        .all(|(p, _)| a.cdf(p) <= b.cdf(p) + tol.clone())
}

/// A finite product grid in `R^d`: one strictly increasing axis per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGrid<T> {
    axes: Vec<Vec<T>>,
}

impl<T: Scalar> ProductGrid<T> {
    pub fn new(axes: Vec<Vec<T>>) -> Result<Self, MeasureError> {
        if axes.is_empty() {
            return Err(MeasureError::EmptySupport);
        }
        for axis in &axes {
            if axis.is_empty() {
                return Err(MeasureError::EmptySupport);
            }
            for i in 1..axis.len() {
                if axis[i - 1] >= axis[i] {
                    return Err(MeasureError::UnsortedSupport(i));
                }
            }
        }
        Ok(Self { axes })
    }

    /// The product of the supports of the given marginals.
    pub fn from_marginals(marginals: &[DiscreteMarginal<T>]) -> Result<Self, MeasureError> {
        Self::new(marginals.iter().map(|m| m.support()).collect())
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<T>] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> &[T] {
        &self.axes[j]
    }

    pub fn num_points(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    /// Row-major flat index of a multi-index.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (j, &i) in idx.iter().enumerate() {
            flat = flat * self.axes[j].len() + i;
        }
        flat
    }

    /// Iterates over all multi-indices in row-major order.
    pub fn indices(&self) -> GridIndexIter {
        GridIndexIter {
            sizes: self.axes.iter().map(|a| a.len()).collect(),
            next: Some(vec![0; self.axes.len()]),
        }
    }

    pub fn point(&self, idx: &[usize]) -> Vec<T> {
        idx.iter().enumerate().map(|(j, &i)| self.axes[j][i].clone()).collect()
    }
}

pub struct GridIndexIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for GridIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.clone()?;
        let mut bump = current.clone();
        let mut done = true;
        for j in (0..bump.len()).rev() {
            bump[j] += 1;
            if bump[j] < self.sizes[j] {
                done = false;
                break;
            }
            bump[j] = 0;
        }
        self.next = if done { None } else { Some(bump) };
        Some(current)
    }
}

/// Nonnegative masses on a product grid with total mass at most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasure<T> {
    grid: ProductGrid<T>,
    masses: Vec<T>,
}

impl<T: Scalar> JointMeasure<T> {
    pub fn new(grid: ProductGrid<T>, masses: Vec<T>) -> Result<Self, MeasureError> {
        if masses.len() != grid.num_points() {
            return Err(MeasureError::MassCountMismatch {
                expected: grid.num_points(),
                got: masses.len(),
            });
        }
        let tol = T::default_tol();
        for (i, m) in masses.iter().enumerate() {
            if *m < -tol.clone() {
                return Err(MeasureError::NegativeMass(i));
            }
        }
        let total: T = masses.iter().cloned().sum();
        if total.clone() - T::one() > tol {
            return Err(MeasureError::MassExceedsOne(total.render()));
        }
        Ok(Self { grid, masses })
    }

    pub fn zero(grid: ProductGrid<T>) -> Self {
        let n = grid.num_points();
        Self { grid, masses: vec![T::zero(); n] }
    }

    pub fn grid(&self) -> &ProductGrid<T> {
        &self.grid
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }

    pub fn total_mass(&self) -> T {
        self.masses.iter().cloned().sum()
    }

    /// Joint cdf: the mass of grid points componentwise `<= x`.
    pub fn cdf(&self, x: &[T]) -> Result<T, MeasureError> {
        if x.len() != self.dimension() {
            return Err(MeasureError::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        let mut total = T::zero();
        for idx in self.grid.indices() {
            let inside = idx
                .iter()
                .enumerate()
                .all(|(j, &i)| self.grid.axis(j)[i] <= x[j]);
            if inside {
                total += self.masses[self.grid.flat_index(&idx)].clone();
            }
        }
        Ok(total)
    }

    /// Mass of the lower orthant with the given corner; identical to [`cdf`](Self::cdf).
    pub fn lower_orthant_mass(&self, corner: &[T]) -> Result<T, MeasureError> {
        self.cdf(corner)
    }

    /// Projection of the masses onto axis `axis` (0-based).
    pub fn marginal(&self, axis: usize) -> Result<DiscreteMarginal<T>, MeasureError> {
        if axis >= self.dimension() {
            return Err(MeasureError::AxisOutOfRange { axis, dim: self.dimension() });
        }
        let mut sums = vec![T::zero(); self.grid.axis(axis).len()];
        for idx in self.grid.indices() {
            sums[idx[axis]] += self.masses[self.grid.flat_index(&idx)].clone();
        }
        let atoms = self
            .grid
            .axis(axis)
            .iter()
            .cloned()
            .zip(sums)
            // float LP output can carry harmless -1e-18 dust
            .map(|(p, m)| (p, if m < T::zero() { T::zero() } else { m }))
            .collect();
        DiscreteMarginal::sub_probability(atoms)
    }

    /// Expectation of a grid-sampled function (values in row-major order).
    pub fn expectation(&self, values: &[T]) -> Result<T, MeasureError> {
        if values.len() != self.masses.len() {
            return Err(MeasureError::MassCountMismatch {
                expected: self.masses.len(),
                got: values.len(),
            });
        }
        Ok(self
            .masses
            .iter()
            .zip(values)
            .map(|(m, v)| m.clone() * v.clone())
            .sum())
    }

    /// Materializes a joint cdf `H` into the measure with those cdf values,
    /// via inclusion-exclusion over the grid cells. Fails when `H` is not
    /// d-increasing (some cell would get negative mass).
    pub fn from_cdf(
        grid: ProductGrid<T>,
        mut cdf: impl FnMut(&[T]) -> T,
    ) -> Result<Self, MeasureError> {
        let d = grid.dimension();
        let tol = T::default_tol();
        let mut masses = vec![T::zero(); grid.num_points()];
        for idx in grid.indices() {
            // alternating sum of H over the 2^d corners of the cell below idx
            let mut mass = T::zero();
            for bits in 0..(1usize << d) {
                let mut corner = Vec::with_capacity(d);
                let mut skip = false;
                let mut sign_neg = false;
                for (j, &i) in idx.iter().enumerate() {
                    if bits >> j & 1 == 0 {
                        corner.push(grid.axis(j)[i].clone());
                    } else {
                        if i == 0 {
                            skip = true; // H vanishes below the smallest axis point
                            break;
                        }
                        corner.push(grid.axis(j)[i - 1].clone());
                        sign_neg = !sign_neg;
                    }
                }
                if skip {
                    continue;
                }
                let v = cdf(&corner);
                if sign_neg {
                    mass -= v;
                } else {
                    mass += v;
                }
            }
            if mass < T::zero() {
                if mass.clone().abs() > tol {
                    return Err(MeasureError::NegativeMass(grid.flat_index(&idx)));
                }
                mass = T::zero();
            }
            masses[grid.flat_index(&idx)] = mass;
        }
        Self::new(grid, masses)
    }
}

/// The comonotone coupling of the given probability marginals: the joint
/// measure whose cdf is the pointwise minimum of the marginal cdfs.
pub fn comonotone_coupling<T: Scalar>(
    marginals: &[DiscreteMarginal<T>],
) -> Result<JointMeasure<T>, MeasureError> {
    let grid = ProductGrid::from_marginals(marginals)?;
    JointMeasure::from_cdf(grid, |x| {
        x.iter()
            .zip(marginals)
            .map(|(t, m)| m.cdf(t))
            .reduce(min2)
            .expect("nonempty dimension")
    })
}
