//! Seeded random instance generation. A joint measure with percent-unit
//! masses is sampled first and the marginals, orthant values, and cdf
//! envelopes are read off it, so every generated instance admits that
//! measure as a member of each class: feasible by construction, and exact
//! in both numeric modes since every quantity is a multiple of 1/100.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::bounds::{ConstraintSet, OrthantConstraint};
use crate::measures::{DiscreteMarginal, JointMeasure, ProductGrid};
use crate::numeric::{max2, min2, Scalar};
use crate::transport::CdfBand;

pub const MAX_ATOMS_PER_AXIS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("atoms per axis must lie in 1..={MAX_ATOMS_PER_AXIS} (got {0})")]
    BadAtomCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    pub dimension: usize,
    pub atoms_per_axis: usize,
    pub n_constraints: usize,
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance<T> {
    pub marginals: Vec<DiscreteMarginal<T>>,
    pub constraints: ConstraintSet<T>,
    pub bands: Vec<CdfBand<T>>,
    pub witness: JointMeasure<T>,
}

fn percent<T: Scalar>(units: u32) -> T {
    T::from_ratio(units as i64, 100)
}

fn distinct_sorted_points<T: Scalar>(rng: &mut ChaCha20Rng, count: usize) -> Vec<T> {
    let span = (3 * count).max(4) as i64;
    let mut picked: Vec<i64> = Vec::with_capacity(count);
    while picked.len() < count {
        let v = rng.gen_range(0..span);
        if !picked.contains(&v) {
            picked.push(v);
        }
    }
    picked.sort_unstable();
    picked.into_iter().map(T::from_int).collect()
}

/// Moves `share` hundredths of every atom's mass to one end of the support,
/// producing a cdf envelope that stays on the witness grid.
fn shifted_envelope<T: Scalar>(
    marginal: &DiscreteMarginal<T>,
    share_units: u32,
    toward_upper_end: bool,
) -> DiscreteMarginal<T> {
    let atoms = marginal.atoms();
    let share = percent::<T>(share_units);
    let mut masses: Vec<T> = atoms.iter().map(|(_, m)| m.clone()).collect();
    let mut moved = T::zero();
    for m in masses.iter_mut() {
        let take = m.clone() * share.clone();
        *m -= take.clone();
        moved += take;
    }
    let target = if toward_upper_end { masses.len() - 1 } else { 0 };
    masses[target] += moved;
    DiscreteMarginal::probability(
        atoms
            .iter()
            .map(|(p, _)| p.clone())
            .zip(masses)
            .collect(),
    )
    .expect("mass reshuffle preserves the total")
}

pub fn generate<T: Scalar>(params: &GenParams) -> Result<GeneratedInstance<T>, GenError> {
    if params.dimension == 0 {
        return Err(GenError::ZeroDimension);
    }
    if params.atoms_per_axis == 0 || params.atoms_per_axis > MAX_ATOMS_PER_AXIS {
        return Err(GenError::BadAtomCount(params.atoms_per_axis));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);

    let axes: Vec<Vec<T>> = (0..params.dimension)
        .map(|_| distinct_sorted_points(&mut rng, params.atoms_per_axis))
        .collect();
    let grid = ProductGrid::new(axes).expect("sorted distinct axes");

    // distribute 100 percent units over the cells
    let ncells = grid.num_points();
    let mut units = vec![0u32; ncells];
    for _ in 0..100 {
        units[rng.gen_range(0..ncells)] += 1;
    }
    let masses: Vec<T> = units.iter().map(|&u| percent(u)).collect();
    let witness = JointMeasure::new(grid.clone(), masses).expect("unit masses are valid");

    let marginals: Vec<DiscreteMarginal<T>> = (0..params.dimension)
        .map(|j| {
            let m = witness.marginal(j).expect("axis in range");
            DiscreteMarginal::probability(m.atoms().to_vec()).expect("projection has mass 1")
        })
        .collect();

    let mut constraints = Vec::with_capacity(params.n_constraints);
    for _ in 0..params.n_constraints {
        let corner: Vec<T> = (0..params.dimension)
            .map(|j| grid.axis(j)[rng.gen_range(0..grid.axis(j).len())].clone())
            .collect();
        let pi = witness.cdf(&corner).expect("corner has the grid dimension");
        let widen_units = [0u32, 5, 10][rng.gen_range(0..3)];
        let (lo, hi) = if widen_units == 0 {
            (pi.clone(), pi)
        } else {
            let w = percent::<T>(widen_units);
            (max2(pi.clone() - w.clone(), T::zero()), min2(pi + w, T::one()))
        };
        constraints.push(OrthantConstraint::new(corner, lo, hi).expect("clamped band"));
    }

    let bands = marginals
        .iter()
        .map(|m| {
            let lower = shifted_envelope(m, rng.gen_range(1..30), true);
            let upper = shifted_envelope(m, rng.gen_range(1..30), false);
            CdfBand::new(lower, upper).expect("shifts keep the cdf order")
        })
        .collect();

    Ok(GeneratedInstance {
        marginals,
        constraints: ConstraintSet::new(constraints),
        bands,
        witness,
    })
}
