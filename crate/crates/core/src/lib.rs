//! Bounds on joint-distribution functionals under marginal and dependence
//! uncertainty, computed exactly on finitely supported measures: closed-form
//! improved Frechet-Hoeffding envelopes, transport LPs over three constrained
//! Frechet classes with superhedging duals, an explicit box-payoff hedge
//! decomposition in dimension 2, and attainment/counterexample machinery.
//!
//! All arithmetic is generic over [`numeric::Scalar`], instantiated either
//! with `BigRational` (exact mode) or `f64` (float mode, global tolerance
//! 1e-9). Every type is an immutable value after construction and every
//! operation is pure, so concurrent use needs no synchronization.

pub mod bounds;
pub mod box_hedge;
pub mod constructions;
pub mod instancegen;
pub mod lp;
pub mod measures;
pub mod numeric;
pub mod transport;

pub use bounds::{ConstraintSet, OrthantConstraint};
pub use measures::{DiscreteMarginal, JointMeasure, ProductGrid};
pub use numeric::Scalar;
