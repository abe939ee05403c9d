//! Pseudospectral simulation toolkit for the 2D Zakharov-Kuznetsov (ZK)
//! and surface-electromigration (SEM) equations, paired with a numerical
//! harness for the estimates behind their unique-continuation theory:
//! Carleman inequalities, Muckenhoupt-weighted Riesz bounds, weighted
//! interpolation, and annulus-decay measurements.
//!
//! Module map:
//! - [`spectral`]: periodic grid, FFTs, Fourier multipliers, dealiasing;
//! - [`riesz`]: Riesz transforms, non-local SEM operators, Muckenhoupt
//!   `A_p` constants and operator-norm searches;
//! - [`solver`]: integrating-factor RK4 evolution of ZK/SEM, conserved
//!   quantities, the linearized difference equation and its residual;
//! - [`carleman`]: Carleman weight, cutoffs, and both sides of the weighted
//!   inequalities (Carleman, commutator positivity, persistence,
//!   interpolation);
//! - [`uniqueness`]: annulus norms, exponential decay fits and the
//!   two-solution contrast experiment.

pub mod bump;
pub mod carleman;
pub mod error;
pub mod field;
pub mod grid;
pub mod logsum;
pub mod riesz;
pub mod solver;
pub mod spectral;
pub mod uniqueness;

pub use error::{Error, ErrorClass, Result};
pub use field::{Field, SpectralField};
pub use grid::Grid2D;
pub use spectral::{apply_multiplier, dealias, inverse_transform, make_grid, transform, MultiplierKind};
