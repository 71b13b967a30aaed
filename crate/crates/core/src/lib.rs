//! Monte Carlo laboratory for critical site percolation on the triangular lattice.
//!
//! The crate is organized around the objects a percolation experiment needs:
//!
//! * [`lattice`] — triangular-lattice geometry, planar embedding, hexagonal
//!   cells and finite regions;
//! * [`sampling`] — critical (p = 1/2) configurations with counter-based,
//!   replica-indexed randomness, plus exhaustive enumeration for oracles;
//! * [`clusters`] — union-find cluster labeling and normalized cluster
//!   measures;
//! * [`events`] — connection, arm, circuit and crossing event detectors;
//! * [`loops`] — interface loop tracing on the dual hexagonal lattice and
//!   the sphere/Fréchet/Hausdorff loop metrics;
//! * [`colorfield`] — the cluster-sign spin field, its correlation
//!   estimators, magnetization functionals and Dirichlet-eigenbasis norms;
//! * [`inference`] — estimators with error bars, power-law fits, exact
//!   brute-force oracles and the experiment engines driven by the CLI.
//!
//! Everything downstream of a `(seed, replica)` pair is deterministic and
//! independent of thread count.

pub mod clusters;
pub mod colorfield;
pub mod error;
pub mod events;
pub mod geom;
pub mod inference;
pub mod lattice;
pub mod loops;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Scalar type used by the simulation stack. The geometric and spectral
/// kernels are generic over [`Real`]; the drivers instantiate them here.
pub type Scalar = f64;

/// Planar point in the scalar type of the simulation stack.
pub type Point = geom::Vec2<Scalar>;

/// Exact probability as a reduced fraction, used by the enumeration oracles.
pub type Exact = num_rational::Ratio<i128>;
