//! Numerical toolkit for billiards inside a time-periodic, quartically
//! perturbed ellipse.
//!
//! The crate is organised bottom-up:
//!
//! * [`boundary`]: trigonometric-polynomial semi-axes and the moving curve.
//! * [`elliptic`]: complete integrals, Jacobi functions and the lattice sums
//!   `X(τ)`, `Y(τ)`.
//! * [`frozen`]: the static elliptic billiard map, its first integral and
//!   separatrices.
//! * [`dynmap`]: the full four-dimensional collision map solved from its
//!   implicit system, plus finite-difference linear response.
//! * [`perturbation`]: analytic first-order fields and free-flight lengths.
//! * [`melnikov`]: splitting functions, their series oracles and the
//!   scattering-domain predicate.
//! * [`inner`], [`scattering`]: the two maps on the cylinder of major-axis
//!   motions together with their approximating Hamiltonian flows.
//! * [`accelerator`]: the iterated function system that pumps energy.

// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accelerator;
pub mod boundary;
pub mod dynmap;
pub mod elliptic;
mod error;
pub mod frozen;
pub mod inner;
pub mod melnikov;
pub mod perturbation;
pub mod scattering;
mod solve;

pub use error::{Error, Result};
