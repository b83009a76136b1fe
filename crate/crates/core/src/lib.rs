//! Uniqueness of characteristic-function extrapolation from a neighborhood
//! of infinity.
//!
//! Given a density φ with characteristic function f, the question is whether
//! another characteristic function can agree with f on
//! `V_σ = { x : max_k |x_k| > σ }`. The crate provides:
//!
//! * [`densities`]: density families, supports and `f` by quadrature;
//! * [`lattice`]: shifted-lattice avoidance certificates that prove uniqueness;
//! * [`perturbation`]: the band-limited, zero-mean perturbation that yields a
//!   second density when the support is a large enough Euclidean ball;
//! * [`spectral`]: grid Fourier transforms, band-limit residuals and Poisson
//!   summation checks;
//! * [`oracles`]: sampling-series and uniqueness probes, and the end-to-end
//!   counterexample verifier.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densities;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod oracles;
pub mod perturbation;
pub mod quadrature;
pub mod spectral;

pub use densities::{char_fn, BallConvention, CharFn, DensitySpec, Family, QuadratureSettings, SupportSpec};
pub use error::{Error, Result};
pub use grid::{Axis, GridFunction};
