//! Numerical laboratory for the two-dimensional inverse conductivity problem
//! with barely-continuous (log-modulus) coefficients.
//!
//! The crate builds, layer by layer, the machinery needed to study how the
//! Dirichlet-to-Neumann map of `div(gamma grad u) = 0` on the unit disk
//! controls the conductivity `gamma`:
//!
//! * [`modulus`] — moduli of continuity, the increasing spectral weight built
//!   from them, and square-Dini constants;
//! * [`field`] / [`grid`] — periodic complex fields, discrete Fourier
//!   analysis, the Beurling and Cauchy transforms as multipliers, and the
//!   characters `e_k`;
//! * [`spaces`] — weighted norms, shift moduli, sampled sup-seminorms, and
//!   the analytic oracles (oscillatory integrals, kernel decay, an
//!   interpolation inequality);
//! * [`beltrami`] — Neumann-series and fixed-point solvers producing complex
//!   geometric optics solutions, with decay, regularity, and recovery
//!   diagnostics;
//! * [`forward`] — the conductivity Dirichlet solver on the disk and
//!   Dirichlet-to-Neumann matrices with Sobolev-weighted operator norms;
//! * [`harness`] — conductivity generators, experiment runners, and CSV/JSON
//!   persistence behind the `calderon` command-line tool.
//!
//! See the crate examples for one runnable entry point per capability.

pub mod error;
pub mod grid;
pub mod modulus;
pub mod quad;
pub mod util;

mod spectral;

pub mod beltrami;
pub mod field;
pub mod forward;
pub mod harness;
pub mod spaces;

pub use error::{Error, Result};
pub use grid::GridSpec;
