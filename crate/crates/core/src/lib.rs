//! Numerical laboratory for the energy-critical quintic NLS on periodic tori
//! and its derivation from few-body bosonic quantum dynamics.
//!
//! The crate is organised by subsystem:
//!
//! * [`spectral`]: grids, transforms, sharp Littlewood–Paley projectors,
//!   Sobolev weights, Dirichlet kernels and Bernstein ratios.
//! * [`nls`]: split-step solver for `i∂ₜφ = −Δφ + b₀|φ|⁴φ`, conserved
//!   quantities, the low/high energy split and frequency-localization
//!   diagnostics.
//! * [`manybody`]: exact propagation of small bosonic systems with a rescaled
//!   three-body interaction, energy moments and the stability-of-matter check.
//! * [`marginals`]: reduced density matrices, trace distance, BBGKY and GP
//!   hierarchy residuals, the HUFL check and the propagation-of-chaos
//!   experiment.
//! * [`combinatorics`]: collapse maps, signed Duhamel expansions, the marking
//!   of quintic nodes and the unclogged/congested classification.
//! * [`probes`]: empirical constants for the Strichartz, bilinear Strichartz,
//!   refined Sobolev, multilinear and approximation-of-identity inequalities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod manybody;
pub mod marginals;
pub mod nls;
pub mod probes;
pub mod random;
pub mod spectral;

pub use error::{LabError, Result};
pub use field::{Spectrum, TorusField};
pub use grid::GridSpec;
pub use num_complex::Complex64 as C64;
