//! Generalized-α time integrators of order 2, 3 and general p for the linear
//! model problem `u' + A u = 0`, together with the spectral tooling that
//! certifies them: amplification matrices, stability-region scans, ρ∞
//! dissipation control and empirical order measurement.
//!
//! The crate is organised bottom-up:
//!
//! - [`numkit`]: tiny dense complex linear algebra (solve, eigenvalues,
//!   principal-minor sums) sized for p ≤ 12.
//! - [`schemes`]: parameter sets, γ-rules, the C(p) table, ρ∞ branches.
//! - [`amplification`]: the one-step matrices L, R and G = L⁻¹R.
//! - [`stability`]: unconditional-stability scans and ρ∞ verification.
//! - [`integrator`]: time marching with one implicit solve per step.
//! - [`orderlab`]: convergence slopes and recovery of C(p).
//! - [`cli`]: the `genalpha` command-line front end.

// Negated float comparisons reject NaN on purpose; the dense kernels index
// several arrays per loop.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod amplification;
pub mod cli;
pub mod integrator;
pub mod numkit;
pub mod orderlab;
pub mod schemes;
pub mod stability;

mod error;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use amplification::AmplificationPair;
pub use integrator::{LinearProblem, StateVector};
pub use numkit::{CMatrix, CVector};
pub use orderlab::ConvergenceReport;
pub use schemes::{RhoBranch, SchemeParams, Variant};
pub use stability::{StabilityMap, TSamples};
