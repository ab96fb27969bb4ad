//! Pseudospectral simulation of the generalized derivative nonlinear
//! Schrödinger equation `i u_t + i|u|^{2σ} u_x + u_xx = 0` on the circle,
//! together with a harness that checks its conservation laws and a priori
//! inequalities numerically.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod invariants;
pub mod io;
pub mod model;
pub mod spectral;

pub use error::{GdnlsError, Result};
pub use integrator::{evolve, step, SolverConfig, Termination, Trajectory};
pub use invariants::InvariantRecord;
pub use model::ModelParams;
pub use spectral::{Cutoff, SobolevIndex, SpectralField};
