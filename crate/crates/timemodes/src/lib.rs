//! Orthonormal Laguerre energy modes on the half-line and the machinery
//! built on them: the Hamiltonian as a banded matrix, closed-form
//! time-representation wavefunctions, energy-time uncertainty products, and
//! time-of-arrival amplitudes for massless particles.
//!
//! Every closed form ships with an independent quadrature or Fourier oracle;
//! the `verify` subcommand of the companion CLI aggregates the residuals.

pub mod arrival;
mod dd;
pub mod error;
pub mod linalg;
pub mod modes;
pub mod operators;
pub mod quadrature;
pub mod specfun;
pub mod timerep;

pub use error::{Error, Result};
