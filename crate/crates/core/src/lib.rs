//! Boltzmann lower bound on the uncertainty product for thermal states, and
//! the momentum / thermal-wavelength inequality that follows from it.
//!
//! * [`specfun`]: `g`, its inverse, `Gamma` and `w`.
//! * [`models`]: 1D Hamiltonians (closed form or finite-difference grid) in
//!   their energy eigenbasis.
//! * [`thermo`]: thermal statistics and the three bounds.
//! * [`spectral`]: the spectral measure of the position autocorrelation and
//!   the chain of identities that produces the bound.
//! * [`cli`]: the `thermobound` command-line front end.

// `!(a <= b)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod models;
pub mod numerics;
pub mod specfun;
pub mod spectral;
pub mod thermo;

pub use models::{SpectralModel, UnitSystem};
pub use specfun::ToleranceConfig;
