//! Exact relativistic bound states of the Kratzer potential with a
//! Coulomb-type tensor interaction, in the spin- and pseudo-spin-symmetric
//! limits of the Dirac equation.
//!
//! - [`model`]: parameters, quantum numbers and coupling constants.
//! - [`specfun`]: Laguerre polynomials, terminating ₁F₁ series, ln Γ.
//! - [`spectrum`]: energy levels from the quantization condition and the
//!   closed-form Coulomb / non-relativistic limits.
//! - [`wavefun`]: spinor components, normalization and node counting.
//! - [`oracle`]: finite-difference eigensolver that checks solved levels
//!   without using any of the closed forms.
//! - [`cli`]: the `kratzer` command-line front end.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod specfun;
pub mod spectrum;
pub mod wavefun;

pub use error::{Error, Result};
pub use model::{couplings, CouplingSet, PotentialParams, QuantumNumbers, SymmetrySector};
pub use spectrum::{solve_energy, EnergyLevel, NoBoundReason, Outcome, SolverConfig};
