//! Simulation library for open quantum systems driven by a non-Gaussian
//! (Poisson white noise) bath.
//!
//! The library is organised in layers:
//!
//! * [`operator`] — dense complex operator algebra: Hermitian
//!   eigendecomposition, operator functions, matrix exponentials,
//!   Kronecker products and Liouville-space vectorization.
//! * [`lindblad`] — GKSL generators, time propagation and steady states.
//! * [`bath`] — the dissipative two-qubit telegraph bath: generator, Gibbs
//!   state, analytic two-point / 2n-point correlation functions and a
//!   brute-force Liouville-space oracle.
//! * [`poisson`] — the Poisson noise master equation: nonlinear jump
//!   operators, exponentially averaged dissipators, the Gaussian limit and
//!   the Hermitian-coupling special case.
//! * [`models`] — concrete systems: single qubit and collective N-spin
//!   (Dicke) models, Gibbs states, effective decay rates.
//! * [`composite`] — exact system⊗bath dynamics and convergence studies
//!   against the Poisson master equation.
//! * [`multitime`] — multi-time correlation functions, exact and by
//!   quantum regression on the Poisson generator.
//!
//! All quantities are dimensionless; rates are conventionally expressed in
//! units of the noise rate `Γ₂⁺`.

pub mod bath;
pub mod composite;
pub mod error;
mod integrate;
pub mod lindblad;
pub mod models;
pub mod multitime;
pub mod operator;
pub mod poisson;
pub mod quad;

pub use error::{Error, Result};
pub use lindblad::{DensityMatrix, Trajectory};
pub use operator::{Operator, SuperOperator, C64};
