//! Loss-rate estimation for a single bosonic mode in a lossy channel with
//! self-Kerr nonlinearity.
//!
//! The mode is simulated in a truncated Fock basis. Module layout:
//!
//! - [`numerics`]: Hermitian eigensolver, adaptive Runge-Kutta integrator,
//!   oscillator wavefunctions, finite differences, scalar maximization.
//! - [`states`]: coherent, squeezed-vacuum, Fock and qutrit probes and the
//!   truncation policy.
//! - [`channel`]: evolution through the Kerr-lossy channel.
//! - [`metrology`]: quantum and classical Fisher information for the loss
//!   rate, plus the linear-channel closed forms.
//! - [`experiments`]: parameter sweeps, CSV/JSON output and the CLI.
//!
//! Time and nonlinearity are used in rescaled form, `tau = gamma * t` and
//! `lambda = kerr / gamma`. Derivatives with respect to `gamma` are always
//! taken at fixed physical Kerr coupling and interaction time.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod experiments;
pub mod metrology;
pub mod numerics;
pub mod states;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;
