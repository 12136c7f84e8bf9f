//! Self-similar blow-up profiles of the cubic nonlinear Schrödinger equation.
//!
//! The profile `Q(ζ)` solves
//! `Q'' + (N−1)/ζ Q' − Q + ia(Q + ζQ') + Q|Q|² = 0` with `Q(0) = ρ₀`, `Q'(0) = 0`.
//! This crate integrates it in Cartesian and bounded-polar form, evaluates
//! the energy-type functionals and integral identities along solutions,
//! audits the far-field behaviour and solves the finite-interval shooting
//! problem for `(ρ₀, a)`.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod functionals;
pub mod integrator;
pub mod io;
pub mod params;
pub mod quadrature;
pub mod rhs;
pub mod series;
pub mod solver;
pub mod state;
pub mod tail;

pub use error::{Error, Result};
pub use integrator::{integrate, Form, IntegratorSettings, Status, Trajectory};
pub use params::{make_params, Params};
pub use state::{BoundedPolarState, CartesianState, ComplexPair};
