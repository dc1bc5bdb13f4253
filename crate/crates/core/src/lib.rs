//! Positive solutions of the singular clamped plate problem
//! `Δ²u = u^{−α}` in `Ω`, `u = ∂_ν u = 0` on `∂Ω`, `0 < α < 1`.
//!
//! The crate is generic over the scalar type; `f64` aliases are exported at
//! the root.

pub mod boggio;
pub mod domain;
pub mod error;
pub mod fd;
pub mod jet;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod verification;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Domain = domain::DomainSpec<f64>;
pub type Boggio = boggio::BoggioKernel<f64>;
pub type Radial = boggio::RadialGreen<f64>;
pub type Config = solver::SolverConfig<f64>;
pub type Solver = solver::RadialSolver<f64>;
