//! Nonlocal gradients with general radial kernels, the nonlocal p-Laplacian
//! and its eigenvalue problem, and horizon-limit studies.
//!
//! Everything is generic over the scalar type [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

pub mod calculus;
pub mod error;
pub mod horizon;
pub mod kernels;
pub mod linalg;
pub mod quad;
pub mod scalar;
pub mod solvers;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Kernel64 = kernels::Kernel<f64>;
pub type Kernel32 = kernels::Kernel<f32>;
pub type Grid64 = calculus::Grid<f64>;
pub type Grid32 = calculus::Grid<f32>;
pub type Field64 = calculus::Field<f64>;
pub type Field32 = calculus::Field<f32>;
pub type VectorField64 = calculus::VectorField<f64>;
pub type VectorField32 = calculus::VectorField<f32>;
pub type Domain64 = calculus::Domain<f64>;
pub type PLapProblem64 = solvers::PLapProblem<f64>;
pub type LinearProblem64 = solvers::LinearProblem<f64>;
pub type EigenSet64 = spectra::EigenSet<f64>;
pub type SweepConfig64 = horizon::SweepConfig<f64>;
pub type SweepResult64 = horizon::SweepResult<f64>;
