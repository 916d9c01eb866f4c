//! Numerical rank diagnostics for bilinear observation operators.
//!
//! A family of observables `E_i` and states `rho_j` induces a design matrix
//! whose rows are the bilinear features `vec(E_i ⊗ rho_jᵀ)`. This crate
//! builds such designs, sweeps the relative singular-value threshold to find
//! rank plateaus, splits the numerical nullspace into block sectors, and
//! contrasts representation-preserving refinements with changes to the
//! operator/state families.

pub mod design;
pub mod error;
pub mod experiments;
pub mod io;
pub mod matrix;
pub mod par;
pub mod rank;
pub mod sectors;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, SingularSpectrum, C64};
pub use par::Parallelism;
