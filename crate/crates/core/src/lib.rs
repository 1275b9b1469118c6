//! Spectra of magnetic chain graphs.
//!
//! A chain of unit rings with δ-coupled vertices in a magnetic field is dual to
//! the zero-diagonal Jacobi operator `(Lφ)_j = a_j φ_{j+1} + a_{j-1} φ_{j-1}`,
//! `a_j = 2cos(πA_j)`. Graph energies `z` correspond to `η(z) ∈ σ(L)` on the
//! branches `I_n` of the map `η`, plus the Dirichlet energies `n²`.

pub mod error;
pub mod eta;
pub mod fd;
pub mod floquet;
pub mod io;
pub mod jacobi;
pub mod profile;
pub mod scalar;
pub mod sets;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::{Scalar, TOL_ZERO};
