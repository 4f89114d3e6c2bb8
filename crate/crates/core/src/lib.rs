//! Stationary block splitting iterations and Krylov preconditioners for the
//! two-by-two complex saddle-point systems produced by finite element
//! discretization of time-periodic parabolic optimal control problems.
//!
//! The crate is organised bottom-up:
//!
//! - [`meshfem`]: Q1 mass and stiffness matrices and the nodal target on the unit square.
//! - [`sparse`]: CSR storage, complex vectors, CG, sparse Cholesky, Matrix Market I/O.
//! - [`systems`]: matrix-free block operators in complex and real form.
//! - [`params`] and [`eigen`]: iteration-parameter formulas, convergence bounds, extreme eigenvalues.
//! - [`splittings`]: the MBAS, BAS and ASSS stationary iterations.
//! - [`krylov`] and [`precond`]: full GMRES and the induced preconditioners.
//! - [`dense`]: small-scale dense oracles (explicit splitting matrices, spectral radius).

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dense;
pub mod eigen;
pub mod error;
pub mod inner;
pub mod krylov;
pub mod meshfem;
pub mod params;
pub mod precond;
pub mod report;
pub mod sparse;
pub mod splittings;
pub mod systems;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use report::{Method, Mode, SolveReport};
