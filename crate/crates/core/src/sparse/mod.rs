//! Sparse and vector kernels shared by every solver in the crate.

mod cg;
mod cholesky;
mod csr;
mod cvec;
pub mod mmio;
mod ordering;

pub use cg::{cg_solve, CgOutcome};
pub use cholesky::SpdFactor;
pub use csr::CsrMatrix;
pub use cvec::ComplexVec;
pub use ordering::minimum_degree;

/// Euclidean inner product.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
