//! Extreme eigenvalues of sparse SPD matrices.
//!
//! Small matrices (order up to [`DENSE_LIMIT`]) use a dense symmetric
//! eigensolver. Larger ones run Lanczos on `A` for the largest eigenvalue and
//! Lanczos on `A^{-1}` (through a sparse Cholesky factor) for the smallest:
//! the Krylov spaces of power iteration and inverse iteration respectively,
//! with Rayleigh-Ritz extraction instead of the last iterate.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix, SpdFactor};

pub const DEFAULT_EIG_TOL: f64 = 1e-6;
pub const DENSE_LIMIT: usize = 225;
const MAX_LANCZOS_STEPS: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigMethod {
    Dense,
    Iterative,
}

/// Smallest and largest eigenvalue of an SPD matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralExtremes {
    pub min_eig: f64,
    pub max_eig: f64,
    pub method: EigMethod,
    /// Relative eigen-residual bound actually reached (zero for dense).
    pub achieved_tol: f64,
}

impl SpectralExtremes {
    pub fn new(min_eig: f64, max_eig: f64) -> Result<Self> {
        if !(min_eig > 0.0 && min_eig <= max_eig && max_eig.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid spectral extremes ({min_eig}, {max_eig})")));
        }
        Ok(Self { min_eig, max_eig, method: EigMethod::Dense, achieved_tol: 0.0 })
    }

    pub fn geometric_mean(&self) -> f64 {
        (self.min_eig * self.max_eig).sqrt()
    }
}

/// Dense path for small matrices, iterative otherwise.
pub fn eig_extremes(a: &CsrMatrix, tol: f64) -> Result<SpectralExtremes> {
    if a.nrows() <= DENSE_LIMIT {
        dense_extremes(a)
    } else {
        lanczos_extremes(a, tol)
    }
}

/// Full symmetric eigendecomposition of a small matrix.
pub fn dense_extremes(a: &CsrMatrix) -> Result<SpectralExtremes> {
    let n = a.nrows();
    if n > 4 * DENSE_LIMIT {
        return Err(Error::TooLarge { order: n, limit: 4 * DENSE_LIMIT });
    }
    let d = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let eig = SymmetricEigen::new(d).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite { column: 0, pivot: lo });
    }
    SpectralExtremes::new(lo, hi)
}

/// Lanczos for `lambda_max(A)` and shift-invert Lanczos for `lambda_min(A)`.
pub fn lanczos_extremes(a: &CsrMatrix, tol: f64) -> Result<SpectralExtremes> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("eigen tolerance must be positive, got {tol}")));
    }
    let (hi, res_hi) = lanczos_largest(|x| a.spmv(x), a.nrows(), tol, 0x5eed_0001)?;
    let factor = SpdFactor::factorize(a)?;
    let (inv_hi, res_lo) = lanczos_largest(|x| factor.solve(x), a.nrows(), tol, 0x5eed_0002)?;
    let mut e = SpectralExtremes::new(1.0 / inv_hi, hi)?;
    e.method = EigMethod::Iterative;
    e.achieved_tol = res_hi.max(res_lo);
    Ok(e)
}

/// Largest eigenvalue of a symmetric positive semidefinite operator, with its
/// relative residual bound.
fn lanczos_largest<F>(mut apply: F, n: usize, tol: f64, seed: u64) -> Result<(f64, f64)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let steps = n.min(MAX_LANCZOS_STEPS);

    for j in 0..steps {
        let mut w = apply(&basis[j])?;
        let aj = dot(&w, &basis[j]);
        alpha.push(aj);
        // full reorthogonalization keeps Ritz values free of ghost copies
        for _ in 0..2 {
            for b in &basis {
                let h = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= h * y);
            }
        }
        let bj = norm2(&w);

        let (theta, last) = tridiagonal_top_pair(&alpha, &beta);
        if !(theta > 0.0) {
            return Err(Error::Eigen(format!("nonpositive Ritz value {theta}")));
        }
        let residual = bj * last.abs() / theta;
        if residual <= tol || bj <= 1e-14 * theta || j + 1 == n {
            return Ok((theta, residual));
        }
        beta.push(bj);
        w.iter_mut().for_each(|x| *x /= bj);
        basis.push(w);
    }
    Err(Error::Eigen(format!("Lanczos did not reach tolerance {tol} in {steps} steps")))
}

/// Number of eigenvalues of the symmetric tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] / d };
        d = alpha[i] - x - off;
        if d == 0.0 {
            d = -f64::EPSILON * (alpha[i].abs() + x.abs() + 1e-300);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix and the last
/// component of its unit eigenvector.
fn tridiagonal_top_pair(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let s = alpha.len();
    if s == 1 {
        return (alpha[0], 1.0);
    }
    let radius = |i: usize| (if i > 0 { beta[i - 1].abs() } else { 0.0 }) + beta.get(i).map_or(0.0, |b| b.abs());
    let mut lo = (0..s).map(|i| alpha[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..s).map(|i| alpha[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) == s {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = hi;

    // inverse iteration with (theta + delta) I - T, which is positive definite
    let scale = alpha.iter().chain(beta).fold(0.0f64, |m, v| m.max(v.abs()));
    let shift = theta + 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut z = vec![1.0; s];
    for _ in 0..3 {
        // tridiagonal LDL^T solve of (shift I - T) z_new = z
        let mut diag = vec![0.0; s];
        let mut sub = vec![0.0; s];
        diag[0] = shift - alpha[0];
        for i in 1..s {
            sub[i] = -beta[i - 1] / diag[i - 1];
            diag[i] = shift - alpha[i] - sub[i] * -beta[i - 1];
        }
        for i in 1..s {
            z[i] -= sub[i] * z[i - 1];
        }
        z[s - 1] /= diag[s - 1];
        for i in (0..s - 1).rev() {
            z[i] = (z[i] + beta[i] * z[i + 1]) / diag[i];
        }
        let nz = norm2(&z);
        z.iter_mut().for_each(|x| *x /= nz);
    }
    (theta, z[s - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_extremes() {
        let e = eig_extremes(&CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]), 1e-8).unwrap();
        assert!((e.min_eig - 1.0).abs() < 1e-14 && (e.max_eig - 3.0).abs() < 1e-14);
    }

    #[test]
    fn lanczos_on_diagonal() {
        let d: Vec<f64> = (1..=400).map(|i| i as f64).collect();
        let e = lanczos_extremes(&CsrMatrix::from_diagonal(&d), 1e-10).unwrap();
        assert!((e.max_eig - 400.0).abs() < 1e-7, "{}", e.max_eig);
        assert!((e.min_eig - 1.0).abs() < 1e-9, "{}", e.min_eig);
        assert_eq!(e.method, EigMethod::Iterative);
    }

    #[test]
    fn tridiagonal_pair_matches_dense() {
        let alpha = [2.0, 3.0, 1.0, 4.0];
        let beta = [0.5, -1.0, 0.25];
        let t = DMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let k = eig.eigenvalues.imax();
        let (theta, last) = tridiagonal_top_pair(&alpha, &beta);
        assert!((theta - eig.eigenvalues[k]).abs() < 1e-13);
        assert!((last.abs() - eig.eigenvectors[(3, k)].abs()).abs() < 1e-8);
    }

    #[test]
    fn invalid_extremes_rejected() {
        assert!(SpectralExtremes::new(0.0, 1.0).is_err());
        assert!(SpectralExtremes::new(2.0, 1.0).is_err());
    }
}
