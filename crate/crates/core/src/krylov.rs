//! Full (unrestarted) GMRES with left preconditioning, for real and complex
//! scalars.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};

/// Field operations GMRES needs.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn from_real(v: f64) -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn abs_sqr(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(v: f64) -> Self {
        v
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

/// `sum conj(x_i) y_i`.
pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    x.iter().zip(y).fold(S::zero(), |acc, (&a, &b)| acc + a.conj() * b)
}

pub fn norm<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(|v| v.abs_sqr()).sum::<f64>().sqrt()
}

fn axpy<S: Scalar>(a: S, x: &[S], y: &mut [S]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

fn scale<S: Scalar>(a: f64, x: &mut [S]) {
    let a = S::from_real(a);
    for v in x {
        *v = a * *v;
    }
}

/// A square linear map on flat vectors.
pub trait LinearOperator<S: Scalar> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[S]) -> Result<Vec<S>>;
}

/// Wraps a closure as a [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<S: Scalar, F: Fn(&[S]) -> Result<Vec<S>>> LinearOperator<S> for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        check_len(self.dim, x.len())?;
        let y = (self.f)(x)?;
        check_len(self.dim, y.len())?;
        Ok(y)
    }
}

/// The identity, for unpreconditioned runs.
pub struct Identity(pub usize);

impl<S: Scalar> LinearOperator<S> for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        check_len(self.0, x.len())?;
        Ok(x.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub tol: f64,
    pub maxit: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { tol: 1e-6, maxit: 500 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome<S> {
    pub x: Vec<S>,
    pub iterations: usize,
    pub converged: bool,
    /// Preconditioned residual norms relative to `||P^{-1} b||`, starting at 1.
    pub history: Vec<f64>,
    /// `||b - A x|| / ||b||` at exit.
    pub true_residual: f64,
}

/// Complex Givens rotation zeroing `b` in `(a, b)`.
fn givens<S: Scalar>(a: S, b: S) -> (f64, S, S) {
    let (na, nb) = (a.abs(), b.abs());
    if nb == 0.0 {
        return (1.0, S::zero(), a);
    }
    if na == 0.0 {
        // c = 0, s chosen so that s * b = |b|
        return (0.0, b.conj() * S::from_real(1.0 / nb), S::from_real(nb));
    }
    let t = na.hypot(nb);
    let phase = a * S::from_real(1.0 / na);
    let s = phase * b.conj() * S::from_real(1.0 / t);
    (na / t, s, phase * S::from_real(t))
}

fn rotate<S: Scalar>(c: f64, s: S, x: S, y: S) -> (S, S) {
    let c = S::from_real(c);
    (c * x + s * y, -(s.conj()) * x + c * y)
}

/// Solves `P^{-1} A x = P^{-1} b` from `x = 0` with full GMRES.
///
/// Convergence is declared on the preconditioned residual, then confirmed on
/// the true residual; if that is more than ten times `tol` the method keeps
/// going.
pub fn gmres_full<S: Scalar>(
    a: &dyn LinearOperator<S>,
    pinv: &dyn LinearOperator<S>,
    b: &[S],
    cfg: GmresConfig,
) -> Result<GmresOutcome<S>> {
    let n = a.dim();
    check_len(n, b.len())?;
    check_len(n, pinv.dim())?;
    if !(cfg.tol > 0.0) || cfg.maxit == 0 {
        return Err(Error::InvalidParameter(format!("bad GMRES settings {}/{}", cfg.tol, cfg.maxit)));
    }
    let b_norm = norm(b);
    let mut x = vec![S::zero(); n];
    if b_norm == 0.0 {
        return Ok(GmresOutcome { x, iterations: 0, converged: true, history: vec![0.0], true_residual: 0.0 });
    }
    let true_res = |x: &[S]| -> Result<f64> {
        let ax = a.apply(x)?;
        Ok(norm(&b.iter().zip(&ax).map(|(&u, &v)| u - v).collect::<Vec<_>>()) / b_norm)
    };

    let mut r0 = pinv.apply(b)?;
    let beta = norm(&r0);
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::Breakdown { step: 0, residual: beta });
    }
    scale(1.0 / beta, &mut r0);
    let mut basis: Vec<Vec<S>> = vec![r0];
    // Hessenberg columns after rotation (upper triangular part only).
    let mut rcols: Vec<Vec<S>> = Vec::new();
    let mut rots: Vec<(f64, S)> = Vec::new();
    let mut g: Vec<S> = vec![S::from_real(beta)];
    let mut history = vec![1.0];
    let mut true_residual = 1.0;
    let mut converged = false;
    let mut confirm = false;

    let solve_upper = |rcols: &[Vec<S>], g: &[S], basis: &[Vec<S>]| -> Vec<S> {
        let k = rcols.len();
        let mut yv = vec![S::zero(); k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc = acc - rcols[j][i] * yv[j];
            }
            yv[i] = acc * inv(rcols[i][i]);
        }
        let mut x = vec![S::zero(); basis[0].len()];
        for (yj, v) in yv.iter().zip(basis) {
            axpy(*yj, v, &mut x);
        }
        x
    };

    for k in 0..cfg.maxit.min(n) {
        let mut w = pinv.apply(&a.apply(&basis[k])?)?;
        let w_norm0 = norm(&w);
        let mut h = vec![S::zero(); k + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(v, &w);
            h[i] = hij;
            axpy(-hij, v, &mut w);
        }
        let max_proj = basis.iter().map(|v| dot(v, &w).abs()).fold(0.0, f64::max);
        if max_proj > 1e-8 * norm(&w) {
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[i] = h[i] + hij;
                axpy(-hij, v, &mut w);
            }
        }
        let h_next = norm(&w);
        h[k + 1] = S::from_real(h_next);

        for (i, &(c, s)) in rots.iter().enumerate() {
            let (u, v) = rotate(c, s, h[i], h[i + 1]);
            h[i] = u;
            h[i + 1] = v;
        }
        let (c, s, r) = givens(h[k], h[k + 1]);
        h[k] = r;
        h[k + 1] = S::zero();
        rots.push((c, s));
        let gk = g[k];
        g[k] = S::from_real(c) * gk;
        g.push(-(s.conj()) * gk);
        h.truncate(k + 1);
        if h[k].abs() == 0.0 {
            return Err(Error::Breakdown { step: k + 1, residual: g[k + 1].abs() / beta });
        }
        rcols.push(h);

        let rel = g[k + 1].abs() / beta;
        history.push(rel);
        if !rel.is_finite() {
            x = solve_upper(&rcols, &g, &basis);
            true_residual = true_res(&x)?;
            break;
        }

        let happy = h_next <= 1e-14 * w_norm0.max(f64::MIN_POSITIVE);
        if rel <= cfg.tol || confirm || happy {
            x = solve_upper(&rcols, &g, &basis);
            true_residual = true_res(&x)?;
            if true_residual <= 10.0 * cfg.tol || happy {
                converged = rel <= cfg.tol || true_residual <= 10.0 * cfg.tol;
                if happy && !converged {
                    return Err(Error::Breakdown { step: k + 1, residual: true_residual });
                }
                return Ok(GmresOutcome { x, iterations: k + 1, converged, history, true_residual });
            }
            confirm = true;
        }
        if happy {
            break;
        }
        scale(1.0 / h_next, &mut w);
        basis.push(w);
    }

    if !rcols.is_empty() {
        x = solve_upper(&rcols, &g, &basis);
        true_residual = true_res(&x)?;
    }
    let iterations = history.len() - 1;
    Ok(GmresOutcome { x, iterations, converged, history, true_residual })
}

fn inv<S: Scalar>(v: S) -> S {
    // 1/v = conj(v) / |v|^2
    v.conj() * S::from_real(1.0 / v.abs_sqr())
}
