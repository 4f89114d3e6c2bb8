//! Two-half-step stationary iterations: MBAS, BAS (with `V = H1`) and ASSS.
//!
//! Each method owns its two inner SPD solvers, factored once per `alpha`, and
//! iterates from the zero vector until the relative residual of the system
//! it targets drops below `tol`:
//!
//! | method | iterate | residual monitored |
//! |--------|---------|--------------------|
//! | MBAS   | complex `2m` | `||b̃ - Ã x|| / ||b̃||` |
//! | BAS    | complex `2m` | `||b - A x|| / ||b||` |
//! | ASSS   | real `4m`    | `||c - 𝒜 y|| / ||c||` |
//!
//! All three ratios coincide for the same iterate because `R1 / sqrt(theta)`
//! is unitary.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{InnerSolver, SpdSolver};
use crate::report::{Method, Mode, SolveReport};
use crate::systems::{
    apply_a, apply_areal, apply_atilde, apply_g, apply_h1, apply_h2, apply_mass4, apply_r, apply_stiffness4,
    r1_coefficients, rhs_asss, rhs_b, rhs_btilde, rhs_c, scalar_block2, BlockVecC, BlockVecR, SystemBundle,
};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAXIT: usize = 500;

/// Settings of a stationary solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterConfig {
    pub alpha: f64,
    pub tol: f64,
    pub maxit: usize,
    pub inner: InnerSolver,
}

impl IterConfig {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, tol: DEFAULT_TOL, maxit: DEFAULT_MAXIT, inner: InnerSolver::Direct }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.maxit == 0 {
            return Err(Error::InvalidParameter("maxit must be at least 1".into()));
        }
        Ok(())
    }
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// A stationary method with its rhs baked in.
pub trait StationaryIteration {
    type Vector: Clone;

    fn zero(&self) -> Self::Vector;
    /// One full (two half-step) sweep with the method's own right-hand side.
    fn step(&self, x: &Self::Vector) -> Result<Self::Vector>;
    fn relative_residual(&self, x: &Self::Vector) -> Result<f64>;
    fn is_finite(&self, x: &Self::Vector) -> bool;
}

/// Runs `it` from the zero vector and records the residual history.
pub fn run_stationary<I: StationaryIteration>(it: &I, tol: f64, maxit: usize) -> Result<(I::Vector, Vec<f64>, bool)> {
    let mut x = it.zero();
    let mut history = vec![it.relative_residual(&x)?];
    if history[0] <= tol {
        return Ok((x, history, true));
    }
    for _ in 0..maxit {
        x = it.step(&x)?;
        let r = it.relative_residual(&x)?;
        history.push(r);
        if r <= tol {
            return Ok((x, history, true));
        }
        if !it.is_finite(&x) || !r.is_finite() {
            break;
        }
    }
    Ok((x, history, false))
}

/// MBAS:
/// `(aI + theta H1) x' = (aI - sqrt(nu theta) R H2) x + b̃`,
/// `(aI + sqrt(nu theta) H2) x'' = (aI + theta R H1) x' - R b̃`.
pub struct MbasIteration<'a> {
    s: &'a SystemBundle,
    alpha: f64,
    mass_solver: SpdSolver,
    stiff_solver: SpdSolver,
    rhs: BlockVecC,
    rhs_norm: f64,
}

impl<'a> MbasIteration<'a> {
    pub fn new(s: &'a SystemBundle, alpha: f64, inner: InnerSolver) -> Result<Self> {
        let p = s.params();
        let mass_solver = SpdSolver::shifted(s.mass(), p.theta(), alpha, inner)?;
        let stiff_solver = SpdSolver::shifted(s.stiffness(), (p.nu() * p.theta()).sqrt(), alpha, inner)?;
        let rhs = rhs_btilde(s);
        let rhs_norm = rhs.norm();
        Ok(Self { s, alpha, mass_solver, stiff_solver, rhs, rhs_norm })
    }

    /// One sweep with an explicit right-hand side (zero gives the iteration matrix).
    pub fn step_with(&self, x: &BlockVecC, rhs: &BlockVecC) -> Result<BlockVecC> {
        let p = self.s.params();
        let sq = (p.nu() * p.theta()).sqrt();
        let rkx = apply_r(&p, &apply_h2(self.s, x)?);
        let mut half_rhs = BlockVecC::lin_comb(re(self.alpha), x, re(-sq), &rkx);
        half_rhs.axpy(re(1.0), rhs);
        let half = self.mass_solver.solve_block(&half_rhs)?;

        let rmx = apply_r(&p, &apply_h1(self.s, &half)?);
        let mut full_rhs = BlockVecC::lin_comb(re(self.alpha), &half, re(p.theta()), &rmx);
        full_rhs.axpy(re(-1.0), &apply_r(&p, rhs));
        self.stiff_solver.solve_block(&full_rhs)
    }

    pub fn rhs(&self) -> &BlockVecC {
        &self.rhs
    }
}

impl StationaryIteration for MbasIteration<'_> {
    type Vector = BlockVecC;

    fn zero(&self) -> BlockVecC {
        BlockVecC::zeros(self.s.m())
    }

    fn step(&self, x: &BlockVecC) -> Result<BlockVecC> {
        self.step_with(x, &self.rhs)
    }

    fn relative_residual(&self, x: &BlockVecC) -> Result<f64> {
        Ok(relative(self.rhs.sub(&apply_atilde(self.s, x)?).norm(), self.rhs_norm))
    }

    fn is_finite(&self, x: &BlockVecC) -> bool {
        x.is_finite()
    }
}

fn relative(r: f64, b: f64) -> f64 {
    if b == 0.0 {
        r
    } else {
        r / b
    }
}

/// BAS with `V = H1`:
/// `(1 + a) H1 x' = (a H1 - S1) x + P1 b`,
/// `(a H1 + sqrt(nu) H2) x'' = (a H1 - S2) x' + P2 b`.
pub struct BasIteration<'a> {
    s: &'a SystemBundle,
    alpha: f64,
    mass_solver: SpdSolver,
    mixed_solver: SpdSolver,
    p1b: BlockVecC,
    p2b: BlockVecC,
    rhs: BlockVecC,
    rhs_norm: f64,
}

impl<'a> BasIteration<'a> {
    pub fn new(s: &'a SystemBundle, alpha: f64, inner: InnerSolver) -> Result<Self> {
        let p = s.params();
        let mass_solver = SpdSolver::shifted(s.mass(), 1.0 + alpha, 0.0, inner)?;
        let mixed_solver = SpdSolver::combination(alpha, s.mass(), p.nu().sqrt(), s.stiffness(), inner)?;
        let rhs = rhs_b(s);
        let r1 = r1_coefficients(&p);
        let inv_theta = re(1.0 / p.theta());
        let p1 = [[r1[0][0] * inv_theta, r1[0][1] * inv_theta], [r1[1][0] * inv_theta, r1[1][1] * inv_theta]];
        let p1b = scalar_block2(p1, &rhs);
        let p2b = BlockVecC::new(rhs.q.clone(), rhs.y.clone());
        let rhs_norm = rhs.norm();
        Ok(Self { s, alpha, mass_solver, mixed_solver, p1b, p2b, rhs, rhs_norm })
    }

    /// `S1 x = (1/theta) [[-i w nu K, sqrt(nu) K], [-sqrt(nu) K, i w nu K]] x`.
    fn apply_s1(&self, x: &BlockVecC) -> Result<BlockVecC> {
        let p = self.s.params();
        let t = 1.0 / p.theta();
        let wn = p.omega() * p.nu() * t;
        let sn = p.nu().sqrt() * t;
        let coef = [[Complex64::new(0.0, -wn), re(sn)], [re(-sn), Complex64::new(0.0, wn)]];
        Ok(scalar_block2(coef, &apply_h2(self.s, x)?))
    }

    /// `S2 x = [[i w sqrt(nu) M, -M], [M, -i w sqrt(nu) M]] x`.
    fn apply_s2(&self, x: &BlockVecC) -> Result<BlockVecC> {
        let p = self.s.params();
        let a = p.omega() * p.nu().sqrt();
        let coef = [[Complex64::new(0.0, a), re(-1.0)], [re(1.0), Complex64::new(0.0, -a)]];
        Ok(scalar_block2(coef, &apply_h1(self.s, x)?))
    }
}

impl StationaryIteration for BasIteration<'_> {
    type Vector = BlockVecC;

    fn zero(&self) -> BlockVecC {
        BlockVecC::zeros(self.s.m())
    }

    fn step(&self, x: &BlockVecC) -> Result<BlockVecC> {
        let mut half_rhs = BlockVecC::lin_comb(re(self.alpha), &apply_h1(self.s, x)?, re(-1.0), &self.apply_s1(x)?);
        half_rhs.axpy(re(1.0), &self.p1b);
        let half = self.mass_solver.solve_block(&half_rhs)?;

        let mut full_rhs =
            BlockVecC::lin_comb(re(self.alpha), &apply_h1(self.s, &half)?, re(-1.0), &self.apply_s2(&half)?);
        full_rhs.axpy(re(1.0), &self.p2b);
        self.mixed_solver.solve_block(&full_rhs)
    }

    fn relative_residual(&self, x: &BlockVecC) -> Result<f64> {
        Ok(relative(self.rhs.sub(&apply_a(self.s, x)?).norm(), self.rhs_norm))
    }

    fn is_finite(&self, x: &BlockVecC) -> bool {
        x.is_finite()
    }
}

/// ASSS on the real `4m` form:
/// `(aI + ℳ) y' = (aI - 𝒢𝒦) y + c̃`,
/// `(aI + 𝒦) y'' = (aI + 𝒢ℳ) y' - 𝒢 c̃`, with `𝒦 = sqrt(nu/theta) bldiag(K,K,K,K)`.
///
/// The fixed point of these half-steps solves `(ℳ + 𝒢𝒦) y = c̃`; the right-hand
/// side `c̃ = T1 c / theta` makes that the solution of `𝒜 y = c`.
pub struct AsssIteration<'a> {
    s: &'a SystemBundle,
    alpha: f64,
    mass_solver: SpdSolver,
    stiff_solver: SpdSolver,
    rhs: BlockVecR,
    c: BlockVecR,
    c_norm: f64,
}

impl<'a> AsssIteration<'a> {
    pub fn new(s: &'a SystemBundle, alpha: f64, inner: InnerSolver) -> Result<Self> {
        let p = s.params();
        let mass_solver = SpdSolver::shifted(s.mass(), 1.0, alpha, inner)?;
        let stiff_solver = SpdSolver::shifted(s.stiffness(), (p.nu() / p.theta()).sqrt(), alpha, inner)?;
        let rhs = rhs_asss(s);
        let c = rhs_c(s);
        let c_norm = c.norm();
        Ok(Self { s, alpha, mass_solver, stiff_solver, rhs, c, c_norm })
    }

    pub fn rhs(&self) -> &BlockVecR {
        &self.rhs
    }

    pub fn step_with(&self, y: &BlockVecR, rhs: &BlockVecR) -> Result<BlockVecR> {
        let p = self.s.params();
        let kscale = (p.nu() / p.theta()).sqrt();
        let gky = apply_g(&p, &apply_stiffness4(self.s, y)?);
        let half_rhs = BlockVecR::lin_comb(1.0, &BlockVecR::lin_comb(self.alpha, y, -kscale, &gky), 1.0, rhs);
        let half = self.mass_solver.solve_block_r(&half_rhs)?;

        let gmy = apply_g(&p, &apply_mass4(self.s, &half)?);
        let full_rhs =
            BlockVecR::lin_comb(1.0, &BlockVecR::lin_comb(self.alpha, &half, 1.0, &gmy), -1.0, &apply_g(&p, rhs));
        self.stiff_solver.solve_block_r(&full_rhs)
    }
}

impl StationaryIteration for AsssIteration<'_> {
    type Vector = BlockVecR;

    fn zero(&self) -> BlockVecR {
        BlockVecR::zeros(self.s.m())
    }

    fn step(&self, y: &BlockVecR) -> Result<BlockVecR> {
        self.step_with(y, &self.rhs)
    }

    fn relative_residual(&self, y: &BlockVecR) -> Result<f64> {
        Ok(relative(self.c.sub(&apply_areal(self.s, y)?).norm(), self.c_norm))
    }

    fn is_finite(&self, y: &BlockVecR) -> bool {
        y.parts.iter().flatten().all(|v| v.is_finite())
    }
}

fn report(
    s: &SystemBundle,
    method: Method,
    cfg: &IterConfig,
    history: Vec<f64>,
    converged: bool,
    elapsed: f64,
) -> SolveReport {
    let p = s.params();
    SolveReport {
        method,
        mode: Mode::Stationary,
        nu: p.nu(),
        omega: p.omega(),
        alpha_policy: format!("custom:{:e}", cfg.alpha),
        alpha: cfg.alpha,
        iterations: history.len() - 1,
        converged,
        final_residual: *history.last().unwrap(),
        elapsed_s: elapsed,
        residual_history: history,
    }
}

/// MBAS from the zero vector; the solution of `Ã x = b̃` also solves `A x = b`.
pub fn mbas_solve(s: &SystemBundle, cfg: &IterConfig) -> Result<(BlockVecC, SolveReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let it = MbasIteration::new(s, cfg.alpha, cfg.inner)?;
    let (x, hist, ok) = run_stationary(&it, cfg.tol, cfg.maxit)?;
    let rep = report(s, Method::Mbas, cfg, hist, ok, start.elapsed().as_secs_f64());
    Ok((x, rep))
}

pub fn bas_solve(s: &SystemBundle, cfg: &IterConfig) -> Result<(BlockVecC, SolveReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let it = BasIteration::new(s, cfg.alpha, cfg.inner)?;
    let (x, hist, ok) = run_stationary(&it, cfg.tol, cfg.maxit)?;
    let rep = report(s, Method::Bas, cfg, hist, ok, start.elapsed().as_secs_f64());
    Ok((x, rep))
}

pub fn asss_solve(s: &SystemBundle, cfg: &IterConfig) -> Result<(BlockVecR, SolveReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let it = AsssIteration::new(s, cfg.alpha, cfg.inner)?;
    let (y, hist, ok) = run_stationary(&it, cfg.tol, cfg.maxit)?;
    let rep = report(s, Method::Asss, cfg, hist, ok, start.elapsed().as_secs_f64());
    Ok((y, rep))
}
