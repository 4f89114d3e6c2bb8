//! Splitting-induced preconditioners and the GMRES drivers that use them.
//!
//! | driver | system | preconditioner inverse |
//! |--------|--------|------------------------|
//! | [`pmbas_gmres`] | `Ã x = b̃` | `B_a^{-1} = -a (aI + sqrt(nu theta) H2)^{-1} R (aI + theta H1)^{-1} (I + R)` |
//! | [`pbas_gmres`]  | `A x = b` | `P_BAS^{-1} = W D^{-1} / (c0 (1 + theta^2 + w^2 nu))` |
//! | [`passs_gmres`] | `(ℳ + 𝒢𝒦) y = c̃` | `𝒫_a^{-1} = -a (aℐ + 𝒦)^{-1} 𝒢 (aℐ + ℳ)^{-1} (ℐ + 𝒢)` |
//!
//! The ASSS preconditioner approximates the normalised real form rather than
//! `𝒜` itself, so P-ASSS runs on `(ℳ + 𝒢𝒦) = T1 𝒜 / theta` with `c̃`.

use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inner::{InnerSolver, SpdSolver};
use crate::krylov::{gmres_full, FnOperator, GmresConfig, GmresOutcome};
use crate::report::{Method, Mode, SolveReport};
use crate::systems::{
    apply_a, apply_asss_form, apply_atilde, apply_g, apply_r, rhs_asss, rhs_b, rhs_btilde, scalar_block2, BlockVecC,
    BlockVecR, SystemBundle,
};

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")))
    }
}

/// `B_a` of the MBAS splitting, factored once.
pub struct MbasPreconditioner<'a> {
    s: &'a SystemBundle,
    alpha: f64,
    mass_solver: SpdSolver,
    stiff_solver: SpdSolver,
}

impl<'a> MbasPreconditioner<'a> {
    pub fn new(s: &'a SystemBundle, alpha: f64, inner: InnerSolver) -> Result<Self> {
        check_alpha(alpha)?;
        let p = s.params();
        Ok(Self {
            s,
            alpha,
            mass_solver: SpdSolver::shifted(s.mass(), p.theta(), alpha, inner)?,
            stiff_solver: SpdSolver::shifted(s.stiffness(), (p.nu() * p.theta()).sqrt(), alpha, inner)?,
        })
    }

    pub fn apply_inv(&self, v: &BlockVecC) -> Result<BlockVecC> {
        let p = self.s.params();
        let mut w = v.clone();
        w.axpy(re(1.0), &apply_r(&p, v));
        let w = self.mass_solver.solve_block(&w)?;
        let w = self.stiff_solver.solve_block(&apply_r(&p, &w))?;
        Ok(w.scaled(re(-self.alpha)))
    }
}

/// `P_BAS = c0 W D` with `D = bldiag(aM + sqrt(nu) K, aM + sqrt(nu) K)`.
pub struct BasPreconditioner {
    solver: SpdSolver,
    w: [[Complex64; 2]; 2],
    scale: f64,
}

impl BasPreconditioner {
    pub fn new(s: &SystemBundle, alpha: f64, inner: InnerSolver) -> Result<Self> {
        check_alpha(alpha)?;
        let p = s.params();
        let solver = SpdSolver::combination(alpha, s.mass(), p.nu().sqrt(), s.stiffness(), inner)?;
        let c0 = (1.0 + alpha) / (alpha * (1.0 + p.theta()));
        let a = Complex64::new(p.theta(), -p.omega() * p.nu().sqrt());
        let w = [[re(1.0), a], [a.conj(), re(-1.0)]];
        let scale = 1.0 / (c0 * (1.0 + a.norm_sqr()));
        Ok(Self { solver, w, scale })
    }

    pub fn apply_inv(&self, v: &BlockVecC) -> Result<BlockVecC> {
        let d = self.solver.solve_block(v)?;
        Ok(scalar_block2(self.w, &d).scaled(re(self.scale)))
    }
}

/// `𝒫_a` of the ASSS splitting, factored once.
pub struct AsssPreconditioner<'a> {
    s: &'a SystemBundle,
    alpha: f64,
    mass_solver: SpdSolver,
    stiff_solver: SpdSolver,
}

impl<'a> AsssPreconditioner<'a> {
    pub fn new(s: &'a SystemBundle, alpha: f64, inner: InnerSolver) -> Result<Self> {
        check_alpha(alpha)?;
        let p = s.params();
        Ok(Self {
            s,
            alpha,
            mass_solver: SpdSolver::shifted(s.mass(), 1.0, alpha, inner)?,
            stiff_solver: SpdSolver::shifted(s.stiffness(), (p.nu() / p.theta()).sqrt(), alpha, inner)?,
        })
    }

    pub fn apply_inv(&self, v: &BlockVecR) -> Result<BlockVecR> {
        let p = self.s.params();
        let w = BlockVecR::lin_comb(1.0, v, 1.0, &apply_g(&p, v));
        let w = self.mass_solver.solve_block_r(&w)?;
        let w = self.stiff_solver.solve_block_r(&apply_g(&p, &w))?;
        Ok(w.scaled(-self.alpha))
    }
}

pub fn apply_bmbas_inv(s: &SystemBundle, alpha: f64, v: &BlockVecC) -> Result<BlockVecC> {
    MbasPreconditioner::new(s, alpha, InnerSolver::Direct)?.apply_inv(v)
}

pub fn apply_pbas_inv(s: &SystemBundle, alpha: f64, v: &BlockVecC) -> Result<BlockVecC> {
    BasPreconditioner::new(s, alpha, InnerSolver::Direct)?.apply_inv(v)
}

pub fn apply_passs_inv(s: &SystemBundle, alpha: f64, v: &BlockVecR) -> Result<BlockVecR> {
    AsssPreconditioner::new(s, alpha, InnerSolver::Direct)?.apply_inv(v)
}

/// Settings shared by the preconditioned drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecondConfig {
    pub alpha: f64,
    pub gmres: GmresConfig,
    pub inner: InnerSolver,
}

impl PrecondConfig {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, gmres: GmresConfig::default(), inner: InnerSolver::Direct }
    }
}

fn gmres_report<S>(s: &SystemBundle, method: Method, alpha: f64, out: &GmresOutcome<S>, elapsed: f64) -> SolveReport {
    let p = s.params();
    SolveReport {
        method,
        mode: Mode::Gmres,
        nu: p.nu(),
        omega: p.omega(),
        alpha_policy: format!("custom:{alpha:e}"),
        alpha,
        iterations: out.iterations,
        converged: out.converged,
        final_residual: *out.history.last().unwrap_or(&0.0),
        elapsed_s: elapsed,
        residual_history: out.history.clone(),
    }
}

fn complex_gmres<P>(
    s: &SystemBundle,
    apply: impl Fn(&SystemBundle, &BlockVecC) -> Result<BlockVecC>,
    pinv: P,
    b: &BlockVecC,
    cfg: GmresConfig,
) -> Result<GmresOutcome<Complex64>>
where
    P: Fn(&BlockVecC) -> Result<BlockVecC>,
{
    let n = 2 * s.m();
    let a_op = FnOperator::new(n, |x: &[Complex64]| Ok(apply(s, &BlockVecC::from_flat(x))?.to_flat()));
    let p_op = FnOperator::new(n, |x: &[Complex64]| Ok(pinv(&BlockVecC::from_flat(x))?.to_flat()));
    gmres_full(&a_op, &p_op, &b.to_flat(), cfg)
}

/// Full GMRES on `Ã x = b̃` preconditioned by `B_a`.
pub fn pmbas_gmres(s: &SystemBundle, cfg: &PrecondConfig) -> Result<(BlockVecC, SolveReport)> {
    let start = Instant::now();
    let pre = MbasPreconditioner::new(s, cfg.alpha, cfg.inner)?;
    let out = complex_gmres(s, apply_atilde, |v| pre.apply_inv(v), &rhs_btilde(s), cfg.gmres)?;
    let rep = gmres_report(s, Method::Mbas, cfg.alpha, &out, start.elapsed().as_secs_f64());
    Ok((BlockVecC::from_flat(&out.x), rep))
}

/// Full GMRES on `A x = b` preconditioned by `P_BAS`.
pub fn pbas_gmres(s: &SystemBundle, cfg: &PrecondConfig) -> Result<(BlockVecC, SolveReport)> {
    let start = Instant::now();
    let pre = BasPreconditioner::new(s, cfg.alpha, cfg.inner)?;
    let out = complex_gmres(s, apply_a, |v| pre.apply_inv(v), &rhs_b(s), cfg.gmres)?;
    let rep = gmres_report(s, Method::Bas, cfg.alpha, &out, start.elapsed().as_secs_f64());
    Ok((BlockVecC::from_flat(&out.x), rep))
}

/// Full GMRES on the real `4m` form preconditioned by `𝒫_a`.
pub fn passs_gmres(s: &SystemBundle, cfg: &PrecondConfig) -> Result<(BlockVecR, SolveReport)> {
    let start = Instant::now();
    let pre = AsssPreconditioner::new(s, cfg.alpha, cfg.inner)?;
    let n = 4 * s.m();
    let a_op = FnOperator::new(n, |x: &[f64]| Ok(apply_asss_form(s, &BlockVecR::from_flat(x))?.to_flat()));
    let p_op = FnOperator::new(n, |x: &[f64]| Ok(pre.apply_inv(&BlockVecR::from_flat(x))?.to_flat()));
    let out = gmres_full(&a_op, &p_op, &rhs_asss(s).to_flat(), cfg.gmres)?;
    let rep = gmres_report(s, Method::Asss, cfg.alpha, &out, start.elapsed().as_secs_f64());
    Ok((BlockVecR::from_flat(&out.x), rep))
}
