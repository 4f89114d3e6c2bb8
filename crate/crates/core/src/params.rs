//! Iteration-parameter formulas and the spectral convergence bound of MBAS.
//!
//! The MBAS iteration matrix satisfies `rho(P) <= eta = chi * vartheta` with
//!
//! ```text
//! chi      = max_{lambda in sigma(M)} sqrt(a^2 + theta^2 lambda^2) / (a + theta lambda)
//! vartheta = max_{mu in sigma(K)}     sqrt(a^2 + nu theta mu^2)    / (a + sqrt(nu theta) mu)
//! ```
//!
//! Both factors are of the form `f(t) = sqrt(a^2 + t^2) / (a + t)`, which
//! decreases on `(0, a)` and increases on `(a, inf)`; the maximum over a
//! spectrum is therefore attained at one of its two ends.
//!
//! Note on notation: the ASSS default uses the extreme eigenvalues of `M`,
//! while the MBAS bound-minimising `alpha2` uses those of `K`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eigen::SpectralExtremes;
use crate::error::{Error, Result};
use crate::systems::{ProblemParams, SystemBundle};

/// `theta = 1 + nu omega^2`.
pub fn theta(nu: f64, omega: f64) -> Result<f64> {
    Ok(ProblemParams::new(nu, omega)?.theta())
}

/// Frobenius-norm estimate `alpha_est = theta ||M||_F / sqrt(m)`.
pub fn alpha_est(s: &SystemBundle) -> f64 {
    s.params().theta() * s.mass().frob_norm() / (s.m() as f64).sqrt()
}

/// `||C_alpha||_F`-style estimator
/// `phi(a) = (1/a) ||(I+R)^{-1}||_F (a ||R||_F - theta ||H1||_F)(a ||I||_F - sqrt(nu theta) ||R H2||_F)`
/// evaluated with the closed forms `||R||_F = ||I||_F = sqrt(2m)`,
/// `||(I+R)^{-1}||_F = sqrt(m)`, `||H1||_F = sqrt(2) ||M||_F`, `||R H2||_F = sqrt(2) ||K||_F`.
pub fn phi(s: &SystemBundle, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let p = s.params();
    let m = s.m() as f64;
    let norm_i = (2.0 * m).sqrt();
    let norm_r = norm_i;
    let norm_inv = m.sqrt();
    let norm_h1 = std::f64::consts::SQRT_2 * s.mass().frob_norm();
    let norm_rh2 = std::f64::consts::SQRT_2 * s.stiffness().frob_norm();
    let first = alpha * norm_r - p.theta() * norm_h1;
    let second = alpha * norm_i - (p.nu() * p.theta()).sqrt() * norm_rh2;
    Ok(norm_inv * first * second / alpha)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")))
    }
}

/// `sqrt(a^2 + t^2) / (a + t)` for `t = theta * lambda`.
pub fn chi(alpha: f64, theta: f64, lambda: f64) -> f64 {
    let t = theta * lambda;
    alpha.hypot(t) / (alpha + t)
}

/// `sqrt(a^2 + nu theta mu^2) / (a + sqrt(nu theta) mu)`.
pub fn vartheta(alpha: f64, nu: f64, theta: f64, mu: f64) -> f64 {
    let t = (nu * theta).sqrt() * mu;
    alpha.hypot(t) / (alpha + t)
}

/// `max chi` over the spectrum of `M`, evaluated at its ends.
pub fn chi_max(alpha: f64, theta: f64, lam: &SpectralExtremes) -> f64 {
    chi(alpha, theta, lam.min_eig).max(chi(alpha, theta, lam.max_eig))
}

/// `max vartheta` over the spectrum of `K`, evaluated at its ends.
pub fn vartheta_max(alpha: f64, nu: f64, theta: f64, mu: &SpectralExtremes) -> f64 {
    vartheta(alpha, nu, theta, mu.min_eig).max(vartheta(alpha, nu, theta, mu.max_eig))
}

/// Upper bound `eta_alpha` on the spectral radius of the MBAS iteration matrix.
pub fn eta_bound(alpha: f64, lam: &SpectralExtremes, mu: &SpectralExtremes, nu: f64, omega: f64) -> Result<f64> {
    check_alpha(alpha)?;
    for e in [lam, mu] {
        SpectralExtremes::new(e.min_eig, e.max_eig)?;
    }
    let th = theta(nu, omega)?;
    Ok(chi_max(alpha, th, lam) * vartheta_max(alpha, nu, th, mu))
}

/// `alpha1 = theta sqrt(lambda_min lambda_max)` minimises `chi_max`.
pub fn alpha_chi_opt(theta: f64, lam: &SpectralExtremes) -> f64 {
    theta * lam.geometric_mean()
}

/// `alpha2 = sqrt(nu theta mu_min mu_max)` minimises `vartheta_max`.
pub fn alpha_vartheta_opt(nu: f64, theta: f64, mu: &SpectralExtremes) -> f64 {
    (nu * theta).sqrt() * mu.geometric_mean()
}

/// Rule for choosing the iteration parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaPolicy {
    /// `theta ||M||_F / sqrt(m)`
    Estimated,
    /// `theta`, the usual BAS iteration choice.
    BasIteration,
    /// `theta / (1 + sqrt(nu) omega)`, the usual BAS preconditioner choice.
    BasPreconditioner,
    /// `sqrt(lambda_min lambda_max)` of `M`, the usual ASSS choice.
    AsssDefault,
    ChiOptimal,
    VarthetaOptimal,
    Custom(f64),
}

impl AlphaPolicy {
    /// The policy the experiments pair with each method.
    pub fn default_for(method: crate::Method, mode: crate::Mode) -> Self {
        use crate::{Method, Mode};
        match (method, mode) {
            (Method::Mbas, _) => Self::Estimated,
            (Method::Bas, Mode::Stationary) => Self::BasIteration,
            (Method::Bas, Mode::Gmres) => Self::BasPreconditioner,
            (Method::Asss, _) => Self::AsssDefault,
        }
    }
}

impl fmt::Display for AlphaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Estimated => f.write_str("est"),
            Self::BasIteration => f.write_str("bas-iter"),
            Self::BasPreconditioner => f.write_str("bas-prec"),
            Self::AsssDefault => f.write_str("asss"),
            Self::ChiOptimal => f.write_str("alpha1"),
            Self::VarthetaOptimal => f.write_str("alpha2"),
            Self::Custom(v) => write!(f, "custom:{v:e}"),
        }
    }
}

impl FromStr for AlphaPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "est" | "estimated" => Self::Estimated,
            "bas-iter" | "theta" => Self::BasIteration,
            "bas-prec" => Self::BasPreconditioner,
            "asss" => Self::AsssDefault,
            "alpha1" => Self::ChiOptimal,
            "alpha2" => Self::VarthetaOptimal,
            other => {
                let v = other
                    .strip_prefix("custom:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown alpha policy '{other}'")))?;
                check_alpha(v)?;
                Self::Custom(v)
            }
        })
    }
}

/// Resolves a policy to a positive `alpha` for the given system.
pub fn resolve_alpha(policy: AlphaPolicy, s: &SystemBundle) -> Result<f64> {
    let p = s.params();
    let th = p.theta();
    let alpha = match policy {
        AlphaPolicy::Estimated => alpha_est(s),
        AlphaPolicy::BasIteration => th,
        AlphaPolicy::BasPreconditioner => th / (1.0 + p.nu().sqrt() * p.omega()),
        AlphaPolicy::AsssDefault => s.disc().mass_extremes()?.geometric_mean(),
        AlphaPolicy::ChiOptimal => alpha_chi_opt(th, &s.disc().mass_extremes()?),
        AlphaPolicy::VarthetaOptimal => alpha_vartheta_opt(p.nu(), th, &s.disc().stiffness_extremes()?),
        AlphaPolicy::Custom(v) => v,
    };
    check_alpha(alpha)?;
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(lo: f64, hi: f64) -> SpectralExtremes {
        SpectralExtremes::new(lo, hi).unwrap()
    }

    #[test]
    fn theta_arithmetic() {
        assert_eq!(theta(1e-2, 1e4).unwrap(), 1_000_001.0);
        assert_eq!(theta(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(theta(1e-8, 1e-4).unwrap(), 1.0 + 1e-16);
        assert!(theta(0.0, 1.0).is_err());
    }

    #[test]
    fn single_point_spectrum_gives_one_half() {
        let (alpha, nu, omega) = (0.3, 0.5, 2.0);
        let th = theta(nu, omega).unwrap();
        let lam = ext(alpha / th, alpha / th);
        let mu_v = alpha / (nu * th).sqrt();
        let mu = ext(mu_v, mu_v);
        let eta = eta_bound(alpha, &lam, &mu, nu, omega).unwrap();
        assert!((eta - 0.5).abs() < 1e-15, "{eta}");
    }

    #[test]
    fn eta_is_strictly_between_zero_and_one() {
        for &(a, nu, w) in &[(1e-5, 1e-8, 1e4), (10.0, 1e-2, 1e-4), (3e-5, 1e-4, 10.0)] {
            let eta = eta_bound(a, &ext(1e-5, 1e-3), &ext(1e-3, 8.0), nu, w).unwrap();
            assert!(eta > 0.0 && eta < 1.0, "{eta}");
        }
    }

    #[test]
    fn eta_rejects_bad_inputs() {
        assert!(eta_bound(0.0, &ext(1.0, 2.0), &ext(1.0, 2.0), 1.0, 1.0).is_err());
        let bad = SpectralExtremes { min_eig: -1.0, ..ext(1.0, 2.0) };
        assert!(eta_bound(1.0, &bad, &ext(1.0, 2.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn policy_parsing_round_trips() {
        for p in [
            AlphaPolicy::Estimated,
            AlphaPolicy::BasIteration,
            AlphaPolicy::BasPreconditioner,
            AlphaPolicy::AsssDefault,
            AlphaPolicy::ChiOptimal,
            AlphaPolicy::VarthetaOptimal,
            AlphaPolicy::Custom(0.25),
        ] {
            assert_eq!(p.to_string().parse::<AlphaPolicy>().unwrap(), p);
        }
        assert!("custom:-1".parse::<AlphaPolicy>().is_err());
        assert!("best".parse::<AlphaPolicy>().is_err());
    }

    #[test]
    fn simple_policies() {
        let s = SystemBundle::assemble(1, ProblemParams::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(resolve_alpha(AlphaPolicy::BasIteration, &s).unwrap(), 2.0);
        assert_eq!(resolve_alpha(AlphaPolicy::BasPreconditioner, &s).unwrap(), 1.0);
        assert_eq!(resolve_alpha(AlphaPolicy::Custom(0.5), &s).unwrap(), 0.5);
        // m = 1: M = [1/9]
        assert!((resolve_alpha(AlphaPolicy::AsssDefault, &s).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((alpha_est(&s) - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn phi_vanishes_at_the_estimate() {
        let s = SystemBundle::assemble(3, ProblemParams::new(1e-2, 10.0).unwrap()).unwrap();
        let a = alpha_est(&s);
        let scale = phi(&s, 2.0 * a).unwrap().abs();
        assert!(phi(&s, a).unwrap().abs() <= 1e-14 * scale);
        assert!(phi(&s, -1.0).is_err());
    }
}
