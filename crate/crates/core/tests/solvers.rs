mod common;

use common::*;
use mbas_core::dense::*;
use mbas_core::eigen::{dense_extremes, lanczos_extremes};
use mbas_core::inner::InnerSolver;
use mbas_core::params::{alpha_est, resolve_alpha, AlphaPolicy};
use mbas_core::precond::{pbas_gmres, pmbas_gmres, PrecondConfig};
use mbas_core::splittings::*;
use mbas_core::systems::*;
use mbas_core::{Method, Mode};

#[test]
fn stationary_limits_are_dense_solutions() {
    let s = bundle(2, 1e-4, 1.0);
    let x = solve_c(&dense_a(&s).unwrap(), &dense_b(&s)).unwrap();
    let mut cfg = IterConfig::new(alpha_est(&s));
    cfg.tol = 1e-13;
    cfg.maxit = 5000;
    let (xm, rep) = mbas_solve(&s, &cfg).unwrap();
    assert!(rep.converged);
    assert!((block_to_dvec(&xm) - &x).norm() <= 1e-10 * x.norm());

    cfg.alpha = resolve_alpha(AlphaPolicy::default_for(Method::Asss, Mode::Stationary), &s).unwrap();
    let (ya, rep) = asss_solve(&s, &cfg).unwrap();
    assert!(rep.converged);
    assert!((block_to_dvec(&from_real(&ya)) - &x).norm() <= 1e-10 * x.norm());
}

#[test]
fn converged_iterates_satisfy_original_system() {
    let s = bundle(4, 1e-6, 10.0);
    let b = rhs_b(&s);
    let res = |x: &BlockVecC| b.sub(&apply_a(&s, x).unwrap()).norm() / b.norm();
    let alpha = |m, mode| resolve_alpha(AlphaPolicy::default_for(m, mode), &s).unwrap();

    let (x, r) = mbas_solve(&s, &IterConfig::new(alpha(Method::Mbas, Mode::Stationary))).unwrap();
    assert!(r.converged && res(&x) <= 1e-5);
    let (x, r) = bas_solve(&s, &IterConfig::new(alpha(Method::Bas, Mode::Stationary))).unwrap();
    assert!(r.converged && res(&x) <= 1e-5);
    let (y, r) = asss_solve(&s, &IterConfig::new(alpha(Method::Asss, Mode::Stationary))).unwrap();
    assert!(r.converged && res(&from_real(&y)) <= 1e-5);
    let (x, r) = pmbas_gmres(&s, &PrecondConfig::new(alpha(Method::Mbas, Mode::Gmres))).unwrap();
    assert!(r.converged && res(&x) <= 1e-5);
    let (x, r) = pbas_gmres(&s, &PrecondConfig::new(alpha(Method::Bas, Mode::Gmres))).unwrap();
    assert!(r.converged && res(&x) <= 1e-5);
}

#[test]
fn cg_inner_solves_give_same_counts() {
    let s = bundle(5, 1e-2, 1e2);
    let a = alpha_est(&s);
    let direct = mbas_solve(&s, &IterConfig::new(a)).unwrap().1;
    let mut cfg = IterConfig::new(a);
    cfg.inner = InnerSolver::cg(1e-12);
    let cg = mbas_solve(&s, &cfg).unwrap().1;
    assert_eq!(direct.iterations, cg.iterations);
    let (h1, h2) = (&direct.residual_history, &cg.residual_history);
    assert!(h1.iter().zip(h2).all(|(p, q)| (p - q).abs() <= 1e-6 * p));
}

#[test]
fn iterative_and_dense_extremes_agree() {
    let d = disc(3);
    for a in [d.mass(), d.stiffness()] {
        let e = dense_extremes(a).unwrap();
        let l = lanczos_extremes(a, 1e-8).unwrap();
        assert!((e.min_eig - l.min_eig).abs() <= 1e-5 * e.min_eig);
        assert!((e.max_eig - l.max_eig).abs() <= 1e-5 * e.max_eig);
    }
}

#[test]
fn fine_grid_mass_norm_gives_printed_estimate() {
    // ||M||_F / sqrt(m) at h = 1/128, printed as 0.00003 for small theta
    let d = disc(7);
    let ratio = d.mass().frob_norm() / (d.m() as f64).sqrt();
    assert!((3.0e-5..3.1e-5).contains(&ratio), "ratio {ratio:e}");
}

#[test]
fn history_is_monotone_enough_and_starts_at_one() {
    let s = bundle(3, 1e-8, 1e4);
    let (_, rep) = mbas_solve(&s, &IterConfig::new(alpha_est(&s))).unwrap();
    assert_eq!(rep.residual_history.len(), rep.iterations + 1);
    assert!((rep.residual_history[0] - 1.0).abs() < 1e-14);
    assert!(*rep.residual_history.last().unwrap() <= 1e-6);
}
