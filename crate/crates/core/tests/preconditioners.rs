mod common;

use common::*;
use mbas_core::dense::*;
use mbas_core::krylov::{gmres_full, FnOperator, GmresConfig, Identity};
use mbas_core::params::alpha_est;
use mbas_core::precond::*;
use mbas_core::systems::*;
use mbas_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn mbas_inverse_matches_dense_splitting_matrix() {
    for (nu, om) in [(1e-2, 1e-4), (1e-4, 1e2), (1e-8, 1e4)] {
        let s = bundle(2, nu, om);
        let alpha = alpha_est(&s);
        let b = build_splitting_dense(&s, alpha).unwrap().b;
        let v = probe_c(s.m(), 1.7);
        let got = block_to_dvec(&apply_bmbas_inv(&s, alpha, &v).unwrap());
        let expect = solve_c(&b, &block_to_dvec(&v)).unwrap();
        assert!((&got - &expect).norm() <= 1e-9 * expect.norm(), "nu {nu} om {om}");
    }
}

#[test]
fn preconditioners_are_linear() {
    let s = bundle(2, 1e-6, 1e3);
    let alpha = alpha_est(&s);
    let (x, y) = (probe_c(s.m(), 0.2), probe_c(s.m(), -3.0));
    let (a, b) = (Complex64::new(2.0, 1.0), Complex64::new(-0.5, 0.25));
    let comb = BlockVecC::lin_comb(a, &x, b, &y);
    let mbas = MbasPreconditioner::new(&s, alpha, Default::default()).unwrap();
    let bas = BasPreconditioner::new(&s, 0.3, Default::default()).unwrap();
    let ops: [&dyn Fn(&BlockVecC) -> BlockVecC; 2] = [&|v| mbas.apply_inv(v).unwrap(), &|v| bas.apply_inv(v).unwrap()];
    for f in ops {
        let lhs = f(&comb);
        let rhs = BlockVecC::lin_comb(a, &f(&x), b, &f(&y));
        assert!(rel_c(&lhs, &rhs) <= 1e-12);
    }
    let asss = AsssPreconditioner::new(&s, 0.01, Default::default()).unwrap();
    let (xr, yr) = (to_real(&x), to_real(&y));
    let lhs = asss.apply_inv(&BlockVecR::lin_comb(2.0, &xr, -3.0, &yr)).unwrap();
    let rhs = BlockVecR::lin_comb(2.0, &asss.apply_inv(&xr).unwrap(), -3.0, &asss.apply_inv(&yr).unwrap());
    assert!(rel_r(&lhs, &rhs) <= 1e-12);
}

#[test]
fn preconditioned_system_keeps_solution() {
    let s = bundle(2, 1e-4, 10.0);
    let alpha = alpha_est(&s);
    let xs = dvec_to_block(&solve_c(&dense_atilde(&s).unwrap(), &dense_btilde(&s)).unwrap());
    let lhs = apply_bmbas_inv(&s, alpha, &apply_atilde(&s, &xs).unwrap()).unwrap();
    let rhs = apply_bmbas_inv(&s, alpha, &rhs_btilde(&s)).unwrap();
    assert!(rel_c(&lhs, &rhs) <= 1e-9);
}

#[test]
fn gmres_solutions_match_dense() {
    for k in [2, 3] {
        for (nu, om) in [(1e-2, 1e-4), (1e-6, 1e3)] {
            let s = bundle(k, nu, om);
            let p = s.params();
            let x = solve_c(&dense_a(&s).unwrap(), &dense_b(&s)).unwrap();
            let mut cfg = PrecondConfig::new(alpha_est(&s));
            cfg.gmres.tol = 1e-12;
            let (xm, rm) = pmbas_gmres(&s, &cfg).unwrap();
            assert!(rm.converged);
            assert!((block_to_dvec(&xm) - &x).norm() <= 1e-7 * x.norm());

            cfg.alpha = p.theta() / (1.0 + nu.sqrt() * om);
            let (xb, rb) = pbas_gmres(&s, &cfg).unwrap();
            assert!(rb.converged);
            assert!((block_to_dvec(&xb) - &x).norm() <= 1e-7 * x.norm());

            cfg.alpha = 0.01;
            let (ya, ra) = passs_gmres(&s, &cfg).unwrap();
            assert!(ra.converged);
            assert!((block_to_dvec(&from_real(&ya)) - &x).norm() <= 1e-7 * x.norm());
        }
    }
}

#[test]
fn gmres_terminates_within_dimension() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 8;
    let a: Vec<Complex64> = (0..n * n)
        .map(|i| {
            let d = if i % (n + 1) == 0 { 4.0 } else { 0.0 };
            Complex64::new(d + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    let b: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let op =
        FnOperator::new(n, |x: &[Complex64]| Ok((0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()));
    let out = gmres_full(&op, &Identity(n), &b, GmresConfig { tol: 1e-12, maxit: 50 }).unwrap();
    assert!(out.converged);
    assert!(out.iterations <= n);
    assert!(out.true_residual <= 1e-10);
}
