mod common;

use common::*;
use mbas_core::dense::*;
use mbas_core::params::{alpha_est, phi};
use mbas_core::splittings::MbasIteration;
use mbas_core::systems::*;
use mbas_core::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn splitting_reproduces_transformed_matrix(k in 2u32..=4, p in params(), la in -2.0f64..2.0) {
        let s = bundle(k, p.nu(), p.omega());
        let alpha = alpha_est(&s) * 10f64.powf(la);
        let sp = build_splitting_dense(&s, alpha).unwrap();
        let diff = (&sp.atilde - (&sp.b - &sp.c)).norm();
        prop_assert!(diff <= 1e-10 * sp.atilde.norm(), "diff {diff:e}");
    }
}

/// One sweep equals `x <- P x + Q b̃` with `P`, `Q` written out densely.
#[test]
fn one_step_matches_dense_fixed_point_form() {
    for (nu, om) in [(1e-2, 1e-3), (1e-6, 10.0), (1e-4, 1e3)] {
        let s = bundle(2, nu, om);
        let p = s.params();
        let alpha = alpha_est(&s);
        let n = 2 * s.m();
        let id = CMat::identity(n, n);
        let r = dense_r(&p, s.m()).unwrap();
        let h1 = dense_h1(&s).unwrap();
        let h2 = dense_h2(&s).unwrap();
        let sq = c((p.nu() * p.theta()).sqrt());
        let th = c(p.theta());
        let s1 = &id * c(alpha) + &h1 * th;
        let s2 = &id * c(alpha) + &h2 * sq;
        let s1_inv = s1.clone().try_inverse().unwrap();
        let s2_inv = s2.clone().try_inverse().unwrap();
        let pa = &s2_inv * (&id * c(alpha) + &r * &h1 * th) * &s1_inv * (&id * c(alpha) - &r * &h2 * sq);
        let qa = &s2_inv * (&id - &r) * &s1_inv * c(alpha);

        let it = MbasIteration::new(&s, alpha, Default::default()).unwrap();
        let x = probe_c(s.m(), 0.4);
        let stepped = block_to_dvec(&mbas_core::splittings::StationaryIteration::step(&it, &x).unwrap());
        let expect = &pa * block_to_dvec(&x) + &qa * dense_btilde(&s);
        assert!((&stepped - &expect).norm() <= 1e-9 * expect.norm(), "nu {nu} om {om}");
    }
}

/// Columns of `B^{-1} C` traced by stepping basis vectors with a zero rhs.
#[test]
fn iteration_matrix_matches_step_tracing() {
    let s = bundle(2, 1e-4, 10.0);
    let alpha = alpha_est(&s);
    let g = build_splitting_dense(&s, alpha).unwrap().iteration_matrix().unwrap();
    let it = MbasIteration::new(&s, alpha, Default::default()).unwrap();
    let n = 2 * s.m();
    let zero = BlockVecC::zeros(s.m());
    for j in 0..n {
        let mut e = vec![c(0.0); n];
        e[j] = c(1.0);
        let col = block_to_dvec(&it.step_with(&BlockVecC::from_flat(&e), &zero).unwrap());
        let expect = g.column(j).into_owned();
        assert!((&col - &expect).norm() <= 1e-10 * expect.norm().max(1e-300), "column {j}");
    }
}

#[test]
fn dense_solutions_agree_across_forms() {
    for k in [1, 2, 3] {
        for (nu, om) in [(1e-2, 1e-4), (1e-6, 1.0), (1e-8, 1e4)] {
            let s = bundle(k, nu, om);
            let x = solve_c(&dense_a(&s).unwrap(), &dense_b(&s)).unwrap();
            let xt = solve_c(&dense_atilde(&s).unwrap(), &dense_btilde(&s)).unwrap();
            let y = solve_r(&dense_areal(&s).unwrap(), &dense_c(&s)).unwrap();
            let yn = solve_r(&dense_asss_form(&s).unwrap(), &dense_ctilde(&s)).unwrap();
            let xr = blockr_to_dvec(&to_real(&dvec_to_block(&x)));
            assert!((&xt - &x).norm() <= 1e-8 * x.norm());
            assert!((&y - &xr).norm() <= 1e-8 * xr.norm());
            assert!((&yn - &xr).norm() <= 1e-8 * xr.norm());
        }
    }
}

#[test]
fn closed_form_frobenius_norms() {
    let s = bundle(2, 1e-3, 30.0);
    let p = s.params();
    let m = s.m() as f64;
    let n = 2 * s.m();
    let r = dense_r(&p, s.m()).unwrap();
    let id = CMat::identity(n, n);
    let inv = (&id + &r).try_inverse().unwrap();
    assert!((inv.norm() - m.sqrt()).abs() <= 1e-12 * m.sqrt());
    assert!((r.norm() - (2.0 * m).sqrt()).abs() <= 1e-12);
    let h2 = dense_h2(&s).unwrap();
    assert!(((&r * &h2).norm() - h2.norm()).abs() <= 1e-12 * h2.norm());
    assert!((dense_h1(&s).unwrap().norm() - 2f64.sqrt() * s.mass().frob_norm()).abs() <= 1e-14);
    // the estimate zeroes the first factor
    assert!(phi(&s, alpha_est(&s)).unwrap().abs() <= 1e-12 * alpha_est(&s));
}

#[test]
fn real_form_dense_is_real_representation() {
    let s = bundle(2, 1e-2, 3.0);
    let a = dense_a(&s).unwrap();
    let ar = dense_areal(&s).unwrap();
    let m = s.m();
    // (y, q) -> (Re y, Im y, Re q, Im q): 𝒜 must embed A exactly
    let n = 2 * m;
    let mut embed = DMatrix::<f64>::zeros(4 * m, 4 * m);
    for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        for i in 0..m {
            for j in 0..m {
                let z = a[(bi * m + i, bj * m + j)];
                embed[(2 * bi * m + i, 2 * bj * m + j)] = z.re;
                embed[(2 * bi * m + i, (2 * bj + 1) * m + j)] = -z.im;
                embed[((2 * bi + 1) * m + i, 2 * bj * m + j)] = z.im;
                embed[((2 * bi + 1) * m + i, (2 * bj + 1) * m + j)] = z.re;
            }
        }
    }
    assert_eq!(n * 2, 4 * m);
    assert!((&embed - &ar).norm() <= 1e-14 * ar.norm());
}
