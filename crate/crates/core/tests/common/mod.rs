#![allow(dead_code)]

use std::sync::Arc;

use mbas_core::meshfem::Grid;
use mbas_core::systems::{BlockVecC, BlockVecR, Discretization, ProblemParams, SystemBundle};
use mbas_core::Complex64;
use proptest::prelude::*;

pub fn bundle(k: u32, nu: f64, omega: f64) -> SystemBundle {
    SystemBundle::assemble(k, ProblemParams::new(nu, omega).unwrap()).unwrap()
}

pub fn disc(k: u32) -> Arc<Discretization> {
    Arc::new(Discretization::assemble(Grid::new(k).unwrap()))
}

/// `(nu, omega)` log-uniform over the experiment ranges.
pub fn params() -> impl Strategy<Value = ProblemParams> {
    (-8.0f64..=-2.0, -4.0f64..=4.0).prop_map(|(a, b)| ProblemParams::new(10f64.powf(a), 10f64.powf(b)).unwrap())
}

pub fn block_c(m: usize) -> impl Strategy<Value = BlockVecC> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * m)
        .prop_map(|v| BlockVecC::from_flat(&v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect::<Vec<_>>()))
}

pub fn block_r(m: usize) -> impl Strategy<Value = BlockVecR> {
    prop::collection::vec(-1.0f64..1.0, 4 * m).prop_map(|v| BlockVecR::from_flat(&v))
}

/// Deterministic nonzero complex probe.
pub fn probe_c(m: usize, seed: f64) -> BlockVecC {
    let v: Vec<Complex64> = (0..2 * m)
        .map(|i| Complex64::new((seed + 1.3 * i as f64).sin(), (seed * 0.7 + 0.9 * i as f64).cos()))
        .collect();
    BlockVecC::from_flat(&v)
}

pub fn rel_c(a: &BlockVecC, b: &BlockVecC) -> f64 {
    a.sub(b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn rel_r(a: &BlockVecR, b: &BlockVecR) -> f64 {
    a.sub(b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
