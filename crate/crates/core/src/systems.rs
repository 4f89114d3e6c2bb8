//! Matrix-free forms of the optimality system.
//!
//! Three algebraically equivalent systems are exposed:
//!
//! - the complex system `A x = b` with
//!   `A = [[M, sqrt(nu)(K - i w M)], [sqrt(nu)(K + i w M), -M]]` and `b = (M yd; 0)`;
//! - the transformed system `Ã x = b̃` obtained by premultiplying with `R1^H`,
//!   `Ã = theta H1 + sqrt(nu theta) R H2`, `H1 = bldiag(M, M)`, `H2 = bldiag(K, K)`;
//! - the real `4m` form `𝒜 y = c` acting on `(Re y, Im y, Re q, Im q)`.
//!
//! The real form used here writes `𝒜 = T1 bldiag(M,M,M,M) + T2 bldiag(K,K,K,K)`
//! where `T1` and `T2` are the real representations of `R1` and `R2`. With this
//! sign convention `to_real(A x) == 𝒜 to_real(x)` holds exactly, which is
//! checked against dense solves in the tests.
//!
//! The ASSS iteration acts on the normalised real form `(ℳ + 𝒢𝒦) y = c̃`,
//! which is the real representation of `Ã / theta`; see [`apply_asss_form`].
//!
//! Nothing here assembles a block matrix: every operator is a combination of
//! `M`/`K` products and scalar block patterns.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{eig_extremes, SpectralExtremes, DEFAULT_EIG_TOL};
use crate::error::{check_len, Error, Result};
use crate::meshfem::{assemble_mass, assemble_stiffness, assemble_target, Grid};
use crate::sparse::{ComplexVec, CsrMatrix};

/// Regularization `nu > 0` and frequency `omega >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    nu: f64,
    omega: f64,
}

impl ProblemParams {
    pub fn new(nu: f64, omega: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
        }
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be nonnegative, got {omega}")));
        }
        Ok(Self { nu, omega })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `theta = 1 + nu omega^2`, always recomputed.
    pub fn theta(&self) -> f64 {
        1.0 + self.nu * self.omega * self.omega
    }
}

/// Assembled matrices and target vector, with spectra computed on first use.
#[derive(Debug)]
pub struct Discretization {
    grid: Option<Grid>,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    target: Vec<f64>,
    mass_extremes: OnceLock<SpectralExtremes>,
    stiffness_extremes: OnceLock<SpectralExtremes>,
}

impl Discretization {
    /// Assembles the Q1 discretization on `grid`.
    pub fn assemble(grid: Grid) -> Self {
        Self {
            grid: Some(grid),
            mass: assemble_mass(&grid),
            stiffness: assemble_stiffness(&grid),
            target: assemble_target(&grid),
            mass_extremes: OnceLock::new(),
            stiffness_extremes: OnceLock::new(),
        }
    }

    /// Wraps user-supplied matrices (synthetic tests, imported data).
    pub fn from_matrices(mass: CsrMatrix, stiffness: CsrMatrix, target: Vec<f64>) -> Result<Self> {
        let m = mass.nrows();
        check_len(m, mass.ncols())?;
        check_len(m, stiffness.nrows())?;
        check_len(m, stiffness.ncols())?;
        check_len(m, target.len())?;
        Ok(Self {
            grid: None,
            mass,
            stiffness,
            target,
            mass_extremes: OnceLock::new(),
            stiffness_extremes: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> Option<Grid> {
        self.grid
    }

    pub fn m(&self) -> usize {
        self.mass.nrows()
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// Extreme eigenvalues of `M`, computed once.
    pub fn mass_extremes(&self) -> Result<SpectralExtremes> {
        cached_extremes(&self.mass_extremes, &self.mass)
    }

    /// Extreme eigenvalues of `K`, computed once.
    pub fn stiffness_extremes(&self) -> Result<SpectralExtremes> {
        cached_extremes(&self.stiffness_extremes, &self.stiffness)
    }
}

fn cached_extremes(cell: &OnceLock<SpectralExtremes>, a: &CsrMatrix) -> Result<SpectralExtremes> {
    if let Some(e) = cell.get() {
        return Ok(*e);
    }
    let e = eig_extremes(a, DEFAULT_EIG_TOL)?;
    Ok(*cell.get_or_init(|| e))
}

/// A discretization paired with `(nu, omega)`. Cloning shares the matrices.
#[derive(Debug, Clone)]
pub struct SystemBundle {
    disc: Arc<Discretization>,
    params: ProblemParams,
}

impl SystemBundle {
    pub fn new(disc: Arc<Discretization>, params: ProblemParams) -> Self {
        Self { disc, params }
    }

    /// Assembles a fresh discretization at `level`.
    pub fn assemble(level: u32, params: ProblemParams) -> Result<Self> {
        Ok(Self::new(Arc::new(Discretization::assemble(Grid::new(level)?)), params))
    }

    pub fn with_params(&self, params: ProblemParams) -> Self {
        Self { disc: Arc::clone(&self.disc), params }
    }

    pub fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn params(&self) -> ProblemParams {
        self.params
    }

    pub fn m(&self) -> usize {
        self.disc.m()
    }

    pub fn mass(&self) -> &CsrMatrix {
        self.disc.mass()
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        self.disc.stiffness()
    }

    pub fn target(&self) -> &[f64] {
        self.disc.target()
    }
}

/// Complex block vector `(y; q)`, each block of length `m`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockVecC {
    pub y: ComplexVec,
    pub q: ComplexVec,
}

impl BlockVecC {
    pub fn new(y: ComplexVec, q: ComplexVec) -> Self {
        assert_eq!(y.len(), q.len(), "block lengths differ");
        Self { y, q }
    }

    pub fn zeros(m: usize) -> Self {
        Self { y: ComplexVec::zeros(m), q: ComplexVec::zeros(m) }
    }

    /// Block length `m`.
    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn norm(&self) -> f64 {
        (self.y.norm_sqr() + self.q.norm_sqr()).sqrt()
    }

    pub fn dot(&self, other: &Self) -> Complex64 {
        self.y.dot(&other.y) + self.q.dot(&other.q)
    }

    pub fn lin_comb(a: Complex64, x: &Self, b: Complex64, z: &Self) -> Self {
        Self { y: ComplexVec::lin_comb(a, &x.y, b, &z.y), q: ComplexVec::lin_comb(a, &x.q, b, &z.q) }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self { y: self.y.scaled(a), q: self.q.scaled(a) }
    }

    pub fn axpy(&mut self, a: Complex64, x: &Self) {
        self.y.axpy(a, &x.y);
        self.q.axpy(a, &x.q);
    }

    pub fn sub(&self, other: &Self) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self::lin_comb(one, self, -one, other)
    }

    /// Flat layout `[y; q]`.
    pub fn to_flat(&self) -> Vec<Complex64> {
        let mut v = self.y.to_complex();
        v.extend(self.q.to_complex());
        v
    }

    pub fn from_flat(v: &[Complex64]) -> Self {
        assert!(v.len().is_multiple_of(2), "flat block vector has odd length");
        let m = v.len() / 2;
        Self { y: ComplexVec::from_complex(&v[..m]), q: ComplexVec::from_complex(&v[m..]) }
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.q.is_finite()
    }
}

/// Real block vector `(Re y, Im y, Re q, Im q)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockVecR {
    pub parts: [Vec<f64>; 4],
}

impl BlockVecR {
    pub fn new(parts: [Vec<f64>; 4]) -> Self {
        let m = parts[0].len();
        assert!(parts.iter().all(|p| p.len() == m), "block lengths differ");
        Self { parts }
    }

    pub fn zeros(m: usize) -> Self {
        Self { parts: std::array::from_fn(|_| vec![0.0; m]) }
    }

    pub fn m(&self) -> usize {
        self.parts[0].len()
    }

    pub fn norm(&self) -> f64 {
        self.parts.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.parts.iter().flatten().zip(other.parts.iter().flatten()).map(|(a, b)| a * b).sum()
    }

    pub fn lin_comb(a: f64, x: &Self, b: f64, z: &Self) -> Self {
        Self {
            parts: std::array::from_fn(|k| x.parts[k].iter().zip(&z.parts[k]).map(|(p, q)| a * p + b * q).collect()),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { parts: std::array::from_fn(|k| self.parts[k].iter().map(|v| a * v).collect()) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::lin_comb(1.0, self, -1.0, other)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.parts.concat()
    }

    pub fn from_flat(v: &[f64]) -> Self {
        assert!(v.len().is_multiple_of(4), "flat real block vector length not divisible by 4");
        let m = v.len() / 4;
        Self { parts: std::array::from_fn(|k| v[k * m..(k + 1) * m].to_vec()) }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Applies a 2x2 pattern of complex scalars times identity blocks.
pub(crate) fn scalar_block2(coef: [[Complex64; 2]; 2], v: &BlockVecC) -> BlockVecC {
    BlockVecC {
        y: ComplexVec::lin_comb(coef[0][0], &v.y, coef[0][1], &v.q),
        q: ComplexVec::lin_comb(coef[1][0], &v.y, coef[1][1], &v.q),
    }
}

/// Applies a 4x4 pattern of real scalars times identity blocks.
pub(crate) fn scalar_block4(coef: &[[f64; 4]; 4], v: &BlockVecR) -> BlockVecR {
    let m = v.m();
    BlockVecR {
        parts: std::array::from_fn(|r| {
            let mut out = vec![0.0; m];
            for (k, part) in v.parts.iter().enumerate() {
                let a = coef[r][k];
                if a != 0.0 {
                    for (o, x) in out.iter_mut().zip(part) {
                        *o += a * x;
                    }
                }
            }
            out
        }),
    }
}

/// Coefficients of `R = (1/sqrt(nu theta)) [[-i w nu, sqrt(nu)], [-sqrt(nu), i w nu]]`.
pub fn r_coefficients(p: &ProblemParams) -> [[Complex64; 2]; 2] {
    let g = 1.0 / (p.nu() * p.theta()).sqrt();
    let wn = p.omega() * p.nu() * g;
    let sn = p.nu().sqrt() * g;
    [[c(0.0, -wn), c(sn, 0.0)], [c(-sn, 0.0), c(0.0, wn)]]
}

/// Coefficients of `R1 = [[I, -i w sqrt(nu) I], [i w sqrt(nu) I, -I]]` (Hermitian).
pub fn r1_coefficients(p: &ProblemParams) -> [[Complex64; 2]; 2] {
    let a = p.omega() * p.nu().sqrt();
    [[c(1.0, 0.0), c(0.0, -a)], [c(0.0, a), c(-1.0, 0.0)]]
}

fn conj_transpose2(k: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [[k[0][0].conj(), k[1][0].conj()], [k[0][1].conj(), k[1][1].conj()]]
}

fn check_block(m: usize, v: &BlockVecC) -> Result<()> {
    check_len(m, v.y.len())?;
    check_len(m, v.q.len())
}

fn check_block_r(m: usize, v: &BlockVecR) -> Result<()> {
    v.parts.iter().try_for_each(|p| check_len(m, p.len()))
}

/// `R v`; needs no matrix work.
pub fn apply_r(p: &ProblemParams, v: &BlockVecC) -> BlockVecC {
    scalar_block2(r_coefficients(p), v)
}

pub fn apply_r1(p: &ProblemParams, v: &BlockVecC) -> BlockVecC {
    scalar_block2(r1_coefficients(p), v)
}

/// `R1^H v`.
pub fn apply_r1h(p: &ProblemParams, v: &BlockVecC) -> BlockVecC {
    scalar_block2(conj_transpose2(r1_coefficients(p)), v)
}

/// `R2 v = [[0, sqrt(nu)], [sqrt(nu), 0]] v`.
pub fn apply_r2(p: &ProblemParams, v: &BlockVecC) -> BlockVecC {
    let s = c(p.nu().sqrt(), 0.0);
    let z = c(0.0, 0.0);
    scalar_block2([[z, s], [s, z]], v)
}

/// `H1 x = bldiag(M, M) x`.
pub fn apply_h1(s: &SystemBundle, x: &BlockVecC) -> Result<BlockVecC> {
    check_block(s.m(), x)?;
    Ok(BlockVecC { y: s.mass().spmv_complex(&x.y)?, q: s.mass().spmv_complex(&x.q)? })
}

/// `H2 x = bldiag(K, K) x`.
pub fn apply_h2(s: &SystemBundle, x: &BlockVecC) -> Result<BlockVecC> {
    check_block(s.m(), x)?;
    Ok(BlockVecC { y: s.stiffness().spmv_complex(&x.y)?, q: s.stiffness().spmv_complex(&x.q)? })
}

/// `A x` for the complex system.
pub fn apply_a(s: &SystemBundle, x: &BlockVecC) -> Result<BlockVecC> {
    let p = s.params();
    let mx = apply_h1(s, x)?;
    let kx = apply_h2(s, x)?;
    // A = R1 H1 + R2 H2
    let r1 = scalar_block2(r1_coefficients(&p), &mx);
    let r2 = apply_r2(&p, &kx);
    Ok(BlockVecC::lin_comb(c(1.0, 0.0), &r1, c(1.0, 0.0), &r2))
}

/// `b = (M yd; 0)`.
pub fn rhs_b(s: &SystemBundle) -> BlockVecC {
    let top = s.mass().spmv(s.target()).expect("target has length m");
    BlockVecC { y: ComplexVec::from_real(top), q: ComplexVec::zeros(s.m()) }
}

/// `Ã x = theta H1 x + sqrt(nu theta) R H2 x`.
pub fn apply_atilde(s: &SystemBundle, x: &BlockVecC) -> Result<BlockVecC> {
    let p = s.params();
    let mx = apply_h1(s, x)?;
    let rkx = apply_r(&p, &apply_h2(s, x)?);
    Ok(BlockVecC::lin_comb(c(p.theta(), 0.0), &mx, c((p.nu() * p.theta()).sqrt(), 0.0), &rkx))
}

/// `b̃ = R1^H b`.
pub fn rhs_btilde(s: &SystemBundle) -> BlockVecC {
    apply_r1h(&s.params(), &rhs_b(s))
}

pub fn to_real(x: &BlockVecC) -> BlockVecR {
    BlockVecR { parts: [x.y.re.clone(), x.y.im.clone(), x.q.re.clone(), x.q.im.clone()] }
}

pub fn from_real(y: &BlockVecR) -> BlockVecC {
    let [yr, yi, qr, qi] = y.parts.clone();
    BlockVecC { y: ComplexVec::new(yr, yi), q: ComplexVec::new(qr, qi) }
}

/// Real representation of `R1`, multiplying the mass blocks of `𝒜`.
pub fn t1_coefficients(p: &ProblemParams) -> [[f64; 4]; 4] {
    let a = p.omega() * p.nu().sqrt();
    [[1.0, 0.0, 0.0, a], [0.0, 1.0, -a, 0.0], [0.0, -a, -1.0, 0.0], [a, 0.0, 0.0, -1.0]]
}

/// Real representation of `R2`, multiplying the stiffness blocks of `𝒜`.
pub fn t2_coefficients(p: &ProblemParams) -> [[f64; 4]; 4] {
    let s = p.nu().sqrt();
    [[0.0, 0.0, s, 0.0], [0.0, 0.0, 0.0, s], [s, 0.0, 0.0, 0.0], [0.0, s, 0.0, 0.0]]
}

/// `𝒢`, the real representation of `R`.
pub fn g_coefficients(p: &ProblemParams) -> [[f64; 4]; 4] {
    let g = 1.0 / (p.nu() * p.theta()).sqrt();
    let wn = p.omega() * p.nu() * g;
    let sn = p.nu().sqrt() * g;
    [[0.0, wn, sn, 0.0], [-wn, 0.0, 0.0, sn], [-sn, 0.0, 0.0, -wn], [0.0, -sn, wn, 0.0]]
}

fn blockwise(a: &CsrMatrix, y: &BlockVecR) -> Result<BlockVecR> {
    Ok(BlockVecR { parts: [a.spmv(&y.parts[0])?, a.spmv(&y.parts[1])?, a.spmv(&y.parts[2])?, a.spmv(&y.parts[3])?] })
}

/// `ℳ y = bldiag(M, M, M, M) y`.
pub fn apply_mass4(s: &SystemBundle, y: &BlockVecR) -> Result<BlockVecR> {
    check_block_r(s.m(), y)?;
    blockwise(s.mass(), y)
}

/// `bldiag(K, K, K, K) y` (unscaled).
pub fn apply_stiffness4(s: &SystemBundle, y: &BlockVecR) -> Result<BlockVecR> {
    check_block_r(s.m(), y)?;
    blockwise(s.stiffness(), y)
}

/// `𝒜 y` for the real `4m` system.
pub fn apply_areal(s: &SystemBundle, y: &BlockVecR) -> Result<BlockVecR> {
    let p = s.params();
    let my = apply_mass4(s, y)?;
    let ky = apply_stiffness4(s, y)?;
    let a = scalar_block4(&t1_coefficients(&p), &my);
    let b = scalar_block4(&t2_coefficients(&p), &ky);
    Ok(BlockVecR::lin_comb(1.0, &a, 1.0, &b))
}

/// `c = (Re ŷd, Im ŷd, 0, 0)` with `ŷd = M yd`.
pub fn rhs_c(s: &SystemBundle) -> BlockVecR {
    to_real(&rhs_b(s))
}

/// `𝒢 y`.
pub fn apply_g(p: &ProblemParams, y: &BlockVecR) -> BlockVecR {
    scalar_block4(&g_coefficients(p), y)
}

/// `(ℳ + 𝒢𝒦) y` with `𝒦 = sqrt(nu/theta) bldiag(K, K, K, K)`.
///
/// This is `T1 𝒜 / theta`, so it has the same solution as `𝒜 y = c` when paired
/// with [`rhs_asss`]; its residual norm relative to the right-hand side equals
/// that of `𝒜` because `T1 / sqrt(theta)` is orthogonal.
pub fn apply_asss_form(s: &SystemBundle, y: &BlockVecR) -> Result<BlockVecR> {
    let p = s.params();
    let my = apply_mass4(s, y)?;
    let gky = apply_g(&p, &apply_stiffness4(s, y)?);
    Ok(BlockVecR::lin_comb(1.0, &my, (p.nu() / p.theta()).sqrt(), &gky))
}

/// `c̃ = T1 c / theta`, the real representation of `b̃ / theta`.
pub fn rhs_asss(s: &SystemBundle) -> BlockVecR {
    to_real(&rhs_btilde(s)).scaled(1.0 / s.params().theta())
}

/// Control coefficients `u = q / sqrt(nu)`.
pub fn recover_control(q: &ComplexVec, nu: f64) -> Result<ComplexVec> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    Ok(q.scaled(c(1.0 / nu.sqrt(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_bundle() -> SystemBundle {
        SystemBundle::assemble(1, ProblemParams::new(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn theta_values() {
        assert_eq!(ProblemParams::new(1e-2, 1e4).unwrap().theta(), 1_000_001.0);
        assert_eq!(ProblemParams::new(1.0, 0.0).unwrap().theta(), 1.0);
        assert!(ProblemParams::new(0.0, 1.0).is_err());
        assert!(ProblemParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn single_node_apply_a() {
        let s = unit_bundle();
        let x = BlockVecC::new(ComplexVec::from_real(vec![1.0]), ComplexVec::zeros(1));
        let ax = apply_a(&s, &x).unwrap();
        assert!((ax.y.get(0) - c(1.0 / 9.0, 0.0)).norm() < 1e-15);
        assert!((ax.q.get(0) - c(8.0 / 3.0, 1.0 / 9.0)).norm() < 1e-15);
        assert_eq!(apply_a(&s, &BlockVecC::zeros(1)).unwrap(), BlockVecC::zeros(1));
    }

    #[test]
    fn single_node_rhs() {
        let s = unit_bundle();
        // the only node sits at (1/2, 1/2), outside the target quadrant
        assert_eq!(rhs_b(&s), BlockVecC::zeros(1));
        let disc = Discretization::from_matrices(s.mass().clone(), s.stiffness().clone(), vec![1.0]).unwrap();
        let s1 = SystemBundle::new(Arc::new(disc), s.params());
        let b = rhs_b(&s1);
        assert_eq!(b.y.re, vec![1.0 / 9.0]);
        assert!(b.y.im.iter().chain(&b.q.re).chain(&b.q.im).all(|&v| v == 0.0));
        let cvec = rhs_c(&s1);
        assert!(cvec.parts[1].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = unit_bundle();
        assert!(matches!(apply_a(&s, &BlockVecC::zeros(2)), Err(Error::DimensionMismatch { .. })));
        assert!(apply_areal(&s, &BlockVecR::zeros(3)).is_err());
    }

    #[test]
    fn control_recovery() {
        let q = ComplexVec::new(vec![2.0], vec![0.0]);
        assert_eq!(recover_control(&q, 4.0).unwrap().re, vec![1.0]);
        assert_eq!(recover_control(&q, 1.0).unwrap(), q);
        assert!(recover_control(&q, 0.0).is_err());
        let z = ComplexVec::zeros(3);
        assert_eq!(recover_control(&z, 2.0).unwrap(), z);
    }

    #[test]
    fn flat_layouts_round_trip() {
        let x = BlockVecC::new(
            ComplexVec::new(vec![1.0, 2.0], vec![3.0, 4.0]),
            ComplexVec::new(vec![5.0, 6.0], vec![7.0, 8.0]),
        );
        assert_eq!(BlockVecC::from_flat(&x.to_flat()), x);
        assert_eq!(from_real(&to_real(&x)), x);
        let r = to_real(&x);
        assert_eq!(BlockVecR::from_flat(&r.to_flat()), r);
    }
}
