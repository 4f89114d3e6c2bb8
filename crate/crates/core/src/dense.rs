//! Dense assemblies of the block operators for small meshes.
//!
//! These are test and verification oracles: every builder refuses problems
//! with more than [`DENSE_M_LIMIT`] unknowns per block.

use nalgebra::{linalg::Schur, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::systems::{
    g_coefficients, r1_coefficients, r_coefficients, rhs_asss, rhs_b, rhs_btilde, rhs_c, t1_coefficients,
    t2_coefficients, BlockVecC, BlockVecR, ProblemParams, SystemBundle,
};

/// Largest block order accepted (k = 4).
pub const DENSE_M_LIMIT: usize = 225;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn guard(m: usize) -> Result<()> {
    if m > DENSE_M_LIMIT {
        return Err(Error::TooLarge { order: m, limit: DENSE_M_LIMIT });
    }
    Ok(())
}

pub fn to_dense_real(a: &CsrMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        for (j, v) in a.row(i) {
            d[(i, j)] += v;
        }
    }
    d
}

pub fn to_dense_complex(a: &CsrMatrix) -> CMat {
    to_dense_real(a).map(re)
}

/// `[[c00 X, c01 X], [c10 X, c11 X]]`.
pub fn kron2(coef: [[Complex64; 2]; 2], x: &CMat) -> CMat {
    let (r, c) = x.shape();
    let mut out = CMat::zeros(2 * r, 2 * c);
    for (bi, row) in coef.iter().enumerate() {
        for (bj, &z) in row.iter().enumerate() {
            if z != re(0.0) {
                out.view_mut((bi * r, bj * c), (r, c)).copy_from(&(x * z));
            }
        }
    }
    out
}

/// `[c_ij X]` for a 4x4 real pattern.
pub fn kron4(coef: &[[f64; 4]; 4], x: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = x.shape();
    let mut out = DMatrix::zeros(4 * r, 4 * c);
    for (bi, row) in coef.iter().enumerate() {
        for (bj, &z) in row.iter().enumerate() {
            if z != 0.0 {
                out.view_mut((bi * r, bj * c), (r, c)).copy_from(&(x * z));
            }
        }
    }
    out
}

fn eye2() -> [[Complex64; 2]; 2] {
    [[re(1.0), re(0.0)], [re(0.0), re(1.0)]]
}

fn eye4() -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
}

pub fn dense_h1(s: &SystemBundle) -> Result<CMat> {
    guard(s.m())?;
    Ok(kron2(eye2(), &to_dense_complex(s.mass())))
}

pub fn dense_h2(s: &SystemBundle) -> Result<CMat> {
    guard(s.m())?;
    Ok(kron2(eye2(), &to_dense_complex(s.stiffness())))
}

/// `R` as a `2m x 2m` matrix.
pub fn dense_r(p: &ProblemParams, m: usize) -> Result<CMat> {
    guard(m)?;
    Ok(kron2(r_coefficients(p), &CMat::identity(m, m)))
}

pub fn dense_r1(p: &ProblemParams, m: usize) -> Result<CMat> {
    guard(m)?;
    Ok(kron2(r1_coefficients(p), &CMat::identity(m, m)))
}

pub fn dense_a(s: &SystemBundle) -> Result<CMat> {
    let p = s.params();
    let sn = re(p.nu().sqrt());
    let z = re(0.0);
    let r2h2 = kron2([[z, sn], [sn, z]], &to_dense_complex(s.stiffness()));
    Ok(dense_r1(&p, s.m())? * dense_h1(s)? + r2h2)
}

pub fn dense_atilde(s: &SystemBundle) -> Result<CMat> {
    let p = s.params();
    let h1 = dense_h1(s)?;
    let rh2 = dense_r(&p, s.m())? * dense_h2(s)?;
    Ok(h1 * re(p.theta()) + rh2 * re((p.nu() * p.theta()).sqrt()))
}

pub fn block_to_dvec(v: &BlockVecC) -> CVec {
    CVec::from_vec(v.to_flat())
}

pub fn dvec_to_block(v: &CVec) -> BlockVecC {
    BlockVecC::from_flat(v.as_slice())
}

pub fn blockr_to_dvec(v: &BlockVecR) -> DVector<f64> {
    DVector::from_vec(v.to_flat())
}

pub fn dvec_to_blockr(v: &DVector<f64>) -> BlockVecR {
    BlockVecR::from_flat(v.as_slice())
}

pub fn dense_b(s: &SystemBundle) -> CVec {
    block_to_dvec(&rhs_b(s))
}

pub fn dense_btilde(s: &SystemBundle) -> CVec {
    block_to_dvec(&rhs_btilde(s))
}

/// `𝒜 = T1 ℳ + T2 𝒦̂` on `(Re y, Im y, Re q, Im q)`.
pub fn dense_areal(s: &SystemBundle) -> Result<DMatrix<f64>> {
    guard(s.m())?;
    let p = s.params();
    let m = to_dense_real(s.mass());
    let k = to_dense_real(s.stiffness());
    Ok(kron4(&t1_coefficients(&p), &m) + kron4(&t2_coefficients(&p), &k))
}

pub fn dense_g(p: &ProblemParams, m: usize) -> Result<DMatrix<f64>> {
    guard(m)?;
    Ok(kron4(&g_coefficients(p), &DMatrix::identity(m, m)))
}

pub fn dense_c(s: &SystemBundle) -> DVector<f64> {
    blockr_to_dvec(&rhs_c(s))
}

/// `c̃`, the right-hand side paired with the normalised real form.
pub fn dense_ctilde(s: &SystemBundle) -> DVector<f64> {
    blockr_to_dvec(&rhs_asss(s))
}

/// `(ℳ + 𝒢𝒦)` with `𝒦 = sqrt(nu/theta) bldiag(K, K, K, K)`.
pub fn dense_asss_form(s: &SystemBundle) -> Result<DMatrix<f64>> {
    let p = s.params();
    let m4 = kron4(&eye4(), &to_dense_real(s.mass()));
    let k4 = kron4(&eye4(), &to_dense_real(s.stiffness())) * (p.nu() / p.theta()).sqrt();
    Ok(m4 + dense_g(&p, s.m())? * k4)
}

/// The MBAS splitting `Ã = B - C`.
#[derive(Debug, Clone)]
pub struct DenseSplitting {
    pub b: CMat,
    pub c: CMat,
    pub atilde: CMat,
}

impl DenseSplitting {
    /// `B^{-1} C`.
    pub fn iteration_matrix(&self) -> Result<CMat> {
        solve_mat(&self.b, &self.c)
    }
}

/// Dense `B_a = (1/a)(I+R)^{-1}(aI + theta H1) R (aI + sqrt(nu theta) H2)` and
/// `C_a = (1/a)(I+R)^{-1}(aR - theta H1)(aI - sqrt(nu theta) R H2)`.
pub fn build_splitting_dense(s: &SystemBundle, alpha: f64) -> Result<DenseSplitting> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    guard(s.m())?;
    let p = s.params();
    let n = 2 * s.m();
    let id = CMat::identity(n, n);
    let r = dense_r(&p, s.m())?;
    let h1 = dense_h1(s)?;
    let h2 = dense_h2(s)?;
    let sq = re((p.nu() * p.theta()).sqrt());
    let th = re(p.theta());
    let a = re(alpha);
    let ipr_inv = (&id - &r) * re(0.5);
    let b = &ipr_inv * (&id * a + &h1 * th) * &r * (&id * a + &h2 * sq) * re(1.0 / alpha);
    let c = &ipr_inv * (&r * a - &h1 * th) * (&id * a - &r * &h2 * sq) * re(1.0 / alpha);
    Ok(DenseSplitting { b, c, atilde: dense_atilde(s)? })
}

/// `P_BAS = c0 W D`.
pub fn dense_pbas(s: &SystemBundle, alpha: f64) -> Result<CMat> {
    guard(s.m())?;
    let p = s.params();
    let c0 = (1.0 + alpha) / (alpha * (1.0 + p.theta()));
    let a = Complex64::new(p.theta(), -p.omega() * p.nu().sqrt());
    let w = kron2([[re(1.0), a], [a.conj(), re(-1.0)]], &CMat::identity(s.m(), s.m()));
    let g = to_dense_complex(s.mass()) * re(alpha) + to_dense_complex(s.stiffness()) * re(p.nu().sqrt());
    Ok(w * kron2(eye2(), &g) * re(c0))
}

/// `𝒫_a = (1/a)(ℐ+𝒢)^{-1}(aℐ+ℳ)𝒢(aℐ+𝒦)`.
pub fn dense_passs(s: &SystemBundle, alpha: f64) -> Result<DMatrix<f64>> {
    guard(s.m())?;
    let p = s.params();
    let n = 4 * s.m();
    let id = DMatrix::<f64>::identity(n, n);
    let g = dense_g(&p, s.m())?;
    let m4 = kron4(&eye4(), &to_dense_real(s.mass()));
    let k4 = kron4(&eye4(), &to_dense_real(s.stiffness())) * (p.nu() / p.theta()).sqrt();
    let ipg_inv = (&id - &g) * 0.5;
    Ok(ipg_inv * (&id * alpha + m4) * g * (&id * alpha + k4) / alpha)
}

pub fn solve_mat(a: &CMat, b: &CMat) -> Result<CMat> {
    a.clone().lu().solve(b).ok_or_else(|| Error::InvalidParameter("singular dense matrix".into()))
}

pub fn solve_c(a: &CMat, b: &CVec) -> Result<CVec> {
    a.clone().lu().solve(b).ok_or_else(|| Error::InvalidParameter("singular dense matrix".into()))
}

pub fn solve_r(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.clone().lu().solve(b).ok_or_else(|| Error::InvalidParameter("singular dense matrix".into()))
}

/// Largest eigenvalue modulus, from the diagonal of a complex Schur form.
pub fn spectral_radius(a: &CMat) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), actual: a.ncols() });
    }
    if a.nrows() > 2 * DENSE_M_LIMIT {
        return Err(Error::TooLarge { order: a.nrows(), limit: 2 * DENSE_M_LIMIT });
    }
    let schur = Schur::try_new(a.clone(), 1e-14, 10_000)
        .ok_or_else(|| Error::Eigen("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_of_simple_matrices() {
        assert!((spectral_radius(&CMat::identity(4, 4)).unwrap() - 1.0).abs() < 1e-12);
        let d = CMat::from_diagonal(&CVec::from_vec(vec![re(0.5), Complex64::new(0.0, -0.25)]));
        assert!((spectral_radius(&d).unwrap() - 0.5).abs() < 1e-12);
        // rotation: eigenvalues +-i
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]).map(re);
        assert!((spectral_radius(&r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_guard() {
        let s = SystemBundle::assemble(5, ProblemParams::new(1.0, 1.0).unwrap()).unwrap();
        assert!(matches!(build_splitting_dense(&s, 1.0), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn splitting_identity_small() {
        let s = SystemBundle::assemble(2, ProblemParams::new(1.0, 1.0).unwrap()).unwrap();
        let sp = build_splitting_dense(&s, 1.0).unwrap();
        let diff = (&sp.atilde - (&sp.b - &sp.c)).norm();
        assert!(diff <= 1e-10 * sp.atilde.norm(), "diff {diff}");
    }

    #[test]
    fn kron_layout() {
        let x = DMatrix::from_row_slice(1, 1, &[2.0]).map(re);
        let k = kron2([[re(1.0), re(2.0)], [re(3.0), re(4.0)]], &x);
        assert_eq!(k[(1, 0)], re(6.0));
        assert_eq!(k[(0, 1)], re(4.0));
    }
}
