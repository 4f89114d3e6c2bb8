use crate::error::{check_len, Error, Result};
use crate::sparse::{axpy, dot, norm2, CsrMatrix};

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True relative residual `||b - A x|| / ||b||` of the returned iterate.
    pub relative_residual: f64,
}

/// Unpreconditioned conjugate gradients for an SPD matrix from a zero start.
///
/// Convergence is declared on the recomputed residual, so the returned iterate
/// always satisfies `||b - A x|| <= tol ||b||`.
pub fn cg_solve(a: &CsrMatrix, b: &[f64], tol: f64, maxit: usize) -> Result<CgOutcome> {
    check_len(a.nrows(), b.len())?;
    check_len(a.nrows(), a.ncols())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("CG tolerance must be positive, got {tol}")));
    }
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(CgOutcome { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }

    let target = tol * bnorm;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);

    for it in 1..=maxit {
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { column: it, pivot: pap });
        }
        let step = rr / pap;
        axpy(step, &p, &mut x);
        axpy(-step, &ap, &mut r);
        let mut rr_new = dot(&r, &r);

        if rr_new.sqrt() <= target {
            // confirm against the true residual before stopping
            a.spmv_into(&x, &mut ap)?;
            for ((ri, bi), axi) in r.iter_mut().zip(b).zip(&ap) {
                *ri = bi - axi;
            }
            rr_new = dot(&r, &r);
            if rr_new.sqrt() <= target {
                return Ok(CgOutcome { x, iterations: it, relative_residual: rr_new.sqrt() / bnorm });
            }
            p.copy_from_slice(&r);
            rr = rr_new;
            continue;
        }

        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    Err(Error::NoConvergence { iterations: maxit, residual: rr.sqrt() / bnorm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_matches_elimination() {
        // [[4,1],[1,3]] x = (1,2): x = (1/11, 7/11)
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let out = cg_solve(&a, &[1.0, 2.0], 1e-14, 10).unwrap();
        assert!((out.x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((out.x[1] - 7.0 / 11.0).abs() < 1e-14);
        assert!(out.iterations <= 2);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let out = cg_solve(&CsrMatrix::identity(4), &[0.0; 4], 1e-10, 5).unwrap();
        assert_eq!(out.x, vec![0.0; 4]);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn non_convergence_reports_last_residual() {
        let diag: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let a = CsrMatrix::from_diagonal(&diag);
        let err = cg_solve(&a, &vec![1.0; 50], 1e-14, 3).unwrap_err();
        match err {
            Error::NoConvergence { iterations, residual } => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0 && residual < 1.0);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(cg_solve(&a, &[0.0, 1.0], 1e-10, 10), Err(Error::NotPositiveDefinite { .. })));
    }
}
