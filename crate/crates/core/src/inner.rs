//! Inner SPD solves used by every splitting and preconditioner.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{cg_solve, ComplexVec, CsrMatrix, SpdFactor};
use crate::systems::{BlockVecC, BlockVecR};

/// CG tolerance used when CG stands in for an exact inner solve.
pub const DEFAULT_CG_TOL: f64 = 1e-12;
pub const DEFAULT_CG_MAXIT: usize = 20_000;

/// How inner SPD systems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum InnerSolver {
    /// Sparse Cholesky with a minimum-degree ordering, factored once.
    #[default]
    Direct,
    /// Conjugate gradients to a relative residual tolerance.
    Cg { tol: f64, maxit: usize },
}

impl InnerSolver {
    pub fn cg(tol: f64) -> Self {
        Self::Cg { tol, maxit: DEFAULT_CG_MAXIT }
    }
}

impl fmt::Display for InnerSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Direct => write!(f, "direct"),
            Self::Cg { tol, .. } => write!(f, "cg:{tol:e}"),
        }
    }
}

impl FromStr for InnerSolver {
    type Err = Error;

    /// `direct`, `cg` or `cg:<tol>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "direct" => Ok(Self::Direct),
            "cg" => Ok(Self::cg(DEFAULT_CG_TOL)),
            other => {
                let tol = other
                    .strip_prefix("cg:")
                    .and_then(|t| t.parse::<f64>().ok())
                    .filter(|t| *t > 0.0)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown inner solver '{other}'")))?;
                Ok(Self::cg(tol))
            }
        }
    }
}

#[derive(Debug)]
enum Backend {
    Factor(SpdFactor),
    Cg { tol: f64, maxit: usize },
}

/// A fixed SPD matrix together with its solver, reused across iterations.
#[derive(Debug)]
pub struct SpdSolver {
    matrix: CsrMatrix,
    backend: Backend,
}

impl SpdSolver {
    pub fn new(matrix: CsrMatrix, inner: InnerSolver) -> Result<Self> {
        let backend = match inner {
            InnerSolver::Direct => Backend::Factor(SpdFactor::factorize(&matrix)?),
            InnerSolver::Cg { tol, maxit } => {
                if !(tol > 0.0) || maxit == 0 {
                    return Err(Error::InvalidParameter(format!("bad CG settings {tol}/{maxit}")));
                }
                Backend::Cg { tol, maxit }
            }
        };
        Ok(Self { matrix, backend })
    }

    /// Solver for `shift I + scale A`.
    pub fn shifted(a: &CsrMatrix, scale: f64, shift: f64, inner: InnerSolver) -> Result<Self> {
        Self::new(a.scaled_shifted(scale, shift)?, inner)
    }

    /// Solver for `a A + b B` (same order).
    pub fn combination(a: f64, ma: &CsrMatrix, b: f64, mb: &CsrMatrix, inner: InnerSolver) -> Result<Self> {
        let mut trip = Vec::with_capacity(ma.nnz() + mb.nnz());
        for i in 0..ma.nrows() {
            trip.extend(ma.row(i).map(|(j, v)| (i, j, a * v)));
        }
        for i in 0..mb.nrows() {
            trip.extend(mb.row(i).map(|(j, v)| (i, j, b * v)));
        }
        Self::new(CsrMatrix::from_triplets(ma.nrows(), ma.ncols(), &trip)?, inner)
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match &self.backend {
            Backend::Factor(f) => f.solve(b),
            Backend::Cg { tol, maxit } => Ok(cg_solve(&self.matrix, b, *tol, *maxit)?.x),
        }
    }

    /// Real and imaginary parts solved separately.
    pub fn solve_complex(&self, b: &ComplexVec) -> Result<ComplexVec> {
        Ok(ComplexVec::new(self.solve(&b.re)?, self.solve(&b.im)?))
    }

    /// `bldiag(S, S)^{-1} b`: four real solves.
    pub fn solve_block(&self, b: &BlockVecC) -> Result<BlockVecC> {
        Ok(BlockVecC::new(self.solve_complex(&b.y)?, self.solve_complex(&b.q)?))
    }

    /// `bldiag(S, S, S, S)^{-1} b`: four real solves.
    pub fn solve_block_r(&self, b: &BlockVecR) -> Result<BlockVecR> {
        let [p0, p1, p2, p3] = &b.parts;
        Ok(BlockVecR::new([self.solve(p0)?, self.solve(p1)?, self.solve(p2)?, self.solve(p3)?]))
    }
}
