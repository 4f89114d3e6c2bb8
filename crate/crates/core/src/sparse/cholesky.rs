use crate::error::{check_len, Error, Result};
use crate::sparse::ordering::eliminate;
use crate::sparse::CsrMatrix;

/// Sparse Cholesky factor `P A P^T = L L^T` with a minimum-degree permutation.
///
/// `L` is stored column-wise with the diagonal first in every column. The
/// factor is immutable after construction, so concurrent solves are safe.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SpdFactor {
    /// Factors a symmetric positive definite matrix after a minimum-degree reordering.
    ///
    /// Only the symmetric part of the pattern is used; values are read from the
    /// lower triangle of the permuted matrix.
    pub fn factorize(a: &CsrMatrix) -> Result<Self> {
        check_len(a.nrows(), a.ncols())?;
        let n = a.nrows();
        let elim = eliminate(a);
        let perm = elim.order;
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        // symbolic structure straight from the elimination graph
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        for &old in &perm {
            let j = iperm[old];
            let mut rows: Vec<usize> = elim.reach[old].iter().map(|&o| iperm[o]).collect();
            rows.sort_unstable();
            row_idx.push(j);
            row_idx.extend(rows);
            col_ptr.push(row_idx.len());
        }
        let mut values = vec![0.0; row_idx.len()];

        // left-looking numeric factorization; `pending[j]` lists the columns k < j
        // with L[j,k] != 0 that have not yet been applied to column j
        const NONE: usize = usize::MAX;
        let mut head = vec![NONE; n];
        let mut next = vec![NONE; n];
        let mut cursor = vec![0usize; n];
        let mut work = vec![0.0; n];

        for j in 0..n {
            let old = perm[j];
            for (c, v) in a.row(old) {
                let i = iperm[c];
                if i >= j {
                    work[i] += v;
                }
            }

            let mut k = head[j];
            while k != NONE {
                let following = next[k];
                let p = cursor[k];
                let ljk = values[p];
                for q in p..col_ptr[k + 1] {
                    work[row_idx[q]] -= values[q] * ljk;
                }
                cursor[k] = p + 1;
                if p + 1 < col_ptr[k + 1] {
                    let r = row_idx[p + 1];
                    next[k] = head[r];
                    head[r] = k;
                }
                k = following;
            }

            let d = work[j];
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { column: old, pivot: d });
            }
            let ljj = d.sqrt();
            work[j] = 0.0;
            values[col_ptr[j]] = ljj;
            for p in col_ptr[j] + 1..col_ptr[j + 1] {
                let i = row_idx[p];
                values[p] = work[i] / ljj;
                work[i] = 0.0;
            }
            cursor[j] = col_ptr[j] + 1;
            if cursor[j] < col_ptr[j + 1] {
                let r = row_idx[cursor[j]];
                next[j] = head[r];
                head[r] = j;
            }
        }

        Ok(Self { n, perm, col_ptr, row_idx, values })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Number of stored entries of `L`, diagonal included.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        check_len(self.n, b.len())?;
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        // L z = P b
        for j in 0..self.n {
            let s = self.col_ptr[j];
            z[j] /= self.values[s];
            let zj = z[j];
            for p in s + 1..self.col_ptr[j + 1] {
                z[self.row_idx[p]] -= self.values[p] * zj;
            }
        }
        // L^T w = z
        for j in (0..self.n).rev() {
            let s = self.col_ptr[j];
            let mut acc = z[j];
            for p in s + 1..self.col_ptr[j + 1] {
                acc -= self.values[p] * z[self.row_idx[p]];
            }
            z[j] = acc / self.values[s];
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = z[new];
        }
        Ok(())
    }
}
