//! Sparse Cholesky for tree-structured Gram matrices.
//!
//! Reversing the natural order of a Schauder system eliminates the finest hats
//! first. The neighbours of a hat that come later in this order are its ancestors,
//! which are pairwise connected, so the ordering is a perfect elimination ordering:
//! the factor has exactly the sparsity pattern of the matrix.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::suffstats::StatsView;

/// Upper factor `R` with `P W P = RᵀR`, `P` the order reversal.
#[derive(Clone, Debug)]
pub(crate) struct ReversedFactor {
    /// Row `r` (reversed index): columns ascending, starting with `r`.
    cols: Vec<Vec<usize>>,
    vals: Vec<Vec<f64>>,
}

/// Result of a sparse factorization attempt.
pub(crate) enum Sparse {
    Factor(ReversedFactor),
    /// An update hit `(row, col)` outside the stored pattern.
    Fill(usize, usize),
}

impl ReversedFactor {
    /// Factors `Σ + diag(prior_precision)` restricted to the leading `view.dim()`
    /// block, in reversed order.
    pub(crate) fn factor(view: &StatsView<'_>, prior_precision: &[f64]) -> Result<Sparse> {
        let n = view.dim();
        let mut cols: Vec<Vec<usize>> = Vec::with_capacity(n);
        let mut vals: Vec<Vec<f64>> = Vec::with_capacity(n);
        for r in 0..n {
            let i = n - 1 - r;
            let mut row: Vec<(usize, f64)> = view.lower_row(i).map(|(c, v)| (n - 1 - c, v)).collect();
            row.reverse();
            debug_assert_eq!(row[0].0, r);
            row[0].1 += prior_precision[i];
            cols.push(row.iter().map(|e| e.0).collect());
            vals.push(row.iter().map(|e| e.1).collect());
        }

        let mut scratch: Vec<f64> = Vec::new();
        for r in 0..n {
            let d = vals[r][0];
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: n - 1 - r });
            }
            let d = libm::sqrt(d);
            vals[r][0] = d;
            for v in vals[r][1..].iter_mut() {
                *v /= d;
            }
            scratch.clear();
            scratch.extend_from_slice(&vals[r]);
            let row_cols = &cols[r];
            for p1 in 1..row_cols.len() {
                let c1 = row_cols[p1];
                let v1 = scratch[p1];
                for p2 in p1..row_cols.len() {
                    let c2 = row_cols[p2];
                    match cols[c1].binary_search(&c2) {
                        Ok(pos) => vals[c1][pos] -= v1 * scratch[p2],
                        Err(_) => return Ok(Sparse::Fill(c1, c2)),
                    }
                }
            }
        }
        Ok(Sparse::Factor(ReversedFactor { cols, vals }))
    }

    pub(crate) fn dim(&self) -> usize {
        self.cols.len()
    }

    pub(crate) fn diag(&self, r: usize) -> f64 {
        self.vals[r][0]
    }

    pub(crate) fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// Solves `Rᵀ z = b` in place.
    pub(crate) fn solve_transposed(&self, b: &mut [f64]) {
        for r in 0..self.dim() {
            b[r] /= self.vals[r][0];
            let br = b[r];
            for (c, v) in self.cols[r][1..].iter().zip(&self.vals[r][1..]) {
                b[*c] -= v * br;
            }
        }
    }

    /// Solves `R u = b` in place.
    pub(crate) fn solve(&self, b: &mut [f64]) {
        for r in (0..self.dim()).rev() {
            let mut s = b[r];
            for (c, v) in self.cols[r][1..].iter().zip(&self.vals[r][1..]) {
                s -= v * b[*c];
            }
            b[r] = s / self.vals[r][0];
        }
    }

    /// Dense row-major copy of `R` (reversed order).
    pub(crate) fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = alloc::vec![0.0; n * n];
        for r in 0..n {
            for (c, v) in self.cols[r].iter().zip(&self.vals[r]) {
                out[r * n + c] = *v;
            }
        }
        out
    }
}
