//! Dense upper-triangular Cholesky kernels on row-major storage.
//!
//! Every routine takes a `stride` and a leading size `n`, so it can act on the
//! leading `n × n` block of a larger matrix in place.

use crate::error::{Error, Result};

/// Overwrites the upper triangle of `a` (leading `n × n` block, row stride
/// `stride`) with `M` such that `A = MᵀM`. The strict lower triangle is zeroed.
///
/// Row `i` of `M` only depends on the leading `(i + 1) × (i + 1)` block of `A`, so
/// factoring a leading block gives bitwise the leading block of the full factor.
pub fn cholesky_upper_in_place(a: &mut [f64], stride: usize, n: usize) -> Result<()> {
    for i in 0..n {
        let mut d = a[i * stride + i];
        for k in 0..i {
            let v = a[k * stride + i];
            d -= v * v;
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: i });
        }
        let d = libm::sqrt(d);
        a[i * stride + i] = d;
        for j in (i + 1)..n {
            let mut s = a[i * stride + j];
            for k in 0..i {
                s -= a[k * stride + i] * a[k * stride + j];
            }
            a[i * stride + j] = s / d;
        }
        for j in 0..i {
            a[i * stride + j] = 0.0;
        }
    }
    Ok(())
}

/// Solves `Mᵀ z = b` in place (forward substitution).
pub fn solve_upper_transposed(m: &[f64], stride: usize, n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= m[k * stride + i] * b[k];
        }
        b[i] = s / m[i * stride + i];
    }
}

/// Solves `M u = b` in place (back substitution).
pub fn solve_upper(m: &[f64], stride: usize, n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= m[i * stride + k] * b[k];
        }
        b[i] = s / m[i * stride + i];
    }
}
