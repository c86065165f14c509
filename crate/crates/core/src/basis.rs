//! Periodic basis families and the level structure of the prior.
//!
//! Basis functions are indexed from `l = 1` in the public API. Level `j` of the
//! prior (the "model") keeps the first `m_j` functions:
//!
//! | family   | `ψ_1` | higher functions                                   | `m_j`     |
//! |----------|-------|----------------------------------------------------|-----------|
//! | Fourier  | `1`   | `ψ_2k = √2 sin(2kπx)`, `ψ_2k+1 = √2 cos(2kπx)`      | `2j − 1`  |
//! | Schauder | `1`   | `ψ_{2^{i−1}+k}(x) = Λ(2^{i−1}x − k + 1)`            | `2^{j−1}` |
//!
//! `Λ` is the continuous hat supported on `[0, 1]` with apex `Λ(½) = 1`.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisFamily {
    Fourier,
    Schauder,
}

impl BasisFamily {
    pub fn name(self) -> &'static str {
        match self {
            BasisFamily::Fourier => "fourier",
            BasisFamily::Schauder => "schauder",
        }
    }

    pub fn default_j_max(self) -> usize {
        match self {
            BasisFamily::Fourier => 25,
            BasisFamily::Schauder => 12,
        }
    }

    /// Largest model index whose dimension still fits in memory comfortably.
    fn hard_j_max(self) -> usize {
        match self {
            BasisFamily::Fourier => 2000,
            BasisFamily::Schauder => 20,
        }
    }
}

/// Basis family, prior regularity `β` and the cap on the model index.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSpec {
    family: BasisFamily,
    beta: f64,
    j_max: usize,
}

impl BasisSpec {
    pub fn new(family: BasisFamily, beta: f64, j_max: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid(alloc::format!("beta must be positive, got {beta}")));
        }
        if j_max == 0 || j_max > family.hard_j_max() {
            return Err(invalid(alloc::format!(
                "j_max must lie in [1, {}] for the {} basis, got {j_max}",
                family.hard_j_max(),
                family.name()
            )));
        }
        Ok(Self { family, beta, j_max })
    }

    pub fn with_default_j_max(family: BasisFamily, beta: f64) -> Result<Self> {
        Self::new(family, beta, family.default_j_max())
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// Number of basis functions `m_j` in model `j`.
    pub fn model_dim(&self, j: usize) -> Result<usize> {
        self.check_level(j)?;
        Ok(self.dim(j))
    }

    /// Dimension of the largest model.
    pub fn max_dim(&self) -> usize {
        self.dim(self.j_max)
    }

    pub(crate) fn check_level(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.j_max {
            return Err(Error::OutOfRange { index: j, min: 1, max: self.j_max });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn dim(&self, j: usize) -> usize {
        match self.family {
            BasisFamily::Fourier => 2 * j - 1,
            BasisFamily::Schauder => 1 << (j - 1),
        }
    }

    /// Model index whose dimension is exactly `m`, if any.
    pub fn level_of_dim(&self, m: usize) -> Option<usize> {
        (1..=self.j_max).find(|&j| self.dim(j) == m)
    }

    fn check_index(&self, l: usize) -> Result<()> {
        if l == 0 {
            return Err(invalid("basis index must be at least 1"));
        }
        Ok(())
    }

    /// `ψ_l(x)`, evaluated at `x mod 1`.
    pub fn eval_basis(&self, l: usize, x: f64) -> Result<f64> {
        self.check_index(l)?;
        let x = wrap_unit(x);
        Ok(match self.family {
            BasisFamily::Fourier => {
                if l == 1 {
                    1.0
                } else {
                    let k = (l / 2) as f64;
                    let arg = 2.0 * PI * k * x;
                    if l.is_multiple_of(2) {
                        SQRT_2 * libm::sin(arg)
                    } else {
                        SQRT_2 * libm::cos(arg)
                    }
                }
            }
            BasisFamily::Schauder => {
                if l == 1 {
                    1.0
                } else {
                    let (level, k) = schauder_level(l);
                    let scale = (1u64 << (level - 1)) as f64;
                    hat(scale * x - (k as f64 - 1.0))
                }
            }
        })
    }

    /// Prior variance `ξ_l²` of coefficient `l`.
    pub fn xi_sq(&self, l: usize) -> Result<f64> {
        self.check_index(l)?;
        Ok(self.xi_sq_unchecked(l))
    }

    #[inline]
    pub(crate) fn xi_sq_unchecked(&self, l: usize) -> f64 {
        match self.family {
            BasisFamily::Fourier => libm::pow(l as f64, -1.0 - 2.0 * self.beta),
            BasisFamily::Schauder => {
                if l == 1 {
                    1.0
                } else {
                    let (level, _) = schauder_level(l);
                    libm::exp2(-2.0 * self.beta * level as f64)
                }
            }
        }
    }

    /// `ξ_1², …, ξ_m²`.
    pub fn xi_sq_vec(&self, m: usize) -> Vec<f64> {
        (1..=m).map(|l| self.xi_sq_unchecked(l)).collect()
    }

    /// Support of `ψ_l` as an interval of `[0, 1]`.
    pub fn support(&self, l: usize) -> Result<(f64, f64)> {
        self.check_index(l)?;
        Ok(match self.family {
            BasisFamily::Fourier => (0.0, 1.0),
            BasisFamily::Schauder if l == 1 => (0.0, 1.0),
            BasisFamily::Schauder => {
                let (level, k) = schauder_level(l);
                let width = libm::exp2(-((level - 1) as f64));
                ((k - 1) as f64 * width, k as f64 * width)
            }
        })
    }

    /// `Σ_l θ_l ψ_l(x)` for `l = 1..=θ.len()`.
    pub fn eval_drift(&self, theta: &[f64], x: f64) -> Result<f64> {
        if theta.is_empty() {
            return Err(invalid("coefficient vector is empty"));
        }
        if theta.len() > self.max_dim() {
            return Err(invalid(alloc::format!(
                "coefficient vector has {} entries, the largest model has {}",
                theta.len(),
                self.max_dim()
            )));
        }
        Ok(self.drift_at(theta, x))
    }

    /// Unchecked drift evaluation used on hot paths.
    #[inline]
    pub(crate) fn drift_at(&self, theta: &[f64], x: f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_nonzero(x, theta.len(), |i, v| acc += theta[i] * v);
        acc
    }

    /// Calls `f(i, ψ_{i+1}(x))` for every basis function among the first `m` that
    /// can be nonzero at `x`, in increasing `i` (0-based).
    ///
    /// Fourier visits all `m` functions. Schauder visits the constant plus the one
    /// hat per level whose support contains `x mod 1`; these indices form a chain in
    /// the dyadic tree, so each visited index is an ancestor of the next one.
    #[inline]
    pub(crate) fn for_each_nonzero(&self, x: f64, m: usize, mut f: impl FnMut(usize, f64)) {
        let x = wrap_unit(x);
        if m == 0 {
            return;
        }
        f(0, 1.0);
        match self.family {
            BasisFamily::Fourier => {
                if m == 1 {
                    return;
                }
                let arg = 2.0 * PI * x;
                let (s1, c1) = (libm::sin(arg), libm::cos(arg));
                let (mut s, mut c) = (s1, c1);
                let mut i = 1;
                while i < m {
                    f(i, SQRT_2 * s);
                    if i + 1 < m {
                        f(i + 1, SQRT_2 * c);
                    }
                    let next_s = s * c1 + c * s1;
                    c = c * c1 - s * s1;
                    s = next_s;
                    i += 2;
                }
            }
            BasisFamily::Schauder => {
                let mut width = 1usize;
                loop {
                    // level with `width` hats occupies 0-based indices width..2*width
                    if width >= m {
                        break;
                    }
                    let scaled = width as f64 * x;
                    let k0 = (libm::floor(scaled) as usize).min(width - 1);
                    if width + k0 < m {
                        f(width + k0, hat(scaled - k0 as f64));
                    }
                    width *= 2;
                }
            }
        }
    }
}

/// Level `i ≥ 1` and position `k ∈ 1..=2^{i−1}` of Schauder index `l ≥ 2`.
#[inline]
pub(crate) fn schauder_level(l: usize) -> (usize, usize) {
    debug_assert!(l >= 2);
    let level = (usize::BITS - (l - 1).leading_zeros()) as usize;
    let k = l - (1 << (level - 1));
    (level, k)
}

/// 1-based index of the Schauder function one level above `l` whose support
/// contains that of `l`; the constant `ψ_1` is the parent of `ψ_2`.
pub(crate) fn schauder_parent(l: usize) -> Option<usize> {
    match l {
        0 | 1 => None,
        2 => Some(1),
        _ => {
            let (level, k) = schauder_level(l);
            Some((1 << (level - 2)) + k.div_ceil(2))
        }
    }
}

/// Continuous hat: `2y` on `[0, ½)`, `2(1 − y)` on `[½, 1]`, zero elsewhere.
#[inline]
fn hat(y: f64) -> f64 {
    if !(0.0..=1.0).contains(&y) {
        0.0
    } else if y < 0.5 {
        2.0 * y
    } else {
        2.0 * (1.0 - y)
    }
}

/// `x mod 1` in `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - libm::floor(x);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec;

    fn fourier(beta: f64) -> BasisSpec {
        BasisSpec::new(BasisFamily::Fourier, beta, 25).unwrap()
    }

    fn schauder(beta: f64) -> BasisSpec {
        BasisSpec::new(BasisFamily::Schauder, beta, 12).unwrap()
    }

    #[test]
    fn fourier_values_at_symmetry_points() {
        let f = fourier(1.5);
        assert_eq!(f.eval_basis(1, 0.37).unwrap(), 1.0);
        assert!((f.eval_basis(2, 0.25).unwrap() - SQRT_2).abs() < 1e-15);
        assert!((f.eval_basis(3, 0.5).unwrap() + SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn schauder_values() {
        let s = schauder(1.5);
        assert_eq!(s.eval_basis(2, 0.25).unwrap(), 0.5);
        assert_eq!(s.eval_basis(2, 0.5).unwrap(), 1.0);
        // ψ_3 = Λ(2x) lives on [0, ½], ψ_4 = Λ(2x − 1) on [½, 1]
        assert_eq!(s.eval_basis(3, 0.25).unwrap(), 1.0);
        assert_eq!(s.eval_basis(4, 0.75).unwrap(), 1.0);
        assert_eq!(s.eval_basis(4, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn index_zero_is_rejected() {
        let f = fourier(1.0);
        assert!(matches!(f.eval_basis(0, 0.1), Err(Error::InvalidArgument(_))));
        assert!(f.xi_sq(0).is_err());
        assert!(f.support(0).is_err());
    }

    #[test]
    fn prior_variances() {
        assert_eq!(fourier(1.5).xi_sq(2).unwrap(), 0.0625);
        assert_eq!(fourier(0.3).xi_sq(1).unwrap(), 1.0);
        assert_eq!(schauder(1.5).xi_sq(5).unwrap(), libm::exp2(-9.0));
        assert_eq!(schauder(1.5).xi_sq(1).unwrap(), 1.0);
        // level 1 is the single full-width hat
        assert_eq!(schauder(1.5).xi_sq(2).unwrap(), libm::exp2(-3.0));
    }

    #[test]
    fn model_dimensions() {
        assert_eq!(fourier(1.0).model_dim(3).unwrap(), 5);
        assert_eq!(fourier(1.0).model_dim(1).unwrap(), 1);
        assert_eq!(schauder(1.0).model_dim(4).unwrap(), 8);
        assert!(matches!(fourier(1.0).model_dim(0), Err(Error::OutOfRange { .. })));
        assert!(schauder(1.0).model_dim(13).is_err());
    }

    #[test]
    fn model_dims_strictly_increase() {
        for spec in [fourier(1.0), schauder(1.0)] {
            for j in 1..spec.j_max() {
                assert!(spec.dim(j + 1) > spec.dim(j));
            }
        }
    }

    #[test]
    fn drift_expansion() {
        let f = fourier(1.5);
        assert_eq!(f.eval_drift(&[2.5], 0.9).unwrap(), 2.5);
        let theta = [0.0, 0.0, 0.0, 8.0 / SQRT_2, 0.0];
        let v = f.eval_drift(&theta, 1.0 / 16.0).unwrap();
        assert!((v - 4.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(schauder(1.5).eval_drift(&[0.0, 1.0], 0.5).unwrap(), 1.0);
        assert!(f.eval_drift(&[], 0.1).is_err());
    }

    #[test]
    fn supports() {
        let s = schauder(1.0);
        assert_eq!(s.support(1).unwrap(), (0.0, 1.0));
        assert_eq!(s.support(2).unwrap(), (0.0, 1.0));
        assert_eq!(s.support(3).unwrap(), (0.0, 0.5));
        assert_eq!(s.support(4).unwrap(), (0.5, 1.0));
        assert_eq!(s.support(7).unwrap(), (0.5, 0.75));
        assert_eq!(fourier(1.0).support(7).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn schauder_tree_helpers() {
        assert_eq!(schauder_level(2), (1, 1));
        assert_eq!(schauder_level(3), (2, 1));
        assert_eq!(schauder_level(4), (2, 2));
        assert_eq!(schauder_level(5), (3, 1));
        assert_eq!(schauder_level(8), (3, 4));
        assert_eq!(schauder_parent(2), Some(1));
        assert_eq!(schauder_parent(3), Some(2));
        assert_eq!(schauder_parent(4), Some(2));
        assert_eq!(schauder_parent(7), Some(4));
        assert_eq!(schauder_parent(8), Some(4));
        let s = schauder(1.0);
        for l in 3..200 {
            let (a, b) = s.support(l).unwrap();
            let (pa, pb) = s.support(schauder_parent(l).unwrap()).unwrap();
            assert!(pa <= a && b <= pb);
        }
    }

    #[test]
    fn fourier_orthonormality_by_quadrature() {
        let f = fourier(1.0);
        let n = 10_000;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        for l in 1..=31 {
            for lp in l..=31 {
                let s: f64 = grid
                    .iter()
                    .map(|&x| f.eval_basis(l, x).unwrap() * f.eval_basis(lp, x).unwrap())
                    .sum::<f64>()
                    / n as f64;
                let expected = if l == lp { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-6, "l={l} l'={lp}: {s}");
            }
        }
    }

    #[test]
    fn schauder_locality_is_exact() {
        let s = schauder(1.0);
        for l in 2..64 {
            let (a, b) = s.support(l).unwrap();
            for i in 0..=1000 {
                let x = i as f64 / 1000.0;
                if x < a || x > b {
                    assert_eq!(s.eval_basis(l, x).unwrap(), 0.0, "l={l} x={x}");
                }
            }
        }
    }

    #[test]
    fn xi_sq_non_increasing_across_levels() {
        for spec in [fourier(0.25), fourier(3.0), schauder(0.5), schauder(1.5)] {
            let xs = spec.xi_sq_vec(spec.max_dim().min(512));
            assert!(xs.iter().all(|&v| v > 0.0));
            assert!(xs.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn bulk_evaluation_matches_pointwise() {
        for spec in [fourier(1.0), schauder(1.0)] {
            let m = spec.max_dim().min(256);
            for i in 0..97 {
                let x = -1.3 + 0.0371 * i as f64;
                let mut dense = vec![0.0; m];
                spec.for_each_nonzero(x, m, |k, v| dense[k] = v);
                for (k, &v) in dense.iter().enumerate() {
                    let direct = spec.eval_basis(k + 1, x).unwrap();
                    assert!((v - direct).abs() < 1e-12, "{:?} l={} x={x}", spec.family(), k + 1);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn basis_is_one_periodic(l in 1usize..200, x in -5.0f64..5.0, fam in 0u8..2) {
            let spec = if fam == 0 { fourier(1.0) } else { schauder(1.0) };
            let a = spec.eval_basis(l, x).unwrap();
            let b = spec.eval_basis(l, x + 1.0).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn basis_values_are_bounded(l in 1usize..200, x in -5.0f64..5.0) {
            let f = fourier(1.0).eval_basis(l, x).unwrap();
            prop_assert!(f.abs() <= SQRT_2 + 1e-15);
            let s = schauder(1.0).eval_basis(l, x).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }

        #[test]
        fn drift_is_linear_in_coefficients(
            t1 in proptest::collection::vec(-3.0f64..3.0, 9),
            t2 in proptest::collection::vec(-3.0f64..3.0, 9),
            a in -2.0f64..2.0, b in -2.0f64..2.0, x in 0.0f64..1.0,
        ) {
            for spec in [fourier(1.0), schauder(1.0)] {
                let m = if spec.family() == BasisFamily::Fourier { 9 } else { 8 };
                let comb: Vec<f64> = (0..m).map(|i| a * t1[i] + b * t2[i]).collect();
                let lhs = spec.eval_drift(&comb, x).unwrap();
                let rhs = a * spec.eval_drift(&t1[..m], x).unwrap() + b * spec.eval_drift(&t2[..m], x).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            }
        }

        #[test]
        fn zero_padding_leaves_drift_unchanged(
            theta in proptest::collection::vec(-3.0f64..3.0, 5), x in 0.0f64..1.0,
        ) {
            let f = fourier(1.0);
            let mut padded = theta.clone();
            padded.extend([0.0; 4]);
            prop_assert_eq!(f.eval_drift(&theta, x).unwrap(), f.eval_drift(&padded, x).unwrap());
        }
    }
}
