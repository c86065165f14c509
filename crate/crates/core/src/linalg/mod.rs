//! Gaussian computations for the coefficient posterior.
//!
//! Within model `j` and scale `s²` the coefficients have full conditional
//! `N(W⁻¹μ, W⁻¹)` with `W = Σ + (s²Ξ)⁻¹`, `Ξ = diag(ξ_1², …, ξ_m²)`. With the
//! Cholesky factor `W = MᵀM` and `Mᵀz = μ`:
//!
//! - posterior mean: solve `M u = z`;
//! - posterior draw: solve `M u = z + Z`, `Z ~ N(0, I)`;
//! - log marginal likelihood: `½‖z‖² − Σ_i log(s ξ_i M_ii)`.
//!
//! Because `W^j` is the leading block of `W^{j+k}`, `M^j` and `z^j` are leading
//! blocks of `M^{j+k}` and `z^{j+k}`, and the Bayes factor between the two models
//! only needs the trailing part `g` of `z^{j+k}` and the trailing diagonal of
//! `M^{j+k}`.

mod dense;
mod sparse;

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::basis::{BasisFamily, BasisSpec};
use crate::error::{invalid, Result};
use crate::suffstats::{StatsView, SuffStats};

pub use dense::{cholesky_upper_in_place, solve_upper, solve_upper_transposed};
use sparse::{ReversedFactor, Sparse};

#[derive(Clone, Debug)]
enum Repr {
    /// Row-major `m × m` upper factor.
    Dense(Vec<f64>),
    /// Factor of the order-reversed matrix; `z` lives in reversed order too.
    Reversed(ReversedFactor),
}

/// Cholesky factorization of `W^j` together with `z^j`.
#[derive(Clone, Debug)]
pub struct PosteriorFactor {
    j: usize,
    s_sq: f64,
    repr: Repr,
    z: Vec<f64>,
    log_diag: Vec<f64>,
    /// `Σ_i log(s ξ_i)`
    log_prior_sd: f64,
}

fn prior_precision(spec: &BasisSpec, s_sq: f64, m: usize) -> Vec<f64> {
    spec.xi_sq_vec(m).into_iter().map(|x| 1.0 / (s_sq * x)).collect()
}

fn log_prior_sd(spec: &BasisSpec, s_sq: f64, m: usize) -> f64 {
    (1..=m).map(|l| 0.5 * libm::log(s_sq * spec.xi_sq_unchecked(l))).sum()
}

fn check_inputs(view: &StatsView<'_>, spec: &BasisSpec, s_sq: f64, j: usize) -> Result<usize> {
    if !(s_sq.is_finite() && s_sq > 0.0) {
        return Err(invalid(alloc::format!("scale must be positive, got {s_sq}")));
    }
    let m = spec.model_dim(j)?;
    if view.dim() < m {
        return Err(invalid(alloc::format!(
            "statistics cover {} basis functions, model {j} needs {m}",
            view.dim()
        )));
    }
    Ok(m)
}

/// Dense factorization of `W^j = Σ^j + (s²Ξ^j)⁻¹` using the leading `m_j` block
/// of `view`.
pub fn factorize(view: &StatsView<'_>, spec: &BasisSpec, s_sq: f64, j: usize) -> Result<PosteriorFactor> {
    let m = check_inputs(view, spec, s_sq, j)?;
    let precision = prior_precision(spec, s_sq, m);
    let mut w = alloc::vec![0.0; m * m];
    for i in 0..m {
        for (c, v) in view.lower_row(i) {
            if c < m {
                w[c * m + i] = v;
            }
        }
        w[i * m + i] += precision[i];
    }
    cholesky_upper_in_place(&mut w, m, m)?;
    let mut z: Vec<f64> = (0..m).map(|i| view.mu(i)).collect();
    solve_upper_transposed(&w, m, m, &mut z);
    let log_diag = (0..m).map(|i| libm::log(w[i * m + i])).collect();
    Ok(PosteriorFactor {
        j,
        s_sq,
        repr: Repr::Dense(w),
        z,
        log_diag,
        log_prior_sd: log_prior_sd(spec, s_sq, m),
    })
}

/// Sparse factorization for the Schauder basis, eliminating the finest level
/// first. Falls back to [`factorize`] (with a warning) if the elimination would
/// fill in outside the pattern of `Σ`.
pub fn factorize_sparse_schauder(
    view: &StatsView<'_>,
    spec: &BasisSpec,
    s_sq: f64,
    j: usize,
) -> Result<PosteriorFactor> {
    if spec.family() != BasisFamily::Schauder {
        return Err(invalid("sparse factorization requires the Schauder basis"));
    }
    let m = check_inputs(view, spec, s_sq, j)?;
    let sub = view.truncate(m);
    let precision = prior_precision(spec, s_sq, m);
    match ReversedFactor::factor(&sub, &precision)? {
        Sparse::Factor(f) => {
            let mut z: Vec<f64> = (0..m).map(|r| sub.mu(m - 1 - r)).collect();
            f.solve_transposed(&mut z);
            let log_diag = (0..m).map(|r| libm::log(f.diag(r))).collect();
            Ok(PosteriorFactor {
                j,
                s_sq,
                repr: Repr::Reversed(f),
                z,
                log_diag,
                log_prior_sd: log_prior_sd(spec, s_sq, m),
            })
        }
        Sparse::Fill(r, c) => {
            log::warn!("sparse factorization of model {j} hit fill-in at ({r}, {c}); using dense");
            factorize(view, spec, s_sq, j)
        }
    }
}

impl PosteriorFactor {
    pub fn level(&self) -> usize {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn s_sq(&self) -> f64 {
        self.s_sq
    }

    /// `z` with `Mᵀz = μ` (in elimination order for sparse factors).
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// `log M_ii` (in elimination order for sparse factors).
    pub fn log_diag(&self) -> &[f64] {
        &self.log_diag
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, Repr::Reversed(_))
    }

    /// Stored nonzeros of the triangular factor.
    pub fn factor_nnz(&self) -> usize {
        match &self.repr {
            Repr::Dense(w) => w.iter().filter(|v| **v != 0.0).count(),
            Repr::Reversed(f) => f.nnz(),
        }
    }

    /// The triangular factor as a dense row-major matrix: `M` (upper, natural order)
    /// for dense factors, `R` (upper, reversed order) for sparse ones.
    pub fn factor_dense(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(w) => w.clone(),
            Repr::Reversed(f) => f.to_dense(),
        }
    }

    /// Rebuilds `W` (natural order) from the factor.
    pub fn reconstruct(&self) -> Vec<f64> {
        let m = self.dim();
        let f = self.factor_dense();
        let mut out = alloc::vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                let s: f64 = (0..=a.min(b)).map(|k| f[k * m + a] * f[k * m + b]).sum();
                out[a * m + b] = s;
            }
        }
        if self.is_sparse() {
            let mut natural = alloc::vec![0.0; m * m];
            for a in 0..m {
                for b in 0..m {
                    natural[(m - 1 - a) * m + (m - 1 - b)] = out[a * m + b];
                }
            }
            natural
        } else {
            out
        }
    }

    /// `μᵀW⁻¹μ = ‖z‖²`.
    pub fn quadratic_form(&self) -> f64 {
        self.z.iter().map(|v| v * v).sum()
    }

    fn backsolve(&self, mut rhs: Vec<f64>) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(w) => {
                let m = self.dim();
                solve_upper(w, m, m, &mut rhs);
                rhs
            }
            Repr::Reversed(f) => {
                f.solve(&mut rhs);
                rhs.reverse();
                rhs
            }
        }
    }

    /// `W⁻¹μ`.
    pub fn posterior_mean(&self) -> Vec<f64> {
        self.backsolve(self.z.clone())
    }

    /// One draw from `N(W⁻¹μ, W⁻¹)`.
    pub fn sample_coefficients<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let rhs: Vec<f64> = self.z.iter().map(|z| z + rng.sample::<f64, _>(StandardNormal)).collect();
        self.backsolve(rhs)
    }

    /// `log p(x | j, s²) = ½‖z‖² − Σ_i log(s ξ_i M_ii)`.
    pub fn log_predictive(&self) -> f64 {
        0.5 * self.quadratic_form() - self.log_prior_sd - self.log_diag.iter().sum::<f64>()
    }

    /// Factor of model `j_small ≤ j`, read off the leading block (dense only).
    pub fn nested(&self, spec: &BasisSpec, j_small: usize) -> Result<PosteriorFactor> {
        let Repr::Dense(w) = &self.repr else {
            return Err(invalid("nested factors need the natural-order dense factor"));
        };
        let m_small = self.check_nested(spec, j_small)?;
        let m = self.dim();
        let mut lead = alloc::vec![0.0; m_small * m_small];
        for i in 0..m_small {
            lead[i * m_small..(i + 1) * m_small].copy_from_slice(&w[i * m..i * m + m_small]);
        }
        Ok(PosteriorFactor {
            j: j_small,
            s_sq: self.s_sq,
            repr: Repr::Dense(lead),
            z: self.z[..m_small].to_vec(),
            log_diag: self.log_diag[..m_small].to_vec(),
            log_prior_sd: log_prior_sd(spec, self.s_sq, m_small),
        })
    }

    fn check_nested(&self, spec: &BasisSpec, j_small: usize) -> Result<usize> {
        let m_small = spec.model_dim(j_small)?;
        if j_small > self.j || spec.dim(self.j) != self.dim() {
            return Err(invalid(alloc::format!(
                "model {j_small} is not nested in the factor of model {}",
                self.j
            )));
        }
        Ok(m_small)
    }

    /// `log B(j | j_small)` from the trailing part of this factor:
    /// `½‖g‖² − Σ_{i > m_small} log(s ξ_i M_ii)` (dense only).
    pub fn log_bayes_factor_over(&self, spec: &BasisSpec, j_small: usize) -> Result<f64> {
        if self.is_sparse() {
            return Err(invalid("incremental Bayes factors need the natural-order dense factor"));
        }
        let m_small = self.check_nested(spec, j_small)?;
        let g2: f64 = self.z[m_small..].iter().map(|v| v * v).sum();
        let mut log_sd = 0.0;
        for (i, ld) in self.log_diag.iter().enumerate().skip(m_small) {
            log_sd += 0.5 * libm::log(self.s_sq * spec.xi_sq_unchecked(i + 1)) + ld;
        }
        Ok(0.5 * g2 - log_sd)
    }
}

/// `log B(j_to | j_from) = log p(x | j_to, s²) − log p(x | j_from, s²)`, from a
/// single dense factorization of the larger model.
pub fn log_bayes_factor(stats: &SuffStats, spec: &BasisSpec, s_sq: f64, j_from: usize, j_to: usize) -> Result<f64> {
    spec.check_level(j_from)?;
    spec.check_level(j_to)?;
    if j_from == j_to {
        return Ok(0.0);
    }
    let big = j_from.max(j_to);
    let factor = factorize(&stats.view(big)?, spec, s_sq, big)?;
    let up = factor.log_bayes_factor_over(spec, j_from.min(j_to))?;
    Ok(if j_to > j_from { up } else { -up })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{euler_simulate, Path};
    use crate::rng::from_seed;
    use std::vec;

    fn stats_for(spec: &BasisSpec, seed: u64) -> SuffStats {
        let p = euler_simulate(|x| 4.0 * (core::f64::consts::TAU * x).sin(), 0.0, 3.0, 0.002, seed).unwrap();
        SuffStats::compute(spec, &p)
    }

    fn no_data(spec: &BasisSpec) -> SuffStats {
        // a path that never moves has μ = 0 but Σ ≠ 0; use a zero-length window
        let p = Path::new(0.0, 1e-300, vec![0.3, 0.3]).unwrap();
        SuffStats::compute(spec, &p)
    }

    #[test]
    fn unit_prior_without_data() {
        let spec = BasisSpec::new(BasisFamily::Fourier, 1.0, 3).unwrap();
        let stats = no_data(&spec);
        let f = factorize(&stats.view(1).unwrap(), &spec, 1.0, 1).unwrap();
        assert!((f.factor_dense()[0] - 1.0).abs() < 1e-12);
        assert_eq!(f.z(), &[0.0]);
        assert!(f.log_predictive().abs() < 1e-12);
    }

    #[test]
    fn log_predictive_without_data_is_zero_for_all_levels() {
        for family in [BasisFamily::Fourier, BasisFamily::Schauder] {
            let spec = BasisSpec::new(family, 1.5, 5).unwrap();
            let stats = no_data(&spec);
            for j in 1..=5 {
                for s_sq in [0.1, 1.0, 7.5] {
                    let f = factorize(&stats.view(j).unwrap(), &spec, s_sq, j).unwrap();
                    assert!(f.log_predictive().abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_scale_and_level() {
        let spec = BasisSpec::new(BasisFamily::Fourier, 1.0, 3).unwrap();
        let stats = stats_for(&spec, 1);
        let v = stats.full_view();
        assert!(factorize(&v, &spec, 0.0, 1).is_err());
        assert!(factorize(&v, &spec, 1.0, 4).is_err());
        assert!(factorize_sparse_schauder(&v, &spec, 1.0, 2).is_err());
        assert!(log_bayes_factor(&stats, &spec, 1.0, 0, 2).is_err());
    }

    #[test]
    fn equal_levels_have_unit_bayes_factor() {
        let spec = BasisSpec::new(BasisFamily::Fourier, 1.0, 4).unwrap();
        let stats = stats_for(&spec, 2);
        assert_eq!(log_bayes_factor(&stats, &spec, 2.0, 3, 3).unwrap(), 0.0);
        let up = log_bayes_factor(&stats, &spec, 2.0, 1, 4).unwrap();
        let down = log_bayes_factor(&stats, &spec, 2.0, 4, 1).unwrap();
        assert_eq!(up, -down);
    }

    #[test]
    fn quadratic_form_identity() {
        let spec = BasisSpec::new(BasisFamily::Fourier, 1.0, 4).unwrap();
        let stats = stats_for(&spec, 3);
        let v = stats.full_view();
        let f = factorize(&v, &spec, 1.3, 4).unwrap();
        let mean = f.posterior_mean();
        let mu = v.mu_vec();
        let direct: f64 = mu.iter().zip(&mean).map(|(a, b)| a * b).sum();
        assert!((direct - f.quadratic_form()).abs() < 1e-10 * direct.abs());
    }

    #[test]
    fn sparse_matches_dense_on_schauder() {
        let spec = BasisSpec::new(BasisFamily::Schauder, 1.5, 6).unwrap();
        let stats = stats_for(&spec, 4);
        let v = stats.full_view();
        for j in 1..=6 {
            let d = factorize(&v, &spec, 0.8, j).unwrap();
            let s = factorize_sparse_schauder(&v, &spec, 0.8, j).unwrap();
            assert!(s.is_sparse());
            for (a, b) in d.posterior_mean().iter().zip(s.posterior_mean()) {
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-3));
            }
            assert!((d.log_predictive() - s.log_predictive()).abs() < 1e-9);
            let expected = (1usize << (j - 1)) * (j - 1) + 1;
            assert!(s.factor_nnz() <= expected);
        }
    }

    #[test]
    fn sampler_reproduces_scalar_posterior() {
        // Σ = [3], ξ² = 1, s² = 1 → W = [4]; μ = 2 → mean 0.5, variance 0.25
        let spec = BasisSpec::new(BasisFamily::Fourier, 1.0, 1).unwrap();
        let p = Path::new(0.0, 3.0, vec![0.0, 2.0]).unwrap();
        let stats = SuffStats::compute(&spec, &p);
        let f = factorize(&stats.full_view(), &spec, 1.0, 1).unwrap();
        assert_eq!(f.factor_dense(), vec![2.0]);
        assert_eq!(f.z(), &[1.0]);
        assert_eq!(f.posterior_mean(), vec![0.5]);
        let mut rng = from_seed(5);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| f.sample_coefficients(&mut rng)[0]).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
        assert!((var - 0.25).abs() < 3.0 * 0.25 * (2.0 / n as f64).sqrt());
        // Lemma-3 value by hand: ½·μ²/W − ½·log(s²ξ²W)
        let hand = 0.5 * 4.0 / 4.0 - 0.5 * 4f64.ln();
        assert!((f.log_predictive() - hand).abs() < 1e-14);
    }

    #[test]
    fn degenerate_schauder_rows_stay_definite() {
        // path stuck in [0.1, 0.2] never enters the supports on [½, 1]
        let spec = BasisSpec::new(BasisFamily::Schauder, 1.5, 5).unwrap();
        let values: Vec<f64> = (0..300).map(|i| 0.15 + 0.04 * ((i as f64) * 0.7).sin()).collect();
        let p = Path::new(0.0, 0.01, values).unwrap();
        let stats = SuffStats::compute(&spec, &p);
        let v = stats.full_view();
        assert_eq!(v.sigma(3, 3), 0.0);
        let d = factorize(&v, &spec, 1.0, 5).unwrap();
        let s = factorize_sparse_schauder(&v, &spec, 1.0, 5).unwrap();
        // an unvisited coefficient keeps its prior mean of zero
        assert_eq!(d.posterior_mean()[3], 0.0);
        assert_eq!(s.posterior_mean()[3], 0.0);
    }
}
