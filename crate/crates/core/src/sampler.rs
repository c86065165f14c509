//! The transdimensional Markov chain over `(j, θ, s²)` and, for discrete data, the
//! latent path between observations.
//!
//! Each iteration runs, in order:
//!
//! 1. Move I: `s² ~ IG(a + m_j/2, b + ½ θᵀΞ⁻¹θ)`.
//! 2. Move II: propose `j' ~ q(·|j)` and accept with probability
//!    `min{1, B(j'|j) R(j'|j)}`, where `B` is the Bayes factor at the current `s²`
//!    and `R = p(j')q(j|j') / (p(j)q(j'|j))`. On acceptance `θ` is drawn from its
//!    full conditional in model `j'`. A proposal `j' = j` is always accepted and
//!    refreshes `θ`.
//! 3. Move III (discrete data): for every segment between observations propose a
//!    Brownian bridge and accept it with probability `min{1, L_k(w)/L_k(x)}`.
//!
//! All randomness is drawn from counter-based substreams of the run seed, so a
//! chain is a deterministic function of its inputs.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::basis::{BasisFamily, BasisSpec};
use crate::diffusion::{fill_bridge, girsanov_values, Path};
use crate::error::{invalid, Result};
use crate::linalg::{factorize, factorize_sparse_schauder, PosteriorFactor};
use crate::rng::{substream, Domain};
use crate::suffstats::{AugmentedStats, SuffStats, DEFAULT_RESYNC_EVERY};

/// Hyperparameters of the hierarchical prior and the model-proposal kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorConfig {
    /// Inverse-gamma shape `a` of `s²`.
    pub ig_shape: f64,
    /// Inverse-gamma rate `b` of `s²`.
    pub ig_rate: f64,
    /// `C` in `p(j) ∝ exp(−C m_j)`.
    pub model_decay: f64,
    pub q_stay: f64,
    pub q_up: f64,
    pub q_down: f64,
}

impl PriorConfig {
    /// `a = b = 5/2`, `p(j) ∝ 0.95^{m_j}`; `q = (½, ¼, ¼)` for Fourier and
    /// `(0.9, 0.05, 0.05)` for Schauder.
    pub fn defaults_for(family: BasisFamily) -> Self {
        let (q_stay, q_move) = match family {
            BasisFamily::Fourier => (0.5, 0.25),
            BasisFamily::Schauder => (0.9, 0.05),
        };
        PriorConfig {
            ig_shape: 2.5,
            ig_rate: 2.5,
            model_decay: -libm::log(0.95),
            q_stay,
            q_up: q_move,
            q_down: q_move,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ig_shape.is_finite() && self.ig_shape > 0.0) {
            return Err(invalid(alloc::format!("ig_shape must be positive, got {}", self.ig_shape)));
        }
        if !(self.ig_rate.is_finite() && self.ig_rate > 0.0) {
            return Err(invalid(alloc::format!("ig_rate must be positive, got {}", self.ig_rate)));
        }
        if !(self.model_decay.is_finite() && self.model_decay >= 0.0) {
            return Err(invalid(alloc::format!(
                "model_decay must be finite and non-negative, got {}",
                self.model_decay
            )));
        }
        let qs = [self.q_stay, self.q_up, self.q_down];
        if qs.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(invalid("proposal probabilities must lie in [0, 1]"));
        }
        if libm::fabs(qs.iter().sum::<f64>() - 1.0) > 1e-9 {
            return Err(invalid("proposal probabilities must sum to 1"));
        }
        Ok(())
    }

    /// `log p(j)` up to a constant.
    pub fn log_model_prior(&self, spec: &BasisSpec, j: usize) -> f64 {
        -self.model_decay * spec.dim(j) as f64
    }

    /// `q(to | from)`
    pub fn q(&self, from: usize, to: usize) -> f64 {
        if to == from {
            self.q_stay
        } else if to == from + 1 {
            self.q_up
        } else if to + 1 == from {
            self.q_down
        } else {
            0.0
        }
    }

    fn propose<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        if u < self.q_stay {
            j
        } else if u < self.q_stay + self.q_up {
            j + 1
        } else {
            // j = 0 is never a current state, so j − 1 ≥ 0
            j - 1
        }
    }
}

/// Run length, seed and optional restrictions of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub iters: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Keep the model index at this level; Move II only refreshes `θ`.
    pub fixed_level: Option<usize>,
    /// Keep `s²` at this value; Move I is skipped.
    pub fixed_scale: Option<f64>,
    /// Use the sparse factorization for the Schauder basis.
    pub sparse: bool,
    /// Segment replacements between full recomputations of the statistics.
    pub resync_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            iters: 3000,
            burn_in: 500,
            seed: 0,
            fixed_level: None,
            fixed_scale: None,
            sparse: true,
            resync_every: DEFAULT_RESYNC_EVERY,
        }
    }
}

impl RunOptions {
    pub fn validate(&self, spec: &BasisSpec) -> Result<()> {
        if self.burn_in > self.iters {
            return Err(invalid(alloc::format!(
                "burn-in ({}) exceeds the number of iterations ({})",
                self.burn_in,
                self.iters
            )));
        }
        if let Some(j) = self.fixed_level {
            spec.check_level(j)?;
        }
        if let Some(v) = self.fixed_scale {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(alloc::format!("fixed scale must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Current `(j, θ^j, s²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub j: usize,
    pub theta: Vec<f64>,
    pub s_sq: f64,
}

impl ChainState {
    /// `θ ~ N(0, s² Ξ^j)`.
    pub fn from_prior<R: Rng + ?Sized>(spec: &BasisSpec, j: usize, s_sq: f64, rng: &mut R) -> Result<Self> {
        let m = spec.model_dim(j)?;
        let theta = (1..=m)
            .map(|l| {
                let z: f64 = rng.sample(StandardNormal);
                z * libm::sqrt(s_sq * spec.xi_sq_unchecked(l))
            })
            .collect();
        Ok(ChainState { j, theta, s_sq })
    }

    /// `Σ_l θ_l² / ξ_l²`
    fn weighted_norm(&self, spec: &BasisSpec) -> f64 {
        self.theta.iter().enumerate().map(|(i, t)| t * t / spec.xi_sq_unchecked(i + 1)).sum()
    }
}

/// What happened in one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainRecord {
    pub iteration: usize,
    /// Model index after the iteration.
    pub j: usize,
    pub s_sq: f64,
    /// Sampled coefficients after the iteration.
    pub theta: Vec<f64>,
    /// `(W^j)⁻¹μ^j` at the post-Move-II state, for Rao–Blackwellization.
    pub post_mean: Vec<f64>,
    /// Model index before Move II.
    pub from_j: usize,
    /// Model proposed in Move II (may be out of range).
    pub proposed_j: usize,
    /// `min{1, r}` of Move II (0 for out-of-range proposals).
    pub accept_prob: f64,
    pub accepted: bool,
    pub bridges_accepted: usize,
    pub bridges_total: usize,
}

impl ChainRecord {
    /// Fraction of accepted bridge proposals (0 without augmentation).
    pub fn bridge_rate(&self) -> f64 {
        if self.bridges_total == 0 {
            0.0
        } else {
            self.bridges_accepted as f64 / self.bridges_total as f64
        }
    }
}

/// Output of a run.
#[derive(Clone, Debug)]
pub struct Chain {
    pub records: Vec<ChainRecord>,
    pub final_state: ChainState,
    /// Per-segment fraction of accepted bridges over the recorded iterations
    /// (empty for continuous data).
    pub bridge_acceptance: Vec<f64>,
    /// Final latent path (discrete data only).
    pub latent: Option<Path>,
}

/// Move I: Gibbs update of `s²`.
pub fn move_scale<R: Rng + ?Sized>(state: &mut ChainState, spec: &BasisSpec, prior: &PriorConfig, rng: &mut R) {
    let shape = prior.ig_shape + 0.5 * state.theta.len() as f64;
    let rate = prior.ig_rate + 0.5 * state.weighted_norm(spec);
    state.s_sq = sample_inverse_gamma(shape, rate, rng);
}

/// `IG(shape, rate)` via the reciprocal of a `Gamma(shape, 1/rate)` draw.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let gamma = Gamma::new(shape, 1.0 / rate).expect("shape and rate are positive");
    1.0 / gamma.sample(rng)
}

/// Result of one Move II.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelMove {
    pub from: usize,
    pub proposed: usize,
    pub accept_prob: f64,
    pub accepted: bool,
    /// Posterior mean coefficients of the model the chain is in afterwards.
    pub post_mean: Vec<f64>,
}

fn factor_at(stats: &SuffStats, spec: &BasisSpec, s_sq: f64, j: usize, sparse: bool) -> Result<PosteriorFactor> {
    let view = stats.view(j)?;
    if sparse {
        factorize_sparse_schauder(&view, spec, s_sq, j)
    } else {
        factorize(&view, spec, s_sq, j)
    }
}

/// Move II: reversible jump between models at fixed `s²`.
///
/// With `fixed_level` the proposal is always `j' = j`, which reduces the move to a
/// Gibbs refresh of `θ`.
pub fn move_model<R: Rng + ?Sized>(
    state: &mut ChainState,
    stats: &SuffStats,
    spec: &BasisSpec,
    prior: &PriorConfig,
    sparse: bool,
    fixed_level: bool,
    rng: &mut R,
) -> Result<ModelMove> {
    let j = state.j;
    let proposed = if fixed_level { j } else { prior.propose(j, rng) };
    let sparse = sparse && spec.family() == BasisFamily::Schauder;
    let s_sq = state.s_sq;

    if proposed == 0 || proposed > spec.j_max() {
        let current = factor_at(stats, spec, s_sq, j, sparse)?;
        return Ok(ModelMove { from: j, proposed, accept_prob: 0.0, accepted: false, post_mean: current.posterior_mean() });
    }

    let (log_bf, target, current) = if sparse {
        let current = factor_at(stats, spec, s_sq, j, true)?;
        if proposed == j {
            (0.0, None, current)
        } else {
            let target = factor_at(stats, spec, s_sq, proposed, true)?;
            (target.log_predictive() - current.log_predictive(), Some(target), current)
        }
    } else {
        let big = j.max(proposed);
        let factor = factor_at(stats, spec, s_sq, big, false)?;
        if proposed == j {
            (0.0, None, factor)
        } else if proposed > j {
            let lb = factor.log_bayes_factor_over(spec, j)?;
            let current = factor.nested(spec, j)?;
            (lb, Some(factor), current)
        } else {
            let lb = -factor.log_bayes_factor_over(spec, proposed)?;
            let target = factor.nested(spec, proposed)?;
            (lb, Some(target), factor)
        }
    };

    let log_r = log_bf + prior.log_model_prior(spec, proposed) - prior.log_model_prior(spec, j)
        + libm::log(prior.q(proposed, j))
        - libm::log(prior.q(j, proposed));
    let accept_prob = if log_r >= 0.0 { 1.0 } else { libm::exp(log_r) };
    let u: f64 = rng.random();
    let accepted = u < accept_prob;
    let post_mean = if accepted {
        let target = target.as_ref().unwrap_or(&current);
        state.theta = target.sample_coefficients(rng);
        state.j = proposed;
        target.posterior_mean()
    } else {
        current.posterior_mean()
    };
    Ok(ModelMove { from: j, proposed, accept_prob, accepted, post_mean })
}

/// Result of one Move III sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BridgeSweep {
    pub accepted: usize,
    pub total: usize,
}

/// Move III: independent Brownian-bridge proposals for every segment.
///
/// Segment `k` draws from substream `(seed, iteration, k)`. `on_accept(k)` is
/// called for every accepted segment.
pub fn move_bridges(
    state: &ChainState,
    aug: &mut AugmentedStats,
    spec: &BasisSpec,
    seed: u64,
    iteration: u64,
    mut on_accept: impl FnMut(usize),
) -> Result<BridgeSweep> {
    let n = aug.n_segments();
    let len = aug.n_interior() + 2;
    let delta = aug.obs_dt();
    let dt = aug.latent().dt();
    let theta = &state.theta;
    let drift = |x: f64| spec.drift_at(theta, x);
    let mut proposal = alloc::vec![0.0; len];
    let mut accepted = 0;
    for k in 1..=n {
        if aug.n_interior() == 0 {
            // nothing latent: the proposal equals the current segment
            accepted += 1;
            on_accept(k);
            continue;
        }
        let mut rng = substream(seed, Domain::Bridge, iteration, k as u64);
        let current = aug.segment(k)?;
        let (xa, xb) = (current[0], current[len - 1]);
        fill_bridge(xa, xb, delta, &mut proposal, &mut rng);
        let log_r = girsanov_values(drift, &proposal, dt)? - girsanov_values(drift, current, dt)?;
        let u: f64 = rng.random();
        if log_r >= 0.0 || u < libm::exp(log_r) {
            aug.replace_unchecked(k, &proposal);
            accepted += 1;
            on_accept(k);
        }
    }
    Ok(BridgeSweep { accepted, total: n })
}

enum Data {
    Continuous(SuffStats),
    Discrete(AugmentedStats),
}

impl Data {
    fn stats(&mut self) -> &SuffStats {
        match self {
            Data::Continuous(s) => s,
            Data::Discrete(a) => a.stats(),
        }
    }
}

/// Runs the chain on (effectively) continuously observed data: statistics are
/// computed once from `path`, then Moves I and II alternate.
pub fn run_continuous(path: &Path, spec: &BasisSpec, prior: &PriorConfig, opts: &RunOptions) -> Result<Chain> {
    prior.validate()?;
    opts.validate(spec)?;
    run(Data::Continuous(SuffStats::compute(spec, path)), spec, prior, opts)
}

/// Runs the chain on discrete observations `obs` (spacing `Δ = obs.dt()`), with
/// `n_interior` latent points imputed between consecutive observations.
pub fn run_discrete(
    obs: &Path,
    spec: &BasisSpec,
    prior: &PriorConfig,
    n_interior: usize,
    opts: &RunOptions,
) -> Result<Chain> {
    prior.validate()?;
    opts.validate(spec)?;
    let mut aug = AugmentedStats::new(spec, obs, n_interior)?;
    aug.set_resync_every(opts.resync_every);
    run(Data::Discrete(aug), spec, prior, opts)
}

fn run(mut data: Data, spec: &BasisSpec, prior: &PriorConfig, opts: &RunOptions) -> Result<Chain> {
    let seed = opts.seed;
    let j0 = opts.fixed_level.unwrap_or(1);
    let s0 = opts.fixed_scale.unwrap_or(1.0);
    let mut state = ChainState::from_prior(spec, j0, s0, &mut substream(seed, Domain::Init, 0, 0))?;
    let recorded = opts.iters - opts.burn_in;
    let mut records = Vec::with_capacity(recorded);
    let n_segments = match &data {
        Data::Discrete(a) => a.n_segments(),
        Data::Continuous(_) => 0,
    };
    let mut segment_hits = alloc::vec![0u64; n_segments];

    for it in 0..opts.iters {
        let counter = it as u64;
        if opts.fixed_scale.is_none() {
            move_scale(&mut state, spec, prior, &mut substream(seed, Domain::Scale, counter, 0));
        }
        let mv = move_model(
            &mut state,
            data.stats(),
            spec,
            prior,
            opts.sparse,
            opts.fixed_level.is_some(),
            &mut substream(seed, Domain::Model, counter, 0),
        )?;
        let keep = it >= opts.burn_in;
        let sweep = match &mut data {
            Data::Discrete(aug) => move_bridges(&state, aug, spec, seed, counter, |k| {
                if keep {
                    segment_hits[k - 1] += 1;
                }
            })?,
            Data::Continuous(_) => BridgeSweep { accepted: 0, total: 0 },
        };
        if keep {
            records.push(ChainRecord {
                iteration: it,
                j: state.j,
                s_sq: state.s_sq,
                theta: state.theta.clone(),
                post_mean: mv.post_mean,
                from_j: mv.from,
                proposed_j: mv.proposed,
                accept_prob: mv.accept_prob,
                accepted: mv.accepted,
                bridges_accepted: sweep.accepted,
                bridges_total: sweep.total,
            });
        }
    }

    let bridge_acceptance = if recorded == 0 {
        alloc::vec![0.0; n_segments]
    } else {
        segment_hits.iter().map(|&h| h as f64 / recorded as f64).collect()
    };
    let latent = match data {
        Data::Discrete(aug) => Some(aug.latent().clone()),
        Data::Continuous(_) => None,
    };
    Ok(Chain { records, final_state: state, bridge_acceptance, latent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{euler_simulate, thin};
    use crate::rng::from_seed;
    use crate::testdrifts::b1;
    use std::vec;

    fn fourier(j_max: usize) -> BasisSpec {
        BasisSpec::new(BasisFamily::Fourier, 1.5, j_max).unwrap()
    }

    fn data(seed: u64, t: f64) -> Path {
        let fine = euler_simulate(b1, 0.0, t, 1e-3, seed).unwrap();
        thin(&fine, 1).unwrap()
    }

    #[test]
    fn prior_validation() {
        let mut p = PriorConfig::defaults_for(BasisFamily::Fourier);
        assert!(p.validate().is_ok());
        p.q_up = 0.3;
        assert!(p.validate().is_err());
        let mut p = PriorConfig::defaults_for(BasisFamily::Schauder);
        p.ig_rate = 0.0;
        assert!(p.validate().is_err());
        let mut p = PriorConfig::defaults_for(BasisFamily::Schauder);
        p.model_decay = -1.0;
        assert!(p.validate().is_err());
        let d = PriorConfig::defaults_for(BasisFamily::Fourier);
        assert_eq!((d.ig_shape, d.ig_rate), (2.5, 2.5));
        assert!((d.model_decay + 0.95f64.ln()).abs() < 1e-15);
        assert_eq!((d.q_stay, d.q_up, d.q_down), (0.5, 0.25, 0.25));
        let s = PriorConfig::defaults_for(BasisFamily::Schauder);
        assert_eq!(s.q_stay, 0.9);
    }

    #[test]
    fn options_validation() {
        let spec = fourier(5);
        let mut o = RunOptions { iters: 10, burn_in: 11, ..RunOptions::default() };
        assert!(o.validate(&spec).is_err());
        o.burn_in = 10;
        assert!(o.validate(&spec).is_ok());
        o.fixed_level = Some(6);
        assert!(o.validate(&spec).is_err());
        o.fixed_level = None;
        o.fixed_scale = Some(0.0);
        assert!(o.validate(&spec).is_err());
    }

    #[test]
    fn scale_move_only_touches_scale() {
        let spec = fourier(5);
        let prior = PriorConfig::defaults_for(BasisFamily::Fourier);
        let mut rng = from_seed(1);
        let mut state = ChainState::from_prior(&spec, 3, 1.0, &mut rng).unwrap();
        let before = state.clone();
        move_scale(&mut state, &spec, &prior, &mut rng);
        assert_eq!(state.j, before.j);
        assert_eq!(state.theta, before.theta);
        assert_ne!(state.s_sq, before.s_sq);
        assert!(state.s_sq > 0.0);
    }

    #[test]
    fn scale_move_mean_with_zero_coefficients() {
        // θ = 0, m = 1: s² ~ IG(a + ½, b), mean b / (a − ½) = 1.25
        let spec = fourier(5);
        let prior = PriorConfig::defaults_for(BasisFamily::Fourier);
        let mut rng = from_seed(2);
        let n = 100_000;
        let mut draws = Vec::with_capacity(n);
        for _ in 0..n {
            let mut st = ChainState { j: 1, theta: vec![0.0], s_sq: 1.0 };
            move_scale(&mut st, &spec, &prior, &mut rng);
            draws.push(st.s_sq);
        }
        let mean = draws.iter().sum::<f64>() / n as f64;
        // IG(3, 2.5) variance = b² / ((a−1)²(a−2)) = 6.25 / 4
        let se = (6.25 / 4.0 / n as f64).sqrt();
        assert!((mean - 1.25).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn model_move_keeps_scale_and_stays_in_range() {
        let spec = fourier(4);
        let prior = PriorConfig::defaults_for(BasisFamily::Fourier);
        let stats = SuffStats::compute(&spec, &data(3, 5.0));
        let mut rng = from_seed(4);
        let mut state = ChainState::from_prior(&spec, 1, 1.7, &mut rng).unwrap();
        for _ in 0..500 {
            let mv = move_model(&mut state, &stats, &spec, &prior, false, false, &mut rng).unwrap();
            assert_eq!(state.s_sq, 1.7);
            assert!((1..=4).contains(&state.j));
            assert_eq!(state.theta.len(), spec.dim(state.j));
            assert!((0.0..=1.0).contains(&mv.accept_prob));
            if mv.proposed == mv.from {
                assert_eq!(mv.accept_prob, 1.0);
                assert!(mv.accepted);
            }
            if mv.proposed == 0 || mv.proposed > 4 {
                assert!(!mv.accepted);
            }
            assert_eq!(mv.post_mean.len(), state.theta.len());
        }
    }

    #[test]
    fn symmetric_kernel_acceptance_is_bayes_factor() {
        let spec = fourier(4);
        let prior = PriorConfig {
            model_decay: 0.0,
            q_stay: 0.0,
            q_up: 0.5,
            q_down: 0.5,
            ..PriorConfig::defaults_for(BasisFamily::Fourier)
        };
        let stats = SuffStats::compute(&spec, &data(5, 3.0));
        let s_sq = 0.9;
        let mut rng = from_seed(8);
        for _ in 0..50 {
            let mut state = ChainState::from_prior(&spec, 2, s_sq, &mut rng).unwrap();
            let mv = move_model(&mut state, &stats, &spec, &prior, false, false, &mut rng).unwrap();
            let lb = crate::linalg::log_bayes_factor(&stats, &spec, s_sq, 2, mv.proposed).unwrap();
            assert!((mv.accept_prob - lb.exp().min(1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_level_move_is_a_gibbs_refresh() {
        let spec = fourier(4);
        let prior = PriorConfig::defaults_for(BasisFamily::Fourier);
        let stats = SuffStats::compute(&spec, &data(6, 2.0));
        let mut rng = from_seed(9);
        let mut state = ChainState::from_prior(&spec, 3, 1.0, &mut rng).unwrap();
        for _ in 0..20 {
            let before = state.theta.clone();
            let mv = move_model(&mut state, &stats, &spec, &prior, false, true, &mut rng).unwrap();
            assert_eq!(mv.proposed, 3);
            assert!(mv.accepted);
            assert_eq!(state.j, 3);
            assert_ne!(state.theta, before);
        }
    }

    #[test]
    fn sparse_and_dense_model_moves_agree() {
        let spec = BasisSpec::new(BasisFamily::Schauder, 1.5, 6).unwrap();
        let prior = PriorConfig::defaults_for(BasisFamily::Schauder);
        let stats = SuffStats::compute(&spec, &data(7, 5.0));
        for seed in 0..30 {
            let mut a = ChainState::from_prior(&spec, 3, 2.0, &mut from_seed(seed)).unwrap();
            let mut b = a.clone();
            let ma = move_model(&mut a, &stats, &spec, &prior, true, false, &mut from_seed(100 + seed)).unwrap();
            let mb = move_model(&mut b, &stats, &spec, &prior, false, false, &mut from_seed(100 + seed)).unwrap();
            assert_eq!(ma.proposed, mb.proposed);
            assert!((ma.accept_prob - mb.accept_prob).abs() < 1e-9);
            assert_eq!(a.j, b.j);
            for (x, y) in ma.post_mean.iter().zip(&mb.post_mean) {
                assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn empty_chain_when_all_burn_in() {
        let spec = fourier(3);
        let prior = PriorConfig::defaults_for(BasisFamily::Fourier);
        let opts = RunOptions { iters: 20, burn_in: 20, ..RunOptions::default() };
        let chain = run_continuous(&data(1, 1.0), &spec, &prior, &opts).unwrap();
        assert!(chain.records.is_empty());
    }

    #[test]
    fn chains_are_deterministic() {
        let spec = fourier(6);
        let prior = PriorConfig::defaults_for(BasisFamily::Fourier);
        let path = data(2, 4.0);
        let opts = RunOptions { iters: 200, burn_in: 50, seed: 77, ..RunOptions::default() };
        let a = run_continuous(&path, &spec, &prior, &opts).unwrap();
        let b = run_continuous(&path, &spec, &prior, &opts).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.records.len(), 150);
        let c = run_continuous(&path, &spec, &prior, &RunOptions { seed: 78, ..opts }).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn fixed_scale_and_level_are_respected() {
        let spec = fourier(8);
        let prior = PriorConfig::defaults_for(BasisFamily::Fourier);
        let opts = RunOptions {
            iters: 100,
            burn_in: 0,
            fixed_level: Some(5),
            fixed_scale: Some(0.25),
            ..RunOptions::default()
        };
        let chain = run_continuous(&data(3, 3.0), &spec, &prior, &opts).unwrap();
        assert!(chain.records.iter().all(|r| r.j == 5 && r.s_sq == 0.25 && r.theta.len() == 9));
    }

    #[test]
    fn discrete_without_interior_points_matches_continuous() {
        let spec = fourier(6);
        let prior = PriorConfig::defaults_for(BasisFamily::Fourier);
        let obs = thin(&euler_simulate(b1, 0.0, 4.0, 1e-3, 5).unwrap(), 10).unwrap();
        let opts = RunOptions { iters: 150, burn_in: 10, seed: 3, ..RunOptions::default() };
        let cont = run_continuous(&obs, &spec, &prior, &opts).unwrap();
        let disc = run_discrete(&obs, &spec, &prior, 0, &opts).unwrap();
        for (a, b) in cont.records.iter().zip(&disc.records) {
            assert_eq!((a.j, a.s_sq, &a.theta, &a.post_mean), (b.j, b.s_sq, &b.theta, &b.post_mean));
        }
    }

    #[test]
    fn discrete_latent_path_keeps_observations() {
        let spec = BasisSpec::new(BasisFamily::Schauder, 1.5, 6).unwrap();
        let obs = thin(&euler_simulate(b1, 0.0, 3.0, 1e-3, 8).unwrap(), 50).unwrap();
        let n_interior = 9;
        let mut aug = AugmentedStats::new(&spec, &obs, n_interior).unwrap();
        let mut rng = from_seed(3);
        let state = ChainState::from_prior(&spec, 4, 5.0, &mut rng).unwrap();
        for it in 0..20 {
            let before = state.clone();
            let sweep = move_bridges(&state, &mut aug, &spec, 1, it, |_| {}).unwrap();
            assert_eq!(state, before);
            assert_eq!(sweep.total, obs.len() - 1);
            let latent = aug.latent().values();
            for (i, &x) in obs.values().iter().enumerate() {
                assert_eq!(latent[i * (n_interior + 1)].to_bits(), x.to_bits());
            }
        }
    }

    #[test]
    fn zero_and_constant_drift_accept_every_bridge() {
        let spec = fourier(3);
        let obs = thin(&euler_simulate(b1, 0.0, 2.0, 1e-3, 9).unwrap(), 50).unwrap();
        let mut aug = AugmentedStats::new(&spec, &obs, 9).unwrap();
        for theta in [vec![0.0; 5], vec![2.7, 0.0, 0.0, 0.0, 0.0]] {
            let state = ChainState { j: 3, theta, s_sq: 1.0 };
            for it in 0..5 {
                let sweep = move_bridges(&state, &mut aug, &spec, 2, it, |_| {}).unwrap();
                assert_eq!(sweep.accepted, sweep.total);
            }
        }
    }

    #[test]
    fn strong_drift_lowers_bridge_acceptance() {
        let spec = fourier(3);
        let obs = thin(&euler_simulate(b1, 0.0, 10.0, 1e-3, 10).unwrap(), 100).unwrap();
        let rate = |theta: Vec<f64>| {
            let mut aug = AugmentedStats::new(&spec, &obs, 19).unwrap();
            let state = ChainState { j: 3, theta, s_sq: 1.0 };
            let mut acc = 0;
            let mut tot = 0;
            for it in 0..1000 {
                let s = move_bridges(&state, &mut aug, &spec, 4, it, |_| {}).unwrap();
                acc += s.accepted;
                tot += s.total;
            }
            acc as f64 / tot as f64
        };
        // b1 = 8 sin(4πx) = (8/√2) ψ_4
        let strong = rate(vec![0.0, 0.0, 0.0, 8.0 / core::f64::consts::SQRT_2, 0.0]);
        let zero = rate(vec![0.0; 5]);
        assert_eq!(zero, 1.0);
        assert!(strong < zero, "strong {strong}");
    }
}
