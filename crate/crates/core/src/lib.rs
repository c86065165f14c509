//! Nonparametric Bayesian estimation of the periodic drift of a unit-diffusion SDE
//!
//! `dX_t = b(X_t) dt + dW_t`
//!
//! The drift is modelled as a truncated series `b = Σ θ_l ψ_l` over a Fourier or
//! Faber–Schauder basis. The truncation level `j`, the coefficients `θ` and a
//! multiplicative scale `s²` all carry priors, and the posterior is explored with a
//! reversible-jump Markov chain:
//!
//! - Move I: Gibbs update of `s²` from its inverse-gamma full conditional.
//! - Move II: jump between truncation levels using exact Bayes factors, then draw
//!   `θ` from its Gaussian full conditional.
//! - Move III (discrete data only): Metropolis–Hastings refresh of the latent
//!   diffusion bridges between observations.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command line
//! live in the companion `rjdrift-cli` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod accum;
pub mod basis;
pub mod diffusion;
mod error;
pub mod linalg;
pub mod posterior;
pub mod rng;
pub mod sampler;
pub mod suffstats;
pub mod testdrifts;

pub use basis::{BasisFamily, BasisSpec};
pub use diffusion::Path;
pub use error::{Error, Result};
pub use linalg::PosteriorFactor;
pub use posterior::PosteriorSummary;
pub use sampler::{Chain, ChainRecord, ChainState, PriorConfig, RunOptions};
pub use suffstats::{AugmentedStats, StatsView, SuffStats};
