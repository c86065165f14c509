//! Run configuration shared by the subcommands.

use rjdrift_core::{BasisFamily, BasisSpec, PriorConfig, RunOptions};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Fourier,
    Schauder,
}

impl From<Basis> for BasisFamily {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Fourier => BasisFamily::Fourier,
            Basis::Schauder => BasisFamily::Schauder,
        }
    }
}

/// Every basis, prior and sampler setting of a fit. Unset optional fields take
/// the defaults of the chosen basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub basis: Basis,
    pub beta: f64,
    pub j_max: Option<usize>,
    pub ig_shape: f64,
    pub ig_rate: f64,
    pub model_decay: f64,
    pub q_stay: Option<f64>,
    pub q_up: Option<f64>,
    pub q_down: Option<f64>,
    pub iters: usize,
    pub burn_in: usize,
    pub n_interior: usize,
    pub seed: Option<u64>,
    pub grid_size: usize,
    pub alpha: f64,
    pub fixed_level: Option<usize>,
    pub fixed_scale: Option<f64>,
    pub sparse: bool,
    pub resync_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let prior = PriorConfig::defaults_for(BasisFamily::Fourier);
        let opts = RunOptions::default();
        RunConfig {
            basis: Basis::Fourier,
            beta: 1.5,
            j_max: None,
            ig_shape: prior.ig_shape,
            ig_rate: prior.ig_rate,
            model_decay: prior.model_decay,
            q_stay: None,
            q_up: None,
            q_down: None,
            iters: opts.iters,
            burn_in: opts.burn_in,
            n_interior: 49,
            seed: None,
            grid_size: rjdrift_core::posterior::DEFAULT_GRID,
            alpha: rjdrift_core::posterior::DEFAULT_ALPHA,
            fixed_level: None,
            fixed_scale: None,
            sparse: opts.sparse,
            resync_every: opts.resync_every,
        }
    }
}

/// A configuration with every default filled in and every value checked.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub spec: BasisSpec,
    pub prior: PriorConfig,
    pub options: RunOptions,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid config: {e}")))
    }

    /// Fills in basis-dependent defaults and validates against the core
    /// preconditions.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let family = BasisFamily::from(self.basis);
        let seed = self.seed.ok_or_else(|| CliError::Validation("a seed is required (--seed)".into()))?;
        let mut config = self.clone();
        let j_max = *config.j_max.get_or_insert(family.default_j_max());
        let defaults = PriorConfig::defaults_for(family);
        let prior = PriorConfig {
            ig_shape: config.ig_shape,
            ig_rate: config.ig_rate,
            model_decay: config.model_decay,
            q_stay: *config.q_stay.get_or_insert(defaults.q_stay),
            q_up: *config.q_up.get_or_insert(defaults.q_up),
            q_down: *config.q_down.get_or_insert(defaults.q_down),
        };
        prior.validate()?;
        let spec = BasisSpec::new(family, config.beta, j_max)?;
        let options = RunOptions {
            iters: config.iters,
            burn_in: config.burn_in,
            seed,
            fixed_level: config.fixed_level,
            fixed_scale: config.fixed_scale,
            sparse: config.sparse,
            resync_every: config.resync_every,
        };
        options.validate(&spec)?;
        if config.iters == config.burn_in {
            return Err(CliError::Validation("iters must exceed burn-in".into()));
        }
        if config.grid_size < 2 {
            return Err(CliError::Validation("grid-size must be at least 2".into()));
        }
        if !(config.alpha > 0.0 && config.alpha <= 1.0) {
            return Err(CliError::Validation(format!("alpha must lie in (0, 1], got {}", config.alpha)));
        }
        Ok(Resolved { config, spec, prior, options })
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("configuration serializes");
    let digest = Sha256::digest(&json);
    hex::encode(&digest[..8])
}
