//! The `simulate`, `fit` and `summarize` subcommands.

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rjdrift_core::diffusion::{euler_simulate, thin};
use rjdrift_core::posterior::{diagnostics, summarize as summarize_chain};
use rjdrift_core::sampler::{run_continuous, run_discrete};
use rjdrift_core::testdrifts::{gallery, NAMES};
use rjdrift_core::{BasisFamily, BasisSpec};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{config_hash, Basis, RunConfig};
use crate::error::CliError;
use crate::io::{fmt_f64, read_path_csv, write_path_csv, write_table};

/// Observations above this spacing are too coarse to treat as continuous.
pub const CONTINUOUS_DT_WARN: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "rjdrift", version, about = "Bayesian drift estimation for periodic diffusions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate `dX = b(X) dt + dW` by the Euler scheme and write `t,x` CSV.
    Simulate(SimulateArgs),
    /// Run the sampler on a `t,x` CSV file.
    Fit(FitArgs),
    /// Merge CSV outputs of several runs into one long-format table.
    Summarize(SummarizeArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Named drift: main, b1, b2 or b3.
    #[arg(long, required_unless_present = "coef_file", conflicts_with = "coef_file")]
    pub drift: Option<String>,
    /// JSON file `{"basis": .., "beta": .., "theta": [..]}` defining the drift.
    #[arg(long)]
    pub coef_file: Option<PathBuf>,
    #[arg(long, default_value_t = 200.0)]
    pub t_end: f64,
    /// Euler step.
    #[arg(long, default_value_t = 1e-5)]
    pub dt: f64,
    /// Keep every n-th simulated point.
    #[arg(long, default_value_t = 1)]
    pub keep_every: usize,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Continuous,
    Discrete,
}

/// Command-line overrides of [`RunConfig`] fields.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub basis: Option<Basis>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub j_max: Option<usize>,
    #[arg(long)]
    pub ig_shape: Option<f64>,
    #[arg(long)]
    pub ig_rate: Option<f64>,
    #[arg(long)]
    pub model_decay: Option<f64>,
    #[arg(long)]
    pub q_stay: Option<f64>,
    #[arg(long)]
    pub q_up: Option<f64>,
    #[arg(long)]
    pub q_down: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub n_interior: Option<usize>,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Keep the model index fixed (disables the jump move).
    #[arg(long)]
    pub fixed_level: Option<usize>,
    /// Keep `s²` fixed (disables its Gibbs update).
    #[arg(long)]
    pub fixed_scale: Option<f64>,
    /// Use dense factorizations for the Schauder basis.
    #[arg(long)]
    pub dense: bool,
    #[arg(long)]
    pub resync_every: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, c: &mut RunConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$( if let Some(v) = self.$f { c.$f = v; } )*};
        }
        macro_rules! set_opt {
            ($($f:ident),*) => {$( if self.$f.is_some() { c.$f = self.$f; } )*};
        }
        set!(basis, beta, ig_shape, ig_rate, model_decay, iters, burn_in, n_interior, grid_size, alpha, resync_every);
        set_opt!(j_max, q_stay, q_up, q_down, fixed_level, fixed_scale);
        if self.dense {
            c.sparse = false;
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// `t,x` CSV with uniform time spacing.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "continuous")]
    pub mode: Mode,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// JSON file with [`RunConfig`] fields; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Inputs as `label=file` (or just `file`, labelled by its stem).
    #[arg(required = true)]
    pub inputs: Vec<String>,
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Fit(a) => fit(&a),
        Command::Summarize(a) => summarize(&a),
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CoefFile {
    pub basis: Basis,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub theta: Vec<f64>,
}

fn default_beta() -> f64 {
    1.5
}

impl CoefFile {
    /// Smallest basis spec whose largest model holds every coefficient.
    fn spec(&self) -> Result<BasisSpec, CliError> {
        if self.theta.is_empty() {
            return Err(CliError::Validation("coefficient file has no coefficients".into()));
        }
        let family = BasisFamily::from(self.basis);
        let mut j = 1;
        loop {
            let spec = BasisSpec::new(family, self.beta, j)?;
            if spec.max_dim() >= self.theta.len() {
                return Ok(spec);
            }
            j += 1;
        }
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    if a.keep_every == 0 {
        return Err(CliError::Validation("keep-every must be at least 1".into()));
    }
    let (label, path) = match (&a.drift, &a.coef_file) {
        (Some(name), _) => {
            let drift = gallery(name).map_err(|_| {
                CliError::Validation(format!("unknown drift `{name}` (expected one of {})", NAMES.join(", ")))
            })?;
            (name.clone(), euler_simulate(drift.f, a.x0, a.t_end, a.dt, a.seed)?)
        }
        (None, Some(file)) => {
            let text = fs::read_to_string(file).map_err(|e| CliError::io(format!("cannot read {}", file.display()), e))?;
            let coef: CoefFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: invalid coefficient file: {e}", file.display())))?;
            let spec = coef.spec()?;
            let theta = coef.theta.clone();
            let path = euler_simulate(|x| spec.eval_drift(&theta, x).unwrap_or(f64::NAN), a.x0, a.t_end, a.dt, a.seed)?;
            (file.display().to_string(), path)
        }
        (None, None) => return Err(CliError::Validation("either --drift or --coef-file is required".into())),
    };
    let path = thin(&path, a.keep_every)?;
    let hash = config_hash(&json!({
        "drift": label, "t_end": a.t_end, "dt": a.dt, "keep_every": a.keep_every, "x0": a.x0,
    }));
    write_path_csv(&a.out, &format!("seed={} config_hash={hash} drift={label}", a.seed), &path)?;
    println!("wrote {} rows to {} (seed {})", path.len(), a.out.display(), a.seed);
    Ok(())
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    let mut config = match &a.config {
        Some(file) => {
            let text = fs::read_to_string(file).map_err(|e| CliError::io(format!("cannot read {}", file.display()), e))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    a.overrides.apply(&mut config);
    config.seed = Some(a.seed);
    let resolved = config.resolve()?;
    let data = read_path_csv(&a.data)?;
    if a.mode == Mode::Continuous && data.dt() > CONTINUOUS_DT_WARN {
        log::warn!(
            "observation spacing {} exceeds {CONTINUOUS_DT_WARN}; treating the data as continuous biases the estimate (consider --mode discrete)",
            data.dt()
        );
    }
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(format!("cannot create {}", a.out_dir.display()), e))?;

    let (spec, prior, opts, cfg) = (&resolved.spec, &resolved.prior, &resolved.options, &resolved.config);
    let start = Instant::now();
    let chain = match a.mode {
        Mode::Continuous => run_continuous(&data, spec, prior, opts)?,
        Mode::Discrete => run_discrete(&data, spec, prior, cfg.n_interior, opts)?,
    };
    let runtime = start.elapsed().as_secs_f64();
    let summary = summarize_chain(&chain, spec, cfg.grid_size, cfg.alpha)?;
    let diag = diagnostics(&chain.records, spec, &[])?;

    let hash = cfg.hash();
    let comment = format!("seed={} config_hash={hash}", a.seed);
    let rows = (0..summary.grid.len()).map(|i| {
        vec![fmt_f64(summary.grid[i]), fmt_f64(summary.mean[i]), fmt_f64(summary.band_lo[i]), fmt_f64(summary.band_hi[i])]
    });
    write_table(&a.out_dir.join("summary.csv"), &comment, &["x", "mean", "lo", "hi"], rows)?;
    let rows = chain.records.iter().map(|r| {
        vec![
            r.iteration.to_string(),
            r.j.to_string(),
            fmt_f64(r.s_sq),
            u8::from(r.accepted).to_string(),
            fmt_f64(r.bridge_rate()),
        ]
    });
    write_table(&a.out_dir.join("chain.csv"), &comment, &["iter", "j", "s_sq", "accept2", "accept3_rate"], rows)?;

    let histogram: serde_json::Map<String, serde_json::Value> =
        summary.model_histogram.iter().map(|(j, n)| (j.to_string(), json!(n))).collect();
    let acceptance: Vec<_> = diag
        .model_acceptance
        .iter()
        .map(|p| json!({"from": p.from, "to": p.to, "proposals": p.proposals, "mean_accept_prob": p.mean_accept_prob}))
        .collect();
    let meta = json!({
        "config": cfg,
        "config_hash": hash,
        "seed": a.seed,
        "mode": a.mode,
        "data": a.data.display().to_string(),
        "observations": data.len(),
        "observation_dt": data.dt(),
        "runtime_seconds": runtime,
        "records": chain.records.len(),
        "s_sq_mean": summary.s_sq_mean,
        "s_sq_median": summary.s_sq_median,
        "model_histogram": histogram,
        "model_acceptance": acceptance,
        "bridge_acceptance_mean": diag.bridge_rate_mean,
        "bands": format!("pointwise empirical quantiles (type 7), alpha = {}", cfg.alpha),
    });
    let meta_path = a.out_dir.join("meta.json");
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&meta_path, text + "\n").map_err(|e| CliError::io(format!("cannot write {}", meta_path.display()), e))?;
    println!(
        "{} records, s² mean {:.4} median {:.4}, {:.1}s; outputs in {}",
        chain.records.len(),
        summary.s_sq_mean,
        summary.s_sq_median,
        runtime,
        a.out_dir.display()
    );
    Ok(())
}

fn parse_input(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((label, file)) if !label.is_empty() => (label.to_string(), PathBuf::from(file)),
        _ => {
            let p = PathBuf::from(spec);
            let label = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.to_string());
            (label, p)
        }
    }
}

fn read_table(file: &FsPath) -> Result<(Vec<String>, Vec<csv::StringRecord>), CliError> {
    let err = |m: String| CliError::Data { path: file.display().to_string(), message: m };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(file)
        .map_err(|e| err(format!("cannot open: {e}")))?;
    let header = reader.headers().map_err(|e| err(e.to_string()))?.iter().map(str::to_string).collect();
    let rows = reader.records().collect::<Result<Vec<_>, _>>().map_err(|e| err(e.to_string()))?;
    Ok((header, rows))
}

pub fn summarize(a: &SummarizeArgs) -> Result<(), CliError> {
    if a.inputs.is_empty() {
        return Err(CliError::Validation("summarize needs at least one input".into()));
    }
    let mut schema: Option<Vec<String>> = None;
    let mut out_rows = Vec::new();
    let mut labels = Vec::new();
    for input in &a.inputs {
        let (label, file) = parse_input(input);
        let (header, rows) = read_table(&file)?;
        match &schema {
            None => schema = Some(header),
            Some(s) if *s != header => {
                return Err(CliError::Data {
                    path: file.display().to_string(),
                    message: format!("schema mismatch: columns `{}` differ from `{}`", header.join(","), s.join(",")),
                });
            }
            Some(_) => {}
        }
        for r in rows {
            let mut row = vec![label.clone()];
            row.extend(r.iter().map(str::to_string));
            out_rows.push(row);
        }
        labels.push(label);
    }
    let schema = schema.expect("at least one input");
    let mut header = vec!["label"];
    header.extend(schema.iter().map(String::as_str));
    write_table(&a.out, &format!("inputs={}", labels.join(",")), &header, out_rows.into_iter())?;
    println!("merged {} inputs into {}", labels.len(), a.out.display());
    Ok(())
}
