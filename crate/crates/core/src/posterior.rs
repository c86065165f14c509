//! Estimates and diagnostics computed from chain records.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::accum::Compensated;
use crate::basis::BasisSpec;
use crate::error::{invalid, Result};
use crate::sampler::{Chain, ChainRecord};

/// Grid size used by [`summarize`] unless told otherwise.
pub const DEFAULT_GRID: usize = 201;
/// 90% pointwise bands.
pub const DEFAULT_ALPHA: f64 = 0.10;
/// Fewest records for which bands are computed.
pub const MIN_BAND_RECORDS: usize = 10;

/// `n` equally spaced points from 0 to 1 inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

fn curves<'a>(
    coefs: impl Iterator<Item = &'a [f64]>,
    spec: &BasisSpec,
    grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    coefs
        .map(|theta| grid.iter().map(|&x| spec.eval_drift(theta, x)).collect::<Result<Vec<f64>>>())
        .collect()
}

/// Pointwise average of `curves`, independent of their order.
fn order_free_mean(curves: &[Vec<f64>], n_grid: usize) -> Vec<f64> {
    let mut column = Vec::with_capacity(curves.len());
    (0..n_grid)
        .map(|g| {
            column.clear();
            column.extend(curves.iter().map(|c| c[g]));
            column.sort_by(f64::total_cmp);
            let mut acc = Compensated::default();
            for &v in &column {
                acc.add(v);
            }
            acc.value() / curves.len() as f64
        })
        .collect()
}

fn require_records(records: &[ChainRecord]) -> Result<()> {
    if records.is_empty() {
        Err(invalid("no chain records (all iterations were burn-in?)"))
    } else {
        Ok(())
    }
}

/// Average over records of the drift with the posterior-mean coefficients.
/// Coefficient vectors of different lengths are averaged as functions.
pub fn rao_blackwell_mean(records: &[ChainRecord], spec: &BasisSpec, grid: &[f64]) -> Result<Vec<f64>> {
    require_records(records)?;
    let c = curves(records.iter().map(|r| r.post_mean.as_slice()), spec, grid)?;
    Ok(order_free_mean(&c, grid.len()))
}

/// Plain average of the sampled drift curves.
pub fn empirical_mean(records: &[ChainRecord], spec: &BasisSpec, grid: &[f64]) -> Result<Vec<f64>> {
    require_records(records)?;
    let c = curves(records.iter().map(|r| r.theta.as_slice()), spec, grid)?;
    Ok(order_free_mean(&c, grid.len()))
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Pointwise `α/2` and `1 − α/2` quantiles of the sampled drift curves.
pub fn credible_bands(
    records: &[ChainRecord],
    spec: &BasisSpec,
    grid: &[f64],
    alpha: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if records.len() < MIN_BAND_RECORDS {
        return Err(invalid(alloc::format!(
            "credible bands need at least {MIN_BAND_RECORDS} records, got {}",
            records.len()
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(alloc::format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let c = curves(records.iter().map(|r| r.theta.as_slice()), spec, grid)?;
    let mut lo = Vec::with_capacity(grid.len());
    let mut hi = Vec::with_capacity(grid.len());
    let mut column = Vec::with_capacity(c.len());
    for g in 0..grid.len() {
        column.clear();
        column.extend(c.iter().map(|curve| curve[g]));
        column.sort_by(f64::total_cmp);
        lo.push(quantile_sorted(&column, alpha / 2.0));
        hi.push(quantile_sorted(&column, 1.0 - alpha / 2.0));
    }
    Ok((lo, hi))
}

/// Mean Move II acceptance probability for one `(from, to)` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairAcceptance {
    pub from: usize,
    pub to: usize,
    pub proposals: usize,
    pub mean_accept_prob: f64,
}

/// Trace and model diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub design_points: Vec<f64>,
    /// `traces[p][t]`: sampled drift at design point `p` in record `t`.
    pub traces: Vec<Vec<f64>>,
    pub running_means: Vec<Vec<f64>>,
    pub model_series: Vec<usize>,
    pub s_sq_series: Vec<f64>,
    pub s_sq_mean: f64,
    pub s_sq_median: f64,
    pub model_histogram: BTreeMap<usize, usize>,
    pub model_acceptance: Vec<PairAcceptance>,
    pub bridge_rate_mean: f64,
}

fn model_histogram(records: &[ChainRecord]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for r in records {
        *h.entry(r.j).or_insert(0) += 1;
    }
    h
}

fn model_acceptance(records: &[ChainRecord]) -> Vec<PairAcceptance> {
    let mut sums: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
    for r in records {
        let e = sums.entry((r.from_j, r.proposed_j)).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += r.accept_prob;
    }
    sums.into_iter()
        .map(|((from, to), (n, s))| PairAcceptance { from, to, proposals: n, mean_accept_prob: s / n as f64 })
        .collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

fn mean(values: &[f64]) -> f64 {
    let mut acc = Compensated::default();
    for &v in values {
        acc.add(v);
    }
    acc.value() / values.len() as f64
}

/// Traces, running means, model visits, acceptance tables and `s²` summaries.
pub fn diagnostics(records: &[ChainRecord], spec: &BasisSpec, design_points: &[f64]) -> Result<Diagnostics> {
    require_records(records)?;
    let mut traces = Vec::with_capacity(design_points.len());
    let mut running_means = Vec::with_capacity(design_points.len());
    for &x in design_points {
        let trace = records.iter().map(|r| spec.eval_drift(&r.theta, x)).collect::<Result<Vec<f64>>>()?;
        let mut acc = Compensated::default();
        let running = trace
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                acc.add(v);
                acc.value() / (i + 1) as f64
            })
            .collect();
        traces.push(trace);
        running_means.push(running);
    }
    let s_sq_series: Vec<f64> = records.iter().map(|r| r.s_sq).collect();
    let bridge_rates: Vec<f64> = records.iter().map(ChainRecord::bridge_rate).collect();
    Ok(Diagnostics {
        design_points: design_points.to_vec(),
        traces,
        running_means,
        model_series: records.iter().map(|r| r.j).collect(),
        s_sq_mean: mean(&s_sq_series),
        s_sq_median: median(&s_sq_series),
        s_sq_series,
        model_histogram: model_histogram(records),
        model_acceptance: model_acceptance(records),
        bridge_rate_mean: mean(&bridge_rates),
    })
}

/// Everything reported about a finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSummary {
    pub grid: Vec<f64>,
    /// Rao–Blackwellized posterior mean drift.
    pub mean: Vec<f64>,
    /// Plain average of the sampled drifts.
    pub mean_empirical: Vec<f64>,
    pub band_lo: Vec<f64>,
    pub band_hi: Vec<f64>,
    pub alpha: f64,
    pub s_sq_samples: Vec<f64>,
    pub j_samples: Vec<usize>,
    pub s_sq_mean: f64,
    pub s_sq_median: f64,
    pub model_histogram: BTreeMap<usize, usize>,
    pub model_acceptance: Vec<PairAcceptance>,
    /// Per-segment Move III acceptance rate (empty for continuous data).
    pub bridge_acceptance: Vec<f64>,
}

/// Summarizes a chain on a uniform grid of `grid_size` points.
pub fn summarize(chain: &Chain, spec: &BasisSpec, grid_size: usize, alpha: f64) -> Result<PosteriorSummary> {
    if grid_size < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    let records = &chain.records;
    let grid = uniform_grid(grid_size);
    let mean_rb = rao_blackwell_mean(records, spec, &grid)?;
    let mean_empirical = empirical_mean(records, spec, &grid)?;
    let (band_lo, band_hi) = credible_bands(records, spec, &grid, alpha)?;
    let s_sq_samples: Vec<f64> = records.iter().map(|r| r.s_sq).collect();
    Ok(PosteriorSummary {
        mean: mean_rb,
        mean_empirical,
        band_lo,
        band_hi,
        alpha,
        s_sq_mean: mean(&s_sq_samples),
        s_sq_median: median(&s_sq_samples),
        j_samples: records.iter().map(|r| r.j).collect(),
        s_sq_samples,
        model_histogram: model_histogram(records),
        model_acceptance: model_acceptance(records),
        bridge_acceptance: chain.bridge_acceptance.clone(),
        grid,
    })
}

/// `(∫₀¹ (f − g)² dx)^{1/2}` by the trapezoid rule, with `f` given on a uniform
/// grid over `[0, 1]`.
pub fn l2_distance(grid: &[f64], values: &[f64], truth: impl Fn(f64) -> f64) -> f64 {
    let sq: Vec<f64> = grid.iter().zip(values).map(|(&x, &v)| (v - truth(x)) * (v - truth(x))).collect();
    libm::sqrt(trapezoid(grid, &sq))
}

/// `(∫₀¹ f² dx)^{1/2}` on a grid.
pub fn l2_norm(grid: &[f64], truth: impl Fn(f64) -> f64) -> f64 {
    let sq: Vec<f64> = grid.iter().map(|&x| truth(x) * truth(x)).collect();
    libm::sqrt(trapezoid(grid, &sq))
}

fn trapezoid(grid: &[f64], y: &[f64]) -> f64 {
    grid.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}
