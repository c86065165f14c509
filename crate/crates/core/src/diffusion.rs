//! Sample paths: Euler simulation, thinning, Brownian-bridge proposals and the
//! discretized Girsanov log-likelihood.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, Domain};

/// Values of a path on a uniform time grid `t0, t0 + dt, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl Path {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("a path needs at least two values"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(alloc::format!("time step must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(invalid("start time must be finite"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(alloc::format!("value {i} is not finite")));
        }
        Ok(Self { t0, dt, values })
    }

    /// Builds a path from explicit sample times, which must be equally spaced up to
    /// a relative tolerance of `1e-6` of the step.
    pub fn from_samples(times: &[f64], values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(invalid("times and values differ in length"));
        }
        if times.len() < 2 {
            return Err(invalid("a path needs at least two values"));
        }
        let n = times.len() - 1;
        let dt = (times[n] - times[0]) / n as f64;
        if !(dt > 0.0) {
            return Err(invalid("sample times must be increasing"));
        }
        for (i, &t) in times.iter().enumerate() {
            let expected = times[0] + i as f64 * dt;
            if libm::fabs(t - expected) > 1e-6 * dt {
                return Err(invalid(alloc::format!(
                    "sample times are not uniformly spaced (row {i}: t = {t}, expected {expected})"
                )));
            }
        }
        Self::new(times[0], dt, values)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Euler–Maruyama simulation of `dX = b(X) dt + dW` on `[0, T]`.
///
/// The number of steps is `T / dt` rounded to the nearest integer. The path is a
/// deterministic function of `seed`.
pub fn euler_simulate<F>(drift: F, x0: f64, t_end: f64, dt: f64, seed: u64) -> Result<Path>
where
    F: Fn(f64) -> f64,
{
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(invalid(alloc::format!("duration must be positive, got {t_end}")));
    }
    if !(dt.is_finite() && dt > 0.0 && dt <= t_end) {
        return Err(invalid(alloc::format!("time step must lie in (0, T], got {dt}")));
    }
    if !x0.is_finite() {
        return Err(invalid("initial value must be finite"));
    }
    let steps = (libm::round(t_end / dt) as usize).max(1);
    let mut rng = rng::substream(seed, Domain::Simulate, 0, 0);
    let sd = libm::sqrt(dt);
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = x0;
    values.push(x);
    for i in 0..steps {
        let b = drift(x);
        let z: f64 = rng.sample(StandardNormal);
        x = x + b * dt + sd * z;
        if !x.is_finite() {
            return Err(Error::SimulationDiverged { index: i + 1, value: x });
        }
        values.push(x);
    }
    Path::new(0.0, dt, values)
}

/// Keeps every `keep_every`-th value, starting with the first.
pub fn thin(path: &Path, keep_every: usize) -> Result<Path> {
    if keep_every == 0 {
        return Err(invalid("keep_every must be at least 1"));
    }
    let values: Vec<f64> = path.values.iter().step_by(keep_every).copied().collect();
    if values.len() < 2 {
        return Err(invalid(alloc::format!(
            "thinning a {}-point path by {keep_every} leaves fewer than two values",
            path.len()
        )));
    }
    Path::new(path.t0, path.dt * keep_every as f64, values)
}

/// Brownian bridge from `xa` at time 0 to `xb` at time `t_len`, sampled at
/// `n_interior` equally spaced interior times.
///
/// A Brownian path `W` is drawn on the grid and corrected linearly so that it is
/// pinned at both ends; the first and last values are exactly `xa` and `xb`.
pub fn sample_bridge<R: Rng + ?Sized>(
    xa: f64,
    xb: f64,
    t_len: f64,
    n_interior: usize,
    rng: &mut R,
) -> Result<Path> {
    if !(t_len.is_finite() && t_len > 0.0) {
        return Err(invalid(alloc::format!("bridge length must be positive, got {t_len}")));
    }
    if !(xa.is_finite() && xb.is_finite()) {
        return Err(invalid("bridge endpoints must be finite"));
    }
    let mut values = alloc::vec![0.0; n_interior + 2];
    fill_bridge(xa, xb, t_len, &mut values, rng);
    Path::new(0.0, t_len / (n_interior + 1) as f64, values)
}

/// Writes a bridge into `out` (length ≥ 2), pinning `out[0] = xa` and
/// `out[last] = xb`.
pub(crate) fn fill_bridge<R: Rng + ?Sized>(xa: f64, xb: f64, t_len: f64, out: &mut [f64], rng: &mut R) {
    let steps = out.len() - 1;
    let sd = libm::sqrt(t_len / steps as f64);
    let mut w = 0.0;
    out[0] = 0.0;
    for v in out[1..].iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        *v = w;
    }
    let shift = out[steps] - xb + xa;
    for (i, v) in out.iter_mut().enumerate() {
        *v = *v - (i as f64 / steps as f64) * shift + xa;
    }
    out[0] = xa;
    out[steps] = xb;
}

/// Discretized Girsanov log-likelihood
/// `Σ b(x_i)(x_{i+1} − x_i) − ½ Σ b(x_i)² dt` with left-point sums.
pub fn log_girsanov<F>(drift: F, path: &Path) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    girsanov_values(drift, path.values(), path.dt())
}

pub(crate) fn girsanov_values<F>(drift: F, values: &[f64], dt: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut ito = 0.0;
    let mut energy = 0.0;
    for w in values.windows(2) {
        let b = drift(w[0]);
        if !b.is_finite() {
            return Err(Error::NonFiniteDrift { x: w[0] });
        }
        ito += b * (w[1] - w[0]);
        energy += b * b;
    }
    Ok(ito - 0.5 * energy * dt)
}
