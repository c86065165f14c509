//! Sufficient statistics of a path for the drift coefficients.
//!
//! For basis functions `ψ_1, …, ψ_m` the data enter every posterior computation
//! through
//!
//! ```text
//! μ_l      = Σ_i ψ_l(x_i) (x_{i+1} − x_i)
//! Σ_{l,l'} = Σ_i ψ_l(x_i) ψ_{l'}(x_i) dt
//! ```
//!
//! (left-point discretizations of `∫ψ_l dX` and `∫ψ_l ψ_{l'} dt`). They are computed
//! once at the largest model; every smaller model uses the leading block.
//!
//! `Σ` is stored by lower-triangular rows. For Fourier every row is full. For
//! Schauder, `ψ_l ψ_{l'}` can only be nonzero when one support contains the other,
//! so row `l` holds exactly the ancestors of `l` in the dyadic tree plus `l` itself.

use alloc::vec::Vec;

use crate::accum::Compensated;
use crate::basis::{schauder_parent, BasisFamily, BasisSpec};
use crate::diffusion::Path;
use crate::error::{invalid, Result};

#[derive(Clone, Debug)]
pub struct SuffStats {
    spec: BasisSpec,
    m: usize,
    dt: f64,
    duration: f64,
    mu: Vec<Compensated>,
    /// `cols[i]`: column indices of lower row `i`, ascending and ending in `i`.
    cols: Vec<Vec<usize>>,
    /// Occupation sums `Σ_t ψψ`; multiply by `dt` to get `Σ`.
    gram: Vec<Vec<Compensated>>,
}

impl SuffStats {
    /// Statistics of `path` for all `m_{j_max}` basis functions of `spec`.
    pub fn compute(spec: &BasisSpec, path: &Path) -> SuffStats {
        let mut stats = Self::empty(spec, spec.max_dim(), path.dt());
        stats.accumulate(path.values(), 1.0);
        stats.duration = path.duration();
        stats
    }

    /// Statistics for the first `m_j` basis functions only.
    pub fn compute_at_level(spec: &BasisSpec, path: &Path, j: usize) -> Result<SuffStats> {
        let m = spec.model_dim(j)?;
        let mut stats = Self::empty(spec, m, path.dt());
        stats.accumulate(path.values(), 1.0);
        stats.duration = path.duration();
        Ok(stats)
    }

    fn empty(spec: &BasisSpec, m: usize, dt: f64) -> SuffStats {
        let cols: Vec<Vec<usize>> = match spec.family() {
            BasisFamily::Fourier => (0..m).map(|i| (0..=i).collect()).collect(),
            BasisFamily::Schauder => (0..m).map(schauder_chain).collect(),
        };
        let gram = cols.iter().map(|c| alloc::vec![Compensated::default(); c.len()]).collect();
        SuffStats {
            spec: spec.clone(),
            m,
            dt,
            duration: 0.0,
            mu: alloc::vec![Compensated::default(); m],
            cols,
            gram,
        }
    }

    /// Adds (`sign = 1`) or removes (`sign = −1`) the left-point terms of `values`.
    fn accumulate(&mut self, values: &[f64], sign: f64) {
        let mut idx: Vec<usize> = Vec::with_capacity(64);
        let mut val: Vec<f64> = Vec::with_capacity(64);
        let m = self.m;
        for w in values.windows(2) {
            idx.clear();
            val.clear();
            self.spec.for_each_nonzero(w[0], m, |i, v| {
                idx.push(i);
                val.push(v);
            });
            let dx = w[1] - w[0];
            // The nonzero indices form a prefix-closed chain: lower row idx[a]
            // stores columns idx[0..=a] in its first a + 1 slots.
            for a in 0..idx.len() {
                let va = sign * val[a];
                self.mu[idx[a]].add(va * dx);
                let row = &mut self.gram[idx[a]];
                for (slot, &vb) in row.iter_mut().zip(&val[..=a]) {
                    slot.add(va * vb);
                }
            }
        }
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    /// Number of basis functions covered.
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Length of the observation window.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Leading `m_j` block of `μ` and `Σ`, borrowed.
    pub fn view(&self, j: usize) -> Result<StatsView<'_>> {
        let m = self.spec.model_dim(j)?;
        if m > self.m {
            return Err(invalid(alloc::format!(
                "statistics cover {} basis functions, model {j} needs {m}",
                self.m
            )));
        }
        Ok(StatsView { stats: self, m })
    }

    /// View of every basis function the statistics cover.
    pub fn full_view(&self) -> StatsView<'_> {
        StatsView { stats: self, m: self.m }
    }
}

/// 0-based Schauder indices from the constant down to `i`.
fn schauder_chain(i: usize) -> Vec<usize> {
    let mut chain = Vec::new();
    let mut l = Some(i + 1);
    while let Some(cur) = l {
        chain.push(cur - 1);
        l = schauder_parent(cur);
    }
    chain.reverse();
    chain
}

/// Leading `m × m` block of the statistics.
#[derive(Clone, Copy, Debug)]
pub struct StatsView<'a> {
    stats: &'a SuffStats,
    m: usize,
}

impl<'a> StatsView<'a> {
    pub fn dim(&self) -> usize {
        self.m
    }

    /// Leading `m` block of this view.
    pub(crate) fn truncate(&self, m: usize) -> Self {
        assert!(m <= self.m);
        StatsView { stats: self.stats, m }
    }

    pub fn family(&self) -> BasisFamily {
        self.stats.spec.family()
    }

    pub fn mu(&self, i: usize) -> f64 {
        assert!(i < self.m);
        self.stats.mu[i].value()
    }

    pub fn mu_vec(&self) -> Vec<f64> {
        self.stats.mu[..self.m].iter().map(Compensated::value).collect()
    }

    /// `Σ_{i,k}` (0-based); zero outside the structural pattern.
    pub fn sigma(&self, i: usize, k: usize) -> f64 {
        assert!(i < self.m && k < self.m);
        let (r, c) = if i >= k { (i, k) } else { (k, i) };
        match self.stats.cols[r].binary_search(&c) {
            Ok(p) => self.stats.gram[r][p].value() * self.stats.dt,
            Err(_) => 0.0,
        }
    }

    /// Lower row `i` as `(column, Σ_{i,column})` pairs, columns ascending.
    pub fn lower_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
        assert!(i < self.m);
        let dt = self.stats.dt;
        self.stats.cols[i].iter().copied().zip(self.stats.gram[i].iter().map(move |g| g.value() * dt))
    }

    /// `Σ` as a dense row-major `m × m` matrix.
    pub fn sigma_dense(&self) -> Vec<f64> {
        let m = self.m;
        let mut out = alloc::vec![0.0; m * m];
        for i in 0..m {
            for (c, v) in self.lower_row(i) {
                out[i * m + c] = v;
                out[c * m + i] = v;
            }
        }
        out
    }

    /// Structural nonzeros in the upper triangle of `Σ` (diagonal included).
    pub fn structural_nnz_upper(&self) -> usize {
        self.stats.cols[..self.m].iter().map(Vec::len).sum()
    }

    /// Nonzero values in the upper triangle of `Σ` (diagonal included).
    pub fn numerical_nnz_upper(&self) -> usize {
        (0..self.m).map(|i| self.lower_row(i).filter(|&(_, v)| v != 0.0).count()).sum()
    }
}

/// Per-cell moments of a path for the Schauder basis.
///
/// On each dyadic cell `[c/n, (c+1)/n)` of width `2^{1-j_max}` every Schauder
/// function is affine, `ψ_l = α_l + β_l v` in the local coordinate `v ∈ [0, 1)`.
/// The statistics are therefore determined by the occupation moments
/// `Σ 1, Σ v, Σ v²` and the increment moments `Σ Δx, Σ v Δx` of each cell, and a
/// point moves between cells in O(1) regardless of the model size.
#[derive(Clone, Debug)]
struct Cells {
    n: usize,
    /// `(0-based index, α, β)` of the Schauder functions alive on each cell,
    /// `chain_len` entries per cell, root first.
    table: Vec<(usize, f64, f64)>,
    chain_len: usize,
    count: Vec<i64>,
    v1: Vec<Compensated>,
    v2: Vec<Compensated>,
    dx0: Vec<Compensated>,
    dx1: Vec<Compensated>,
}

/// Finest level for which the cell tables are built.
const MAX_CELL_LEVEL: usize = 14;

impl Cells {
    fn new(spec: &BasisSpec) -> Option<Cells> {
        let levels = spec.j_max();
        if spec.family() != BasisFamily::Schauder || levels > MAX_CELL_LEVEL {
            return None;
        }
        let n = 1usize << (levels - 1);
        let m = spec.max_dim();
        let chain_len = levels;
        let mut table = Vec::with_capacity(n * chain_len);
        for c in 0..n {
            let (left, right) = (c as f64 / n as f64, (c + 1) as f64 / n as f64);
            let mid = 0.5 * (left + right);
            let start = table.len();
            spec.for_each_nonzero(mid, m, |i, _| {
                let a = spec.eval_basis(i + 1, left).expect("index in range");
                let b = spec.eval_basis(i + 1, right).expect("index in range");
                table.push((i, a, b - a));
            });
            assert_eq!(table.len() - start, chain_len);
        }
        let zero = alloc::vec![Compensated::default(); n];
        Some(Cells {
            n,
            table,
            chain_len,
            count: alloc::vec![0; n],
            v1: zero.clone(),
            v2: zero.clone(),
            dx0: zero.clone(),
            dx1: zero,
        })
    }

    fn clear(&mut self) {
        self.count.fill(0);
        for moments in [&mut self.v1, &mut self.v2, &mut self.dx0, &mut self.dx1] {
            moments.fill(Compensated::default());
        }
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let u = crate::basis::wrap_unit(x) * self.n as f64;
        let c = (libm::floor(u) as usize).min(self.n - 1);
        (c, u - c as f64)
    }

    fn accumulate(&mut self, values: &[f64], sign: i64) {
        let s = sign as f64;
        for w in values.windows(2) {
            let (c, v) = self.locate(w[0]);
            let dx = w[1] - w[0];
            self.count[c] += sign;
            self.v1[c].add(s * v);
            self.v2[c].add(s * v * v);
            self.dx0[c].add(s * dx);
            self.dx1[c].add(s * v * dx);
        }
    }

    /// Rebuilds `μ` and the occupation sums of `stats` from the cell moments.
    fn materialize(&self, stats: &mut SuffStats) {
        for c in stats.mu.iter_mut() {
            *c = Compensated::default();
        }
        for row in stats.gram.iter_mut() {
            for c in row.iter_mut() {
                *c = Compensated::default();
            }
        }
        for c in 0..self.n {
            if self.count[c] == 0 {
                continue;
            }
            let m0 = self.count[c] as f64;
            let (m1, m2) = (self.v1[c].value(), self.v2[c].value());
            let (n0, n1) = (self.dx0[c].value(), self.dx1[c].value());
            let chain = &self.table[c * self.chain_len..(c + 1) * self.chain_len];
            for (a, &(ia, aa, ba)) in chain.iter().enumerate() {
                stats.mu[ia].add(aa * n0 + ba * n1);
                let row = &mut stats.gram[ia];
                for (slot, &(_, ab, bb)) in row.iter_mut().zip(&chain[..=a]) {
                    slot.add(aa * ab * m0 + (aa * bb + ba * ab) * m1 + ba * bb * m2);
                }
            }
        }
    }
}

/// Statistics of a latent path that interpolates discrete observations, kept up to
/// date as individual segments between observations are replaced.
///
/// The latent path lives on the augmented grid `δ = Δ / (n_interior + 1)`. A
/// segment's contribution is always recomputed from the stored latent values,
/// which is exactly what was added for it.
#[derive(Clone, Debug)]
pub struct AugmentedStats {
    stats: SuffStats,
    cells: Option<Cells>,
    dirty: bool,
    latent: Path,
    obs_dt: f64,
    n_interior: usize,
    n_segments: usize,
    since_sync: usize,
    resync_every: usize,
}

/// Default number of segment replacements between full recomputations.
pub const DEFAULT_RESYNC_EVERY: usize = 100_000;

impl AugmentedStats {
    /// Linearly interpolates `obs` onto the augmented grid and computes the
    /// statistics of the result.
    pub fn new(spec: &BasisSpec, obs: &Path, n_interior: usize) -> Result<AugmentedStats> {
        let per = n_interior + 1;
        let n_segments = obs.len() - 1;
        let mut values = Vec::with_capacity(n_segments * per + 1);
        for w in obs.values().windows(2) {
            values.push(w[0]);
            for i in 1..per {
                values.push(w[0] + (w[1] - w[0]) * (i as f64 / per as f64));
            }
        }
        values.push(obs.last());
        let latent = Path::new(obs.t0(), obs.dt() / per as f64, values)?;
        let mut aug = AugmentedStats {
            stats: SuffStats::empty(spec, spec.max_dim(), latent.dt()),
            cells: Cells::new(spec),
            dirty: false,
            latent,
            obs_dt: obs.dt(),
            n_interior,
            n_segments,
            since_sync: 0,
            resync_every: DEFAULT_RESYNC_EVERY,
        };
        aug.resync();
        Ok(aug)
    }

    /// Current statistics of the latent path.
    pub fn stats(&mut self) -> &SuffStats {
        if self.dirty {
            if let Some(cells) = &self.cells {
                cells.materialize(&mut self.stats);
            }
            self.dirty = false;
        }
        &self.stats
    }

    pub fn latent(&self) -> &Path {
        &self.latent
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Time between observations.
    pub fn obs_dt(&self) -> f64 {
        self.obs_dt
    }

    pub fn set_resync_every(&mut self, every: usize) {
        self.resync_every = every.max(1);
    }

    fn segment_range(&self, k: usize) -> core::ops::RangeInclusive<usize> {
        let per = self.n_interior + 1;
        (k - 1) * per..=k * per
    }

    /// Latent values of segment `k ∈ 1..=n`, observations included.
    pub fn segment(&self, k: usize) -> Result<&[f64]> {
        self.check_segment(k)?;
        Ok(&self.latent.values()[self.segment_range(k)])
    }

    fn check_segment(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n_segments {
            return Err(crate::Error::OutOfRange { index: k, min: 1, max: self.n_segments });
        }
        Ok(())
    }

    /// Replaces segment `k` by `new_segment`, whose endpoints must equal the
    /// observations bounding the segment.
    pub fn replace_segment(&mut self, k: usize, new_segment: &Path) -> Result<()> {
        self.check_segment(k)?;
        let range = self.segment_range(k);
        let old = &self.latent.values()[range.clone()];
        let new = new_segment.values();
        if new.len() != old.len() {
            return Err(invalid(alloc::format!(
                "segment {k} has {} points, replacement has {}",
                old.len(),
                new.len()
            )));
        }
        if libm::fabs(new_segment.dt() - self.latent.dt()) > 1e-9 * self.latent.dt() {
            return Err(invalid("replacement segment lives on a different time grid"));
        }
        if new[0] != old[0] || new[new.len() - 1] != old[old.len() - 1] {
            return Err(invalid(alloc::format!(
                "replacement for segment {k} does not match the observations at its ends"
            )));
        }
        self.replace_unchecked(k, new);
        Ok(())
    }

    pub(crate) fn replace_unchecked(&mut self, k: usize, new: &[f64]) {
        let range = self.segment_range(k);
        let old = &self.latent.values()[range.clone()];
        match &mut self.cells {
            Some(cells) => {
                cells.accumulate(old, -1);
                cells.accumulate(new, 1);
                self.dirty = true;
            }
            None => {
                self.stats.accumulate(old, -1.0);
                self.stats.accumulate(new, 1.0);
            }
        }
        self.latent.values_mut()[range].copy_from_slice(new);
        self.since_sync += 1;
        if self.since_sync >= self.resync_every {
            self.resync();
        }
    }

    /// Recomputes the statistics from the latent path from scratch.
    pub fn resync(&mut self) {
        let spec = self.stats.spec.clone();
        match &mut self.cells {
            Some(cells) => {
                cells.clear();
                cells.accumulate(self.latent.values(), 1);
                cells.materialize(&mut self.stats);
            }
            None => self.stats = SuffStats::compute(&spec, &self.latent),
        }
        self.stats.duration = self.latent.duration();
        self.dirty = false;
        self.since_sync = 0;
    }
}
