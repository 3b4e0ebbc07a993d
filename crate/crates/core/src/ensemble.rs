//! Trajectory containers, per-trajectory random streams and weighted
//! observable estimation.
//!
//! Every trajectory carries a complex log-weight `log Ω`. Physical averages
//! are ratios `Σ Ω_k O_k / Σ Ω_k` over alive trajectories, with statistical
//! errors taken from the spread of contiguous sub-ensemble means.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Default number of sub-ensembles used for error bars.
pub const DEFAULT_SUBENSEMBLES: usize = 10;

/// Common interface of a single phase-space trajectory as seen by the
/// integrator: a flat vector of complex coordinates plus a log-weight.
pub trait PhaseSpacePoint: Clone + Send + Sync {
    fn coords(&self) -> &[C64];
    fn coords_mut(&mut self) -> &mut [C64];
    fn log_weight(&self) -> C64;
    fn set_log_weight(&mut self, log_weight: C64);
    fn is_alive(&self) -> bool;
    fn kill(&mut self);
}

/// One bosonic positive-P (or Wigner) trajectory: ket amplitudes `alpha`,
/// bra amplitudes `beta`, both of length `M`, stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    coords: Vec<C64>,
    modes: usize,
    log_weight: C64,
    alive: bool,
}

impl PhasePoint {
    pub fn new(alpha: &[C64], beta: &[C64]) -> Result<Self> {
        if alpha.is_empty() {
            return Err(invalid("phase point needs at least one mode"));
        }
        if alpha.len() != beta.len() {
            return Err(invalid(format!(
                "alpha has {} modes but beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        let mut coords = Vec::with_capacity(2 * alpha.len());
        coords.extend_from_slice(alpha);
        coords.extend_from_slice(beta);
        Ok(Self {
            coords,
            modes: alpha.len(),
            log_weight: C64::new(0.0, 0.0),
            alive: true,
        })
    }

    /// Classical (coherent-state) point with `beta = conj(alpha)`.
    pub fn coherent(alpha: &[C64]) -> Self {
        let beta: Vec<C64> = alpha.iter().map(|a| a.conj()).collect();
        Self::new(alpha, &beta).expect("coherent point needs at least one mode")
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn alpha(&self) -> &[C64] {
        &self.coords[..self.modes]
    }

    pub fn beta(&self) -> &[C64] {
        &self.coords[self.modes..]
    }

    pub fn alpha_mut(&mut self) -> &mut [C64] {
        &mut self.coords[..self.modes]
    }

    pub fn beta_mut(&mut self) -> &mut [C64] {
        &mut self.coords[self.modes..]
    }

    /// Normally ordered occupation `β_j α_j`.
    pub fn number(&self, j: usize) -> C64 {
        self.beta()[j] * self.alpha()[j]
    }
}

impl PhaseSpacePoint for PhasePoint {
    fn coords(&self) -> &[C64] {
        &self.coords
    }
    fn coords_mut(&mut self) -> &mut [C64] {
        &mut self.coords
    }
    fn log_weight(&self) -> C64 {
        self.log_weight
    }
    fn set_log_weight(&mut self, log_weight: C64) {
        self.log_weight = log_weight;
    }
    fn is_alive(&self) -> bool {
        self.alive
    }
    fn kill(&mut self) {
        self.alive = false;
    }
}

/// Spin label. The sign convention `(↑, ↓) = (−1, +1)` fixes how the
/// shared decoupling noise enters each spin's propagation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => -1.0,
            Spin::Down => 1.0,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    pub(crate) fn offset(self, sites: usize) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => sites * sites,
        }
    }
}

/// One fermionic Gaussian trajectory in the number-conserving subset: a
/// normal Green's-function matrix `n_{ij} ~ ⟨a†_i a_j⟩` per spin.
///
/// Matrices are stored row-major, spin-up block first.
#[derive(Clone, Debug, PartialEq)]
pub struct FermiPoint {
    coords: Vec<C64>,
    sites: usize,
    log_weight: C64,
    alive: bool,
}

impl FermiPoint {
    pub fn new(n_up: &DMatrix<C64>, n_down: &DMatrix<C64>) -> Result<Self> {
        let m = n_up.nrows();
        if m == 0 || !n_up.is_square() || n_down.shape() != (m, m) {
            return Err(invalid("fermi point needs two equal square matrices"));
        }
        let mut coords = Vec::with_capacity(2 * m * m);
        for mat in [n_up, n_down] {
            for i in 0..m {
                for j in 0..m {
                    coords.push(mat[(i, j)]);
                }
            }
        }
        Ok(Self {
            coords,
            sites: m,
            log_weight: C64::new(0.0, 0.0),
            alive: true,
        })
    }

    /// The infinite-temperature state: `n_up = n_down = I/2`, `Ω = 1`.
    pub fn infinite_temperature(sites: usize) -> Self {
        let half = DMatrix::from_diagonal_element(sites, sites, C64::new(0.5, 0.0));
        Self::new(&half, &half).expect("sites >= 1")
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn n(&self, spin: Spin, i: usize, j: usize) -> C64 {
        self.coords[spin.offset(self.sites) + i * self.sites + j]
    }

    pub fn n_matrix(&self, spin: Spin) -> DMatrix<C64> {
        let m = self.sites;
        let off = spin.offset(m);
        DMatrix::from_row_slice(m, m, &self.coords[off..off + m * m])
    }

    /// Real part of the log-weight; the imaginary part stays zero along
    /// the real fermionic mapping.
    pub fn log_weight_real(&self) -> f64 {
        self.log_weight.re
    }
}

impl PhaseSpacePoint for FermiPoint {
    fn coords(&self) -> &[C64] {
        &self.coords
    }
    fn coords_mut(&mut self) -> &mut [C64] {
        &mut self.coords
    }
    fn log_weight(&self) -> C64 {
        self.log_weight
    }
    fn set_log_weight(&mut self, log_weight: C64) {
        self.log_weight = log_weight;
    }
    fn is_alive(&self) -> bool {
        self.alive
    }
    fn kill(&mut self) {
        self.alive = false;
    }
}

/// Private random stream of trajectory `index` under `master_seed`.
///
/// ChaCha is counter based: the seed fixes the key and the trajectory index
/// selects the stream, so streams never overlap and need no coordination.
pub fn trajectory_stream(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

/// Weighted estimate of one observable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableEstimate {
    pub mean: C64,
    /// Combined standard error `sqrt(se_re² + se_im²)`.
    pub std_error: f64,
    pub std_error_re: f64,
    pub std_error_im: f64,
    pub n_subensembles: usize,
    pub n_alive: usize,
    /// Cleared when a ratio estimate's denominator is consistent with zero.
    pub reliable: bool,
}

impl ObservableEstimate {
    /// An estimate with no statistical error (deterministic or exact value).
    pub fn exact(value: C64) -> Self {
        Self {
            mean: value,
            std_error: 0.0,
            std_error_re: 0.0,
            std_error_im: 0.0,
            n_subensembles: 0,
            n_alive: 0,
            reliable: true,
        }
    }

    /// `true` when the real part lies within `k` standard errors of `target`.
    pub fn agrees_re(&self, target: f64, k: f64) -> bool {
        (self.mean.re - target).abs() <= k * self.std_error_re
    }

    /// `true` when the complex mean lies within `k` combined standard errors.
    pub fn agrees(&self, target: C64, k: f64) -> bool {
        (self.mean - target).norm() <= k * self.std_error
    }
}

/// Ordered collection of trajectories with their random streams.
#[derive(Clone, Debug)]
pub struct Ensemble<P> {
    pub(crate) points: Vec<P>,
    pub(crate) streams: Vec<ChaCha8Rng>,
    master_seed: u64,
    pub step_index: usize,
    pub time: f64,
    /// `(trajectory, step)` for each trajectory that has been killed.
    pub deaths: Vec<(usize, usize)>,
}

impl<P: PhaseSpacePoint> Ensemble<P> {
    /// Builds `count` trajectories; `init` may draw from the trajectory's own
    /// stream (e.g. vacuum noise), which is then carried on into evolution.
    pub fn from_fn<F>(count: usize, master_seed: u64, mut init: F) -> Result<Self>
    where
        F: FnMut(usize, &mut ChaCha8Rng) -> P,
    {
        if count == 0 {
            return Err(invalid("trajectory_count must be at least 1"));
        }
        let mut streams: Vec<ChaCha8Rng> =
            (0..count).map(|k| trajectory_stream(master_seed, k)).collect();
        let points = streams
            .iter_mut()
            .enumerate()
            .map(|(k, rng)| init(k, rng))
            .collect();
        Ok(Self {
            points,
            streams,
            master_seed,
            step_index: 0,
            time: 0.0,
            deaths: Vec::new(),
        })
    }

    /// `count` copies of one deterministic initial point.
    pub fn replicate(point: P, count: usize, master_seed: u64) -> Result<Self> {
        Self::from_fn(count, master_seed, |_, _| point.clone())
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn trajectory_count(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn points_mut(&mut self) -> &mut [P] {
        &mut self.points
    }

    /// Applies `f` to every trajectory, keeping streams, clock and deaths.
    pub fn map_points<Q, F>(&self, f: F) -> Ensemble<Q>
    where
        Q: PhaseSpacePoint,
        F: Fn(&P) -> Q + Send + Sync,
    {
        Ensemble {
            points: self.points.par_iter().map(f).collect(),
            streams: self.streams.clone(),
            master_seed: self.master_seed,
            step_index: self.step_index,
            time: self.time,
            deaths: self.deaths.clone(),
        }
    }

    pub fn alive_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_alive()).count()
    }

    pub fn alive_fraction(&self) -> f64 {
        self.alive_count() as f64 / self.trajectory_count() as f64
    }

    /// `count` zero-mean Gaussian samples of the given variance from the
    /// private stream of trajectory `traj_index`.
    pub fn derive_noise(
        &mut self,
        traj_index: usize,
        count: usize,
        variance: f64,
    ) -> Result<Vec<f64>> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(invalid(format!("noise variance must be > 0, got {variance}")));
        }
        let len = self.streams.len();
        let rng = self
            .streams
            .get_mut(traj_index)
            .ok_or(Error::Index { index: traj_index, len })?;
        let sd = variance.sqrt();
        Ok((0..count)
            .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, rng))
            .collect())
    }

    /// Weighted mean `Σ w_k O_k / Σ w_k` over alive trajectories.
    pub fn weighted_mean<F>(&self, observable: F, n_sub: usize) -> Result<ObservableEstimate>
    where
        F: Fn(&P) -> C64 + Sync,
    {
        self.weighted_functional(&[&observable], |m| m[0], n_sub)
    }

    /// Estimates a nonlinear function of several weighted means.
    ///
    /// `combine` is applied to the full-ensemble means to give the reported
    /// value and to each sub-ensemble's means to give the error bar.
    pub fn weighted_functional<C>(
        &self,
        observables: &[&(dyn Fn(&P) -> C64 + Sync)],
        combine: C,
        n_sub: usize,
    ) -> Result<ObservableEstimate>
    where
        C: Fn(&[C64]) -> C64,
    {
        let blocks = self.block_means(observables, n_sub)?;
        let full = combine(&blocks.full);
        let per_block: Vec<C64> = blocks.per_block.iter().map(|m| combine(m)).collect();
        let (se_re, se_im) = standard_errors(&per_block);
        Ok(ObservableEstimate {
            mean: full,
            std_error: se_re.hypot(se_im),
            std_error_re: se_re,
            std_error_im: se_im,
            n_subensembles: n_sub,
            n_alive: blocks.n_alive,
            reliable: true,
        })
    }

    /// Ratio `⟨num⟩ / ⟨den⟩` with sub-ensemble errors; flagged unreliable
    /// when the denominator is within 3 standard errors of zero.
    pub fn weighted_ratio(
        &self,
        numerator: &(dyn Fn(&P) -> C64 + Sync),
        denominator: &(dyn Fn(&P) -> C64 + Sync),
        n_sub: usize,
    ) -> Result<ObservableEstimate> {
        let mut est = self.weighted_functional(&[numerator, denominator], |m| m[0] / m[1], n_sub)?;
        let den = self.weighted_functional(&[denominator], |m| m[0], n_sub)?;
        est.reliable = den.mean.norm() > 3.0 * den.std_error && est.mean.is_finite();
        Ok(est)
    }

    fn block_means(
        &self,
        observables: &[&(dyn Fn(&P) -> C64 + Sync)],
        n_sub: usize,
    ) -> Result<BlockMeans> {
        let n = self.trajectory_count();
        if n_sub < 2 {
            return Err(invalid(format!("n_sub must be at least 2, got {n_sub}")));
        }
        if n_sub > n {
            return Err(invalid(format!(
                "n_sub = {n_sub} exceeds trajectory count {n}"
            )));
        }
        let n_obs = observables.len();
        // Evaluate in parallel, reduce sequentially in index order.
        let values: Vec<Option<(C64, Vec<C64>)>> = self
            .points
            .par_iter()
            .map(|p| {
                p.is_alive()
                    .then(|| (p.log_weight(), observables.iter().map(|f| f(p)).collect()))
            })
            .collect();
        let n_alive = values.iter().filter(|v| v.is_some()).count();
        if n_alive == 0 {
            return Err(Error::Estimation("no alive trajectories".into()));
        }

        struct Block {
            shift: f64,
            w: C64,
            wo: Vec<C64>,
        }
        let mut blocks = Vec::with_capacity(n_sub);
        for b in 0..n_sub {
            let range = block_range(n, n_sub, b);
            let slice = &values[range];
            let shift = slice
                .iter()
                .flatten()
                .map(|(lw, _)| lw.re)
                .fold(f64::NEG_INFINITY, f64::max);
            if shift == f64::NEG_INFINITY {
                return Err(Error::Estimation(format!(
                    "sub-ensemble {b} has no alive trajectories"
                )));
            }
            let mut w_sum = C64::new(0.0, 0.0);
            let mut wo = vec![C64::new(0.0, 0.0); n_obs];
            for (lw, obs) in slice.iter().flatten() {
                let w = (lw - shift).exp();
                w_sum += w;
                for (acc, o) in wo.iter_mut().zip(obs) {
                    *acc += w * o;
                }
            }
            blocks.push(Block { shift, w: w_sum, wo });
        }

        let global = blocks.iter().map(|b| b.shift).fold(f64::NEG_INFINITY, f64::max);
        let mut w_all = C64::new(0.0, 0.0);
        let mut wo_all = vec![C64::new(0.0, 0.0); n_obs];
        for b in &blocks {
            let scale = (b.shift - global).exp();
            w_all += b.w * scale;
            for (acc, o) in wo_all.iter_mut().zip(&b.wo) {
                *acc += o * scale;
            }
        }
        let full = wo_all.iter().map(|o| o / w_all).collect();
        let per_block = blocks
            .iter()
            .map(|b| b.wo.iter().map(|o| o / b.w).collect())
            .collect();
        Ok(BlockMeans {
            full,
            per_block,
            n_alive,
        })
    }
}

impl Ensemble<PhasePoint> {
    pub fn modes(&self) -> usize {
        self.points[0].modes()
    }

    /// `⟨â†_i â_j⟩ = ⟨β_i α_j⟩_P`.
    pub fn quadratic_moment(&self, i: usize, j: usize, n_sub: usize) -> Result<ObservableEstimate> {
        let m = self.modes();
        for idx in [i, j] {
            if idx >= m {
                return Err(Error::Index { index: idx, len: m });
            }
        }
        self.weighted_mean(|p| p.beta()[i] * p.alpha()[j], n_sub)
    }
}

/// Which spin sector a fermionic moment refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinSelection {
    Only(Spin),
    Sum,
}

impl Ensemble<FermiPoint> {
    pub fn sites(&self) -> usize {
        self.points[0].sites()
    }

    /// `⟨â†_{iσ} â_{jσ}⟩ = ⟨n_{ij,σ}⟩_P`, per spin or summed over spins.
    pub fn quadratic_moment(
        &self,
        i: usize,
        j: usize,
        spin: SpinSelection,
        n_sub: usize,
    ) -> Result<ObservableEstimate> {
        let m = self.sites();
        for idx in [i, j] {
            if idx >= m {
                return Err(Error::Index { index: idx, len: m });
            }
        }
        self.weighted_mean(
            |p| match spin {
                SpinSelection::Only(s) => p.n(s, i, j),
                SpinSelection::Sum => p.n(Spin::Up, i, j) + p.n(Spin::Down, i, j),
            },
            n_sub,
        )
    }
}

struct BlockMeans {
    full: Vec<C64>,
    per_block: Vec<Vec<C64>>,
    n_alive: usize,
}

/// Index range of contiguous block `b` when `n` items are split into
/// `n_sub` blocks whose sizes differ by at most one.
pub fn block_range(n: usize, n_sub: usize, b: usize) -> std::ops::Range<usize> {
    let base = n / n_sub;
    let extra = n % n_sub;
    let start = b * base + b.min(extra);
    let len = base + usize::from(b < extra);
    start..start + len
}

/// Standard errors of the mean of the real and imaginary parts.
fn standard_errors(values: &[C64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<C64>() / k;
    let (mut vr, mut vi) = (0.0, 0.0);
    for v in values {
        let d = v - mean;
        vr += d.re * d.re;
        vi += d.im * d.im;
    }
    let denom = (k - 1.0) * k;
    ((vr / denom).sqrt(), (vi / denom).sqrt())
}
