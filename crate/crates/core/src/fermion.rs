//! Imaginary-time Gaussian phase-space sampling of the repulsive
//! Fermi-Hubbard model in the grand-canonical ensemble.
//!
//! ```text
//! H = −Σ_ij,σ t_ij c†_iσ c_jσ + U Σ_j n_j↓ n_j↑
//! ```
//!
//! Each trajectory carries a normal Green's-function matrix `n_σ` per spin
//! and a real log-weight. With `T_σ⁽ʳ⁾ = t − diag(U n_jj,−σ − μ + σ ξ_j⁽ʳ⁾)`
//! and `⟨ξ_j⁽ʳ⁾ ξ_j'⁽ʳ'⁾⟩ = 2U δ δ δ(τ − τ')` the Itô equations read
//!
//! ```text
//! dn_σ/dτ = ½ {(I − n_σ) T_σ⁽¹⁾ n_σ + n_σ T_σ⁽²⁾ (I − n_σ)}
//! dlnΩ/dτ = −[H(n) − μ N(n)]
//! ```
//!
//! Spins use `σ = (↑, ↓) = (−1, +1)`; the `2M` noises are shared by both
//! spins. Every quantity stays real, so weights stay positive.

use std::cell::RefCell;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::ensemble::{Ensemble, FermiPoint, ObservableEstimate, PhaseSpacePoint, Spin, C64};
use crate::error::{invalid, Error, Result};
use crate::sde::{evolve, EngineConfig, EvolveReport, SdeProblem, StepSchedule};
use crate::series::{Axis, Observation};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Geometry used to build a hopping matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    Chain { sites: usize, periodic: bool },
    Rectangle { rows: usize, cols: usize, periodic: bool },
    /// Hopping matrix supplied directly.
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FermiHubbardModel {
    t_hop: DMatrix<f64>,
    u: f64,
    mu: f64,
    lattice: Lattice,
}

impl FermiHubbardModel {
    /// `t_hop` must be symmetric with zero diagonal and `u > 0`.
    pub fn new(t_hop: DMatrix<f64>, u: f64, mu: f64) -> Result<Self> {
        Self::with_lattice(t_hop, u, mu, Lattice::Custom)
    }

    fn with_lattice(t_hop: DMatrix<f64>, u: f64, mu: f64, lattice: Lattice) -> Result<Self> {
        let m = t_hop.nrows();
        if m == 0 || !t_hop.is_square() {
            return Err(invalid("t_hop must be a non-empty square matrix"));
        }
        for i in 0..m {
            if t_hop[(i, i)] != 0.0 {
                return Err(invalid(format!("t_hop diagonal must be zero (site {i})")));
            }
            for j in 0..m {
                if !t_hop[(i, j)].is_finite() || t_hop[(i, j)] != t_hop[(j, i)] {
                    return Err(invalid(format!("t_hop must be symmetric and finite at ({i}, {j})")));
                }
            }
        }
        if !(u > 0.0) || !u.is_finite() {
            return Err(invalid(format!("U must be positive, got {u}")));
        }
        if !mu.is_finite() {
            return Err(invalid("mu must be finite"));
        }
        Ok(Self { t_hop, u, mu, lattice })
    }

    /// Nearest-neighbour chain with hopping `t`.
    pub fn chain(sites: usize, t: f64, u: f64, mu: f64, periodic: bool) -> Result<Self> {
        if sites == 0 {
            return Err(invalid("chain needs at least one site"));
        }
        let mut hop = DMatrix::zeros(sites, sites);
        for j in 0..sites.saturating_sub(1) {
            hop[(j, j + 1)] = t;
            hop[(j + 1, j)] = t;
        }
        if periodic && sites > 2 {
            hop[(0, sites - 1)] = t;
            hop[(sites - 1, 0)] = t;
        }
        Self::with_lattice(hop, u, mu, Lattice::Chain { sites, periodic })
    }

    /// `rows × cols` square lattice, site index `r * cols + c`. Periodic
    /// wrapping never doubles a bond on short sides.
    pub fn rectangle(rows: usize, cols: usize, t: f64, u: f64, mu: f64, periodic: bool) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("rectangle needs positive side lengths"));
        }
        let m = rows * cols;
        let mut hop = DMatrix::zeros(m, m);
        let idx = |r: usize, c: usize| r * cols + c;
        for r in 0..rows {
            for c in 0..cols {
                let here = idx(r, c);
                let right = if c + 1 < cols {
                    Some(idx(r, c + 1))
                } else if periodic && cols > 2 {
                    Some(idx(r, 0))
                } else {
                    None
                };
                let down = if r + 1 < rows {
                    Some(idx(r + 1, c))
                } else if periodic && rows > 2 {
                    Some(idx(0, c))
                } else {
                    None
                };
                for other in [right, down].into_iter().flatten() {
                    hop[(here, other)] = t;
                    hop[(other, here)] = t;
                }
            }
        }
        Self::with_lattice(hop, u, mu, Lattice::Rectangle { rows, cols, periodic })
    }

    pub fn sites(&self) -> usize {
        self.t_hop.nrows()
    }

    pub fn t_hop(&self) -> &DMatrix<f64> {
        &self.t_hop
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Same lattice and `U` at a different chemical potential.
    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..self.clone() }
    }
}

/// Inverse-temperature grid `0, d_tau, …, tau_max`, recorded every
/// `record_every`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalSchedule {
    pub tau_max: f64,
    pub d_tau: f64,
    pub record_every: f64,
}

impl ThermalSchedule {
    pub fn new(tau_max: f64, d_tau: f64, record_every: f64) -> Result<Self> {
        let s = Self { tau_max, d_tau, record_every };
        s.to_steps()?;
        Ok(s)
    }

    pub fn to_steps(&self) -> Result<StepSchedule> {
        if !(self.d_tau > 0.0) || !(self.d_tau <= self.tau_max) {
            return Err(invalid(format!(
                "need 0 < d_tau <= tau_max, got d_tau = {}, tau_max = {}",
                self.d_tau, self.tau_max
            )));
        }
        StepSchedule::over_span(self.d_tau, self.tau_max, self.record_every)
    }
}

/// Arithmetic shared by the real fast path and the general complex path.
trait Scalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self>
{
    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for C64 {
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
}

fn is_real(z: &[C64]) -> bool {
    z.iter().all(|c| c.im == 0.0)
}

fn copy_real(z: &[C64], out: &mut [f64]) {
    for (o, c) in out.iter_mut().zip(z) {
        *o = c.re;
    }
}

thread_local! {
    static REAL_BUFFER: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// Runs `f(input, work, output)` on per-thread real buffers of lengths
/// `n`, `work` and `n`.
fn with_real_buffers<R>(n: usize, work: usize, f: impl FnOnce(&mut [f64], &mut [f64], &mut [f64]) -> R) -> R {
    REAL_BUFFER.with(|cell| {
        let mut buf = cell.borrow_mut();
        if buf.len() < 2 * n + work {
            buf.resize(2 * n + work, 0.0);
        }
        let (input, rest) = buf.split_at_mut(n);
        let (w, rest) = rest.split_at_mut(work);
        f(input, w, &mut rest[..n])
    })
}

fn write_real(x: &[f64], out: &mut [C64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o = C64::new(*v, 0.0);
    }
}

/// The fermionic phase-space SDE over [`FermiPoint`] coordinates.
#[derive(Clone, Debug)]
pub struct FermiHubbardProblem {
    m: usize,
    t: Vec<f64>,
    /// Non-zero hoppings `(k, t_ik)` per row `i`.
    neighbors: Vec<Vec<(usize, f64)>>,
    u: f64,
    mu: f64,
    noise_scale: f64,
}

pub fn fermi_hubbard_problem(model: &FermiHubbardModel) -> FermiHubbardProblem {
    let m = model.sites();
    let t: Vec<f64> = (0..m * m).map(|k| model.t_hop[(k / m, k % m)]).collect();
    let neighbors = (0..m)
        .map(|i| (0..m).filter(|&k| t[i * m + k] != 0.0).map(|k| (k, t[i * m + k])).collect())
        .collect();
    FermiHubbardProblem {
        m,
        t,
        neighbors,
        u: model.u,
        mu: model.mu,
        noise_scale: (2.0 * model.u).sqrt(),
    }
}

impl FermiHubbardProblem {
    pub fn sites(&self) -> usize {
        self.m
    }

    /// `out = ½{(I − n)(h + D₁)n + n(h + D₂)(I − n)}` with `h` the hopping
    /// matrix when `with_hop`, and diagonal matrices `D₁`, `D₂`.
    #[allow(clippy::too_many_arguments)]
    fn sandwich<T: Scalar>(
        &self,
        n: &[T],
        with_hop: bool,
        d1: &[T],
        d2: &[T],
        work: &mut [T],
        out: &mut [T],
    ) {
        let m = self.m;
        // P = (h + D₁) n and Q = n (h + D₂), built row by row.
        let (p, q) = work[..2 * m * m].split_at_mut(m * m);
        for i in 0..m {
            let n_i = &n[i * m..(i + 1) * m];
            let p_i = &mut p[i * m..(i + 1) * m];
            for (pv, nv) in p_i.iter_mut().zip(n_i) {
                *pv = d1[i] * *nv;
            }
            if with_hop {
                for &(k, t) in &self.neighbors[i] {
                    for (pv, nv) in p_i.iter_mut().zip(&n[k * m..(k + 1) * m]) {
                        *pv = *pv + *nv * t;
                    }
                }
            }
            let q_i = &mut q[i * m..(i + 1) * m];
            for ((qv, nv), dv) in q_i.iter_mut().zip(n_i).zip(d2) {
                *qv = *nv * *dv;
            }
            if with_hop {
                for (j, qv) in q_i.iter_mut().enumerate() {
                    for &(k, t) in &self.neighbors[j] {
                        *qv = *qv + n_i[k] * t;
                    }
                }
            }
        }
        // ½[(I − n) P + Q (I − n)] = ½[P + Q − n P − Q n].
        for i in 0..m {
            let o_i = &mut out[i * m..(i + 1) * m];
            for ((ov, pv), qv) in o_i.iter_mut().zip(&p[i * m..(i + 1) * m]).zip(&q[i * m..(i + 1) * m]) {
                *ov = *pv + *qv;
            }
            for k in 0..m {
                let a = n[i * m + k];
                let b = q[i * m + k];
                for ((ov, pv), nv) in o_i.iter_mut().zip(&p[k * m..(k + 1) * m]).zip(&n[k * m..(k + 1) * m]) {
                    *ov = *ov - (a * *pv + b * *nv);
                }
            }
            for ov in o_i.iter_mut() {
                *ov = *ov * 0.5;
            }
        }
    }

    /// Scratch length needed by the generic kernels.
    fn work_len(&self) -> usize {
        2 * self.m * self.m + 2 * self.m
    }

    fn drift_generic<T: Scalar>(&self, s: &[T], work: &mut [T], out: &mut [T]) {
        let m = self.m;
        let mm = m * m;
        let (d, work) = work.split_at_mut(2 * m);
        let d = &mut d[..m];
        for spin in Spin::BOTH {
            let own = spin.offset(m);
            let other = spin.flipped().offset(m);
            for j in 0..m {
                d[j] = T::from_real(self.mu) - s[other + j * m + j] * self.u;
            }
            self.sandwich(&s[own..own + mm], true, d, d, work, &mut out[own..own + mm]);
        }
    }

    fn diffusion_generic<T: Scalar>(&self, s: &[T], v: &[T], work: &mut [T], out: &mut [T]) {
        let m = self.m;
        let mm = m * m;
        let (d, work) = work.split_at_mut(2 * m);
        let (d1, d2) = d.split_at_mut(m);
        for spin in Spin::BOTH {
            let own = spin.offset(m);
            let c = -spin.sign() * self.noise_scale;
            for j in 0..m {
                d1[j] = v[j] * c;
                d2[j] = v[m + j] * c;
            }
            self.sandwich(&s[own..own + mm], false, d1, d2, work, &mut out[own..own + mm]);
        }
    }

    /// `H(n) − μN(n)` on one phase-space point.
    pub fn grand_energy(&self, s: &[C64]) -> C64 {
        let m = self.m;
        let (up, down) = s.split_at(m * m);
        let mut e = ZERO;
        for nm in [up, down] {
            for (tij, nij) in self.t.iter().zip(nm) {
                e -= tij * nij;
            }
        }
        for j in 0..m {
            let (a, b) = (up[j * m + j], down[j * m + j]);
            e += self.u * a * b - self.mu * (a + b);
        }
        e
    }
}

impl SdeProblem for FermiHubbardProblem {
    fn dimension(&self) -> usize {
        2 * self.m * self.m
    }

    fn noise_count(&self) -> usize {
        2 * self.m
    }

    fn drift(&self, s: &[C64], out: &mut [C64]) {
        if is_real(s) {
            with_real_buffers(s.len(), self.work_len(), |re, work, o| {
                copy_real(s, re);
                self.drift_generic(re, work, o);
                write_real(o, out);
            });
        } else {
            let mut work = vec![ZERO; self.work_len()];
            self.drift_generic(s, &mut work, out);
        }
    }

    fn diffusion(&self, s: &[C64], v: &[C64], out: &mut [C64]) {
        if is_real(s) && is_real(v) {
            with_real_buffers(s.len() + v.len(), self.work_len(), |re, work, o| {
                copy_real(s, &mut re[..s.len()]);
                copy_real(v, &mut re[s.len()..]);
                let (sr, vr) = re.split_at(s.len());
                self.diffusion_generic(sr, vr, work, &mut o[..s.len()]);
                write_real(&o[..s.len()], out);
            });
        } else {
            let mut work = vec![ZERO; self.work_len()];
            self.diffusion_generic(s, v, &mut work, out);
        }
    }

    fn weight_drift(&self, s: &[C64]) -> C64 {
        -self.grand_energy(s)
    }
}

/// All trajectories at `n_↑ = n_↓ = I/2`, `Ω = 1`.
pub fn init_infinite_temperature(
    model: &FermiHubbardModel,
    trajectory_count: usize,
    seed: u64,
) -> Result<Ensemble<FermiPoint>> {
    Ensemble::replicate(FermiPoint::infinite_temperature(model.sites()), trajectory_count, seed)
}

/// `(1/M) Σ_j ⟨n_j↓ n_j↑⟩`.
pub fn estimate_double_occupancy(ens: &Ensemble<FermiPoint>, n_sub: usize) -> Result<ObservableEstimate> {
    let m = ens.sites();
    ens.weighted_mean(
        |p| (0..m).map(|j| p.n(Spin::Down, j, j) * p.n(Spin::Up, j, j)).sum::<C64>() / m as f64,
        n_sub,
    )
}

/// `⟨H⟩ = −Σ t_ij ⟨n_ij,σ⟩ + U Σ_j ⟨n_j↓ n_j↑⟩`.
pub fn estimate_energy(
    ens: &Ensemble<FermiPoint>,
    model: &FermiHubbardModel,
    n_sub: usize,
) -> Result<ObservableEstimate> {
    check_sites(ens, model)?;
    let m = model.sites();
    let t = &model.t_hop;
    let u = model.u;
    ens.weighted_mean(
        |p| {
            let mut e = ZERO;
            for spin in Spin::BOTH {
                for i in 0..m {
                    for j in 0..m {
                        if t[(i, j)] != 0.0 {
                            e -= t[(i, j)] * p.n(spin, i, j);
                        }
                    }
                }
            }
            for j in 0..m {
                e += u * p.n(Spin::Down, j, j) * p.n(Spin::Up, j, j);
            }
            e
        },
        n_sub,
    )
}

/// Filling per site and spin, `(1/2M) Σ_j,σ ⟨n_jσ⟩`.
pub fn estimate_density(ens: &Ensemble<FermiPoint>, n_sub: usize) -> Result<ObservableEstimate> {
    let m = ens.sites();
    ens.weighted_mean(
        |p| {
            (0..m)
                .map(|j| p.n(Spin::Up, j, j) + p.n(Spin::Down, j, j))
                .sum::<C64>()
                / (2 * m) as f64
        },
        n_sub,
    )
}

/// `(1/M) Σ_j ⟨n_jσ⟩` for one spin.
pub fn estimate_spin_density(
    ens: &Ensemble<FermiPoint>,
    spin: Spin,
    n_sub: usize,
) -> Result<ObservableEstimate> {
    let m = ens.sites();
    ens.weighted_mean(|p| (0..m).map(|j| p.n(spin, j, j)).sum::<C64>() / m as f64, n_sub)
}

fn check_sites(ens: &Ensemble<FermiPoint>, model: &FermiHubbardModel) -> Result<()> {
    if ens.sites() != model.sites() {
        return Err(invalid(format!(
            "ensemble has {} sites, model has {}",
            ens.sites(),
            model.sites()
        )));
    }
    Ok(())
}

/// Largest imaginary part over all alive coordinates and log-weights,
/// relative to `max(1, |z|)`.
pub fn max_relative_imaginary(ens: &Ensemble<FermiPoint>) -> f64 {
    ens.points()
        .iter()
        .filter(|p| p.is_alive())
        .flat_map(|p| p.coords().iter().copied().chain(std::iter::once(p.log_weight())))
        .map(|z| z.im.abs() / z.norm().max(1.0))
        .fold(0.0, f64::max)
}

/// Relative imaginary drift above which a run is rejected.
pub const REALITY_TOLERANCE: f64 = 1e-8;

/// Fails with [`Error::Consistency`] when any trajectory has left the
/// real subspace.
pub fn check_reality(ens: &Ensemble<FermiPoint>) -> Result<f64> {
    let worst = max_relative_imaginary(ens);
    if worst >= REALITY_TOLERANCE {
        return Err(Error::Consistency(format!(
            "fermionic trajectories acquired relative imaginary part {worst:e}"
        )));
    }
    Ok(worst)
}

/// Outcome of [`thermal_run`].
#[derive(Clone, Debug)]
pub struct ThermalReport {
    pub evolve: EvolveReport,
    /// Largest relative imaginary component seen at any record.
    pub max_imaginary: f64,
    /// Fraction of alive trajectories with finite real log-weight at the end.
    pub positive_weight_fraction: f64,
}

/// Evolves `ens` through `schedule`, recording density, double occupancy
/// and energy against `τ` and checking reality at every record.
pub fn thermal_run(
    ens: &mut Ensemble<FermiPoint>,
    model: &FermiHubbardModel,
    schedule: &ThermalSchedule,
    config: &EngineConfig,
    n_sub: usize,
) -> Result<ThermalReport> {
    check_sites(ens, model)?;
    let steps = schedule.to_steps()?;
    let problem = fermi_hubbard_problem(model);
    let mut worst = 0.0f64;
    let report = evolve(ens, &problem, &steps, config, Axis::InverseTemperature, |e| {
        worst = worst.max(check_reality(e)?);
        Ok(vec![
            Observation::real("density", estimate_density(e, n_sub)?),
            Observation::real("double_occupancy", estimate_double_occupancy(e, n_sub)?),
            Observation::real("energy", estimate_energy(e, model, n_sub)?),
        ])
    })?;
    let alive: Vec<&FermiPoint> = ens.points().iter().filter(|p| p.is_alive()).collect();
    let positive = alive
        .iter()
        .filter(|p| p.log_weight().im == 0.0 && p.log_weight().re.is_finite())
        .count();
    Ok(ThermalReport {
        evolve: report,
        max_imaginary: worst,
        positive_weight_fraction: positive as f64 / alive.len().max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::Stepper;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn model_validation() {
        assert!(FermiHubbardModel::chain(4, 1.0, 0.0, 0.0, false).is_err());
        let mut t = DMatrix::zeros(2, 2);
        t[(0, 1)] = 1.0;
        assert!(FermiHubbardModel::new(t.clone(), 1.0, 0.0).is_err());
        t[(1, 0)] = 1.0;
        assert!(FermiHubbardModel::new(t, 1.0, 0.0).is_ok());
        let sq = FermiHubbardModel::rectangle(2, 2, 1.0, 4.0, 2.0, true).unwrap();
        let bonds: f64 = sq.t_hop().iter().sum();
        assert_eq!(bonds, 8.0);
        let ring = FermiHubbardModel::chain(4, 1.0, 2.0, 1.0, true).unwrap();
        assert_eq!(ring.t_hop().iter().sum::<f64>(), 8.0);
    }

    #[test]
    fn infinite_temperature_estimates_are_exact() {
        let model = FermiHubbardModel::chain(2, 1.0, 4.0, 0.0, false).unwrap();
        let e = init_infinite_temperature(&model, 50, 3).unwrap();
        assert_eq!(estimate_density(&e, 10).unwrap().mean, c(0.5));
        let d = estimate_double_occupancy(&e, 10).unwrap();
        assert_eq!(d.mean, c(0.25));
        assert_eq!(d.std_error, 0.0);
        assert_eq!(estimate_energy(&e, &model, 10).unwrap().mean, c(2.0));
    }

    #[test]
    fn weight_drift_is_minus_grand_energy() {
        let model = FermiHubbardModel::chain(2, 0.7, 3.0, 0.4, false).unwrap();
        let p = fermi_hubbard_problem(&model);
        let up = DMatrix::from_row_slice(2, 2, &[c(0.3), c(0.1), c(0.1), c(0.6)]);
        let down = DMatrix::from_row_slice(2, 2, &[c(0.5), c(-0.2), c(-0.2), c(0.2)]);
        let pt = FermiPoint::new(&up, &down).unwrap();
        let h = -0.7 * (0.1 + 0.1 - 0.2 - 0.2) + 3.0 * (0.3 * 0.5 + 0.6 * 0.2);
        let n = 0.3 + 0.6 + 0.5 + 0.2;
        assert!((p.weight_drift(pt.coords()) - c(-(h - 0.4 * n))).norm() < 1e-14);
    }

    #[test]
    fn free_site_relaxes_to_fermi_function() {
        // Tiny U makes the noise negligible; n follows dn/dτ = μ n (1 − n).
        let mu = 0.8;
        let model = FermiHubbardModel::chain(1, 0.0, 1e-12, mu, false).unwrap();
        let mut e = init_infinite_temperature(&model, 10, 1).unwrap();
        let sched = ThermalSchedule::new(2.0, 0.001, 1.0).unwrap();
        thermal_run(&mut e, &model, &sched, &EngineConfig::default(), 2).unwrap();
        let want = 1.0 / (1.0 + (-2.0 * mu).exp());
        let got = e.points()[0].n(Spin::Up, 0, 0).re;
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        // Ω tracks Z(τ)/4 = ((1 + e^{τμ})/2)².
        let z = ((1.0 + (2.0 * mu).exp()) / 2.0).powi(2).ln();
        assert!((e.points()[0].log_weight_real() - z).abs() < 1e-5);
    }

    #[test]
    fn trajectories_stay_real_and_spin_symmetric() {
        let model = FermiHubbardModel::chain(3, 1.0, 2.0, 0.3, false).unwrap();
        let mut e = init_infinite_temperature(&model, 400, 8).unwrap();
        let sched = ThermalSchedule::new(1.0, 0.02, 0.5).unwrap();
        let rep = thermal_run(&mut e, &model, &sched, &EngineConfig::default(), 10).unwrap();
        assert!(rep.max_imaginary < REALITY_TOLERANCE);
        assert_eq!(rep.positive_weight_fraction, 1.0);
        let up = estimate_spin_density(&e, Spin::Up, 10).unwrap();
        let down = estimate_spin_density(&e, Spin::Down, 10).unwrap();
        let combined = (up.std_error_re.powi(2) + down.std_error_re.powi(2)).sqrt();
        assert!((up.mean.re - down.mean.re).abs() < 3.0 * combined + 1e-12);
    }

    #[test]
    fn complex_input_is_flagged() {
        let model = FermiHubbardModel::chain(1, 0.0, 1.0, 0.0, false).unwrap();
        let mut e = init_infinite_temperature(&model, 2, 1).unwrap();
        e.points_mut()[0].coords_mut()[0] = C64::new(0.5, 1e-3);
        assert!(matches!(check_reality(&e), Err(Error::Consistency(_))));
    }

    #[test]
    fn euler_and_midpoint_agree_on_small_steps() {
        let model = FermiHubbardModel::chain(2, 1.0, 2.0, 1.0, false).unwrap();
        let sched = ThermalSchedule::new(0.5, 0.005, 0.5).unwrap();
        let mut a = init_infinite_temperature(&model, 20, 5).unwrap();
        let mut b = a.clone();
        thermal_run(&mut a, &model, &sched, &EngineConfig::default(), 2).unwrap();
        thermal_run(&mut b, &model, &sched, &EngineConfig::default().with_stepper(Stepper::Euler), 2).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            for (x, y) in p.coords().iter().zip(q.coords()) {
                assert!((x - y).norm() < 0.05, "{x} vs {y}");
            }
        }
    }
}
