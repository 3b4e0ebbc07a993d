//! Real-time evolution of a coherent state under the Bose-Hubbard
//! Hamiltonian in a truncated Fock basis.
//!
//! The Hamiltonian conserves total number, so the basis is split into
//! sectors `N = 0..=N_max` that are diagonalized independently.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::boson::BoseLatticeModel;
use crate::ensemble::{ObservableEstimate, C64};
use crate::error::{invalid, Error, Result};
use crate::oracle::{MAX_BLOCK, MAX_DEFICIT, MAX_DIMENSION};
use crate::series::{exact_complex, exact_real, Axis, MomentSeries};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Total-number cutoff `⌈N̄ + 8√N̄ + 10⌉` for a coherent state of mean
/// number `N̄`.
pub fn coherent_cutoff(mean_number: f64) -> usize {
    (mean_number + 8.0 * mean_number.sqrt() + 10.0).ceil() as usize
}

/// Exact moments at one time.
#[derive(Clone, Debug)]
pub struct BoseOracleRow {
    pub time: f64,
    /// `⟨â_j⟩`.
    pub amplitude: Vec<C64>,
    /// Correlation matrix `⟨â†_i â_j⟩`.
    pub correlation: DMatrix<C64>,
    /// `⟨â†_i â†_j â_j â_i⟩` (real).
    pub pair: DMatrix<f64>,
    /// Norm of the truncated state before renormalization.
    pub norm: f64,
}

impl BoseOracleRow {
    pub fn number(&self, j: usize) -> f64 {
        self.correlation[(j, j)].re
    }

    pub fn g2(&self, i: usize, j: usize) -> f64 {
        self.pair[(i, j)] / (self.number(i) * self.number(j))
    }
}

#[derive(Clone, Debug)]
pub struct BoseOracle {
    pub cutoff: usize,
    /// `1 − ‖P ψ(0)‖²` for the truncated coherent state.
    pub deficit: f64,
    pub dimension: usize,
    pub rows: Vec<BoseOracleRow>,
}

impl BoseOracle {
    /// Series with `a_j`, `n_j` and `g2_jj` columns, zero error bars.
    pub fn to_series(&self) -> MomentSeries {
        let mut s = MomentSeries::new(Axis::Time);
        for row in &self.rows {
            let m = row.amplitude.len();
            let mut obs = Vec::new();
            for j in 0..m {
                obs.push(exact_complex(format!("a_{j}"), row.amplitude[j]));
                obs.push(exact_real(format!("n_{j}"), row.number(j)));
            }
            for j in 0..m {
                obs.push(exact_real(format!("g2_{j}{j}"), row.g2(j, j)));
            }
            s.push(row.time, 0, obs);
        }
        s
    }

    pub fn estimate(value: f64) -> ObservableEstimate {
        ObservableEstimate::exact(C64::new(value, 0.0))
    }
}

struct Sector {
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn compositions(total: u32, modes: usize) -> Vec<Vec<u32>> {
    if modes == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for rest in compositions(total - first, modes - 1) {
            let mut v = Vec::with_capacity(modes);
            v.push(first);
            v.extend(rest);
            out.push(v);
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn sector_hamiltonian(model: &BoseLatticeModel, sector: &Sector) -> DMatrix<C64> {
    let m = model.modes();
    let omega = model.omega();
    let chi = model.chi();
    let dim = sector.states.len();
    let mut h = DMatrix::from_element(dim, dim, ZERO);
    for (col, s) in sector.states.iter().enumerate() {
        for j in 0..m {
            let nj = s[j] as f64;
            h[(col, col)] += omega[(j, j)] * nj + chi * nj * (nj - 1.0);
            if s[j] == 0 {
                continue;
            }
            for i in 0..m {
                if i == j || omega[(i, j)] == ZERO {
                    continue;
                }
                let mut t = s.clone();
                t[j] -= 1;
                t[i] += 1;
                let amp = (nj * t[i] as f64).sqrt();
                let row = sector.index[&t];
                h[(row, col)] += omega[(i, j)] * amp;
            }
        }
    }
    h
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn coherent_coefficient(alpha: &[C64], state: &[u32]) -> C64 {
    let mut log_mod = 0.0;
    let mut phase = 0.0;
    for (a, &n) in alpha.iter().zip(state) {
        log_mod -= 0.5 * a.norm_sqr();
        if n > 0 {
            if *a == ZERO {
                return ZERO;
            }
            log_mod += n as f64 * a.norm().ln() - 0.5 * ln_factorial(n);
            phase += n as f64 * a.arg();
        }
    }
    C64::from_polar(log_mod.exp(), phase)
}

/// Exact moments of `e^{−iHt}|α⟩` at each of `times`.
///
/// Errors with [`Error::OracleSize`] when the truncated basis or one of its
/// number sectors is too large, and with [`Error::OracleCutoff`] when the
/// coherent state is not captured to within the norm tolerance.
pub fn ed_bose_evolve(model: &BoseLatticeModel, alpha: &[C64], times: &[f64]) -> Result<BoseOracle> {
    let m = model.modes();
    if alpha.len() != m {
        return Err(invalid(format!("{} amplitudes for {m} modes", alpha.len())));
    }
    let mean_number: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    let cutoff = coherent_cutoff(mean_number);
    let dimension = binomial(cutoff + m, m);
    if dimension > MAX_DIMENSION as f64 {
        return Err(Error::OracleSize { dimension: dimension as usize, limit: MAX_DIMENSION });
    }
    let largest = binomial(cutoff + m - 1, m - 1);
    if largest > MAX_BLOCK as f64 {
        return Err(Error::OracleSize { dimension: largest as usize, limit: MAX_BLOCK });
    }

    struct Solved {
        sector: Sector,
        vectors: DMatrix<C64>,
        energies: DVector<f64>,
        /// Initial state in the eigenbasis.
        overlap: DVector<C64>,
    }
    let mut solved = Vec::with_capacity(cutoff + 1);
    let mut captured = 0.0;
    for n in 0..=cutoff as u32 {
        let states = compositions(n, m);
        let index = states.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect();
        let sector = Sector { states, index };
        let h = sector_hamiltonian(model, &sector);
        let eig = SymmetricEigen::new(h);
        let c0 = DVector::from_iterator(
            sector.states.len(),
            sector.states.iter().map(|s| coherent_coefficient(alpha, s)),
        );
        captured += c0.norm_squared();
        let overlap = eig.eigenvectors.adjoint() * &c0;
        solved.push(Solved { sector, vectors: eig.eigenvectors, energies: eig.eigenvalues, overlap });
    }
    let deficit = (1.0 - captured).max(0.0);
    if deficit > MAX_DEFICIT {
        return Err(Error::OracleCutoff { deficit });
    }

    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let psi: Vec<DVector<C64>> = solved
            .iter()
            .map(|s| {
                let phased = DVector::from_iterator(
                    s.overlap.len(),
                    s.overlap
                        .iter()
                        .zip(s.energies.iter())
                        .map(|(c, e)| c * C64::from_polar(1.0, -e * t)),
                );
                &s.vectors * phased
            })
            .collect();
        let norm: f64 = psi.iter().map(|v| v.norm_squared()).sum();
        let mut amplitude = vec![ZERO; m];
        let mut correlation = DMatrix::from_element(m, m, ZERO);
        let mut pair = DMatrix::zeros(m, m);
        for (n, s) in solved.iter().enumerate() {
            for (k, state) in s.sector.states.iter().enumerate() {
                let c = psi[n][k];
                if c == ZERO {
                    continue;
                }
                for j in 0..m {
                    if state[j] == 0 {
                        continue;
                    }
                    let nj = state[j] as f64;
                    let mut lower = state.clone();
                    lower[j] -= 1;
                    let below = &solved[n - 1];
                    amplitude[j] += psi[n - 1][below.sector.index[&lower]].conj() * nj.sqrt() * c;
                    for i in 0..m {
                        let mut raised = lower.clone();
                        raised[i] += 1;
                        let amp = (nj * raised[i] as f64).sqrt();
                        correlation[(i, j)] += psi[n][s.sector.index[&raised]].conj() * amp * c;
                    }
                }
                let p = c.norm_sqr();
                for i in 0..m {
                    let ni = state[i] as f64;
                    for j in 0..m {
                        let nj = state[j] as f64;
                        pair[(i, j)] += p * if i == j { ni * (ni - 1.0) } else { ni * nj };
                    }
                }
            }
        }
        amplitude.iter_mut().for_each(|a| *a /= norm);
        correlation /= C64::new(norm, 0.0);
        pair /= norm;
        rows.push(BoseOracleRow { time: t, amplitude, correlation, pair, norm });
    }
    Ok(BoseOracle { cutoff, deficit, dimension: dimension as usize, rows })
}
