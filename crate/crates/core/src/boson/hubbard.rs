//! Multimode positive-P mapping of the Bose-Hubbard Hamiltonian.
//!
//! ```text
//! dα_j = −i(Σ_k ω_jk α_k + 2χ β_j α_j α_j) dt + √(−2iχ) α_j dW_j
//! dβ_j = +i(Σ_k ω_kj β_k + 2χ α_j β_j β_j) dt + √(+2iχ) β_j dW̃_j
//! ```
//!
//! Coordinates are laid out as `[α_0 .. α_{M−1}, β_0 .. β_{M−1}]`, noises as
//! `[dW_0 .. dW_{M−1}, dW̃_0 .. dW̃_{M−1}]`.

use crate::boson::kerr::real_part_gauge;
use crate::boson::BoseLatticeModel;
use crate::ensemble::{Ensemble, PhasePoint, C64};
use crate::error::{invalid, Result};
use crate::sde::SdeProblem;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoseGauge {
    #[default]
    None,
    /// Per-site drift gauge; together with the engine's `−B g` term it
    /// replaces `β_jα_j` by `Re[β_jα_j]` in the nonlinear drift.
    RealPart,
}

#[derive(Clone, Debug)]
pub struct BoseHubbardPositiveP {
    modes: usize,
    omega: Vec<C64>,
    chi: f64,
    noise_a: C64,
    noise_b: C64,
    gauge: BoseGauge,
}

impl BoseHubbardPositiveP {
    pub fn new(model: &BoseLatticeModel) -> Self {
        let chi = model.chi();
        Self {
            modes: model.modes(),
            omega: model.omega_row_major(),
            chi,
            noise_a: (-2.0 * I * chi).sqrt(),
            noise_b: (2.0 * I * chi).sqrt(),
            gauge: BoseGauge::None,
        }
    }

    pub fn with_gauge(mut self, gauge: BoseGauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Coherent-state ensemble `β = α*` with every trajectory identical.
    pub fn coherent_ensemble(
        &self,
        alpha: &[C64],
        count: usize,
        seed: u64,
    ) -> Result<Ensemble<PhasePoint>> {
        if alpha.len() != self.modes {
            return Err(invalid(format!(
                "initial amplitudes have {} modes, model has {}",
                alpha.len(),
                self.modes
            )));
        }
        Ensemble::replicate(PhasePoint::coherent(alpha), count, seed)
    }
}

/// Positive-P problem for `model` with zero gauge.
pub fn bose_hubbard_positive_p(model: &BoseLatticeModel) -> BoseHubbardPositiveP {
    BoseHubbardPositiveP::new(model)
}

impl SdeProblem for BoseHubbardPositiveP {
    fn dimension(&self) -> usize {
        2 * self.modes
    }

    fn noise_count(&self) -> usize {
        2 * self.modes
    }

    fn drift(&self, s: &[C64], out: &mut [C64]) {
        let m = self.modes;
        let (alpha, beta) = s.split_at(m);
        let (da, db) = out.split_at_mut(m);
        for j in 0..m {
            let mut lin_a = C64::new(0.0, 0.0);
            let mut lin_b = C64::new(0.0, 0.0);
            for k in 0..m {
                lin_a += self.omega[j * m + k] * alpha[k];
                lin_b += self.omega[k * m + j] * beta[k];
            }
            let n = beta[j] * alpha[j];
            da[j] = -I * (lin_a + 2.0 * self.chi * n * alpha[j]);
            db[j] = I * (lin_b + 2.0 * self.chi * n * beta[j]);
        }
    }

    fn diffusion(&self, s: &[C64], v: &[C64], out: &mut [C64]) {
        let m = self.modes;
        for j in 0..m {
            out[j] = self.noise_a * s[j] * v[j];
            out[m + j] = self.noise_b * s[m + j] * v[m + j];
        }
    }

    fn gauge(&self, s: &[C64], out: &mut [C64]) -> bool {
        match self.gauge {
            BoseGauge::None => false,
            BoseGauge::RealPart => {
                let m = self.modes;
                for j in 0..m {
                    let [g1, g2] = real_part_gauge(self.chi, s[m + j] * s[j]);
                    out[j] = g1;
                    out[m + j] = g2;
                }
                true
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boson::kerr::{KerrGauge, KerrProblem};

    #[test]
    fn single_site_matches_kerr_drift() {
        let model = BoseLatticeModel::single_mode(0.7, 0.5);
        let bh = BoseHubbardPositiveP::new(&model);
        let kerr = KerrProblem::new(0.7, 4.0, KerrGauge::None).unwrap();
        let s = [C64::new(1.1, -0.3), C64::new(0.9, 0.4)];
        let (mut a, mut b) = ([C64::new(0.0, 0.0); 2], [C64::new(0.0, 0.0); 2]);
        let close = |a: &[C64; 2], b: &[C64; 2]| a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-14);
        bh.drift(&s, &mut a);
        kerr.drift(&s, &mut b);
        assert!(close(&a, &b));
        let v = [C64::new(0.3, 0.0), C64::new(-1.2, 0.0)];
        bh.diffusion(&s, &v, &mut a);
        kerr.diffusion(&s, &v, &mut b);
        assert!(close(&a, &b));
    }
}
