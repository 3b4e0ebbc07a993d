//! Truncated Wigner mapping of the Bose-Hubbard Hamiltonian.
//!
//! Third-order derivative terms of the Wigner evolution are dropped, which
//! leaves the deterministic Gross-Pitaevskii-type equation
//!
//! ```text
//! dψ_j/dt = −i (Σ_k ω_jk ψ_k + 2χ (|ψ_j|² − 1) ψ_j)
//! ```
//!
//! Quantum fluctuations enter only through the initial vacuum noise, so the
//! results are approximate. Averages are symmetrically ordered; see
//! [`crate::boson::observables`] for the conversion to normal order.
//!
//! Fields are stored as the pair `(ψ, ψ*)` in a [`PhasePoint`] so that the
//! same estimators serve both representations; the second half is evolved as
//! the exact conjugate of the first.

use rand_distr::{Distribution, StandardNormal};

use crate::boson::BoseLatticeModel;
use crate::ensemble::{Ensemble, PhasePoint, C64};
use crate::error::Result;
use crate::sde::SdeProblem;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug)]
pub struct BoseHubbardWigner {
    modes: usize,
    omega: Vec<C64>,
    chi: f64,
}

impl BoseHubbardWigner {
    pub fn new(model: &BoseLatticeModel) -> Self {
        Self {
            modes: model.modes(),
            omega: model.omega_row_major(),
            chi: model.chi(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }
}

/// Wigner problem for `model`.
pub fn bose_hubbard_wigner(model: &BoseLatticeModel) -> BoseHubbardWigner {
    BoseHubbardWigner::new(model)
}

impl SdeProblem for BoseHubbardWigner {
    fn dimension(&self) -> usize {
        2 * self.modes
    }

    fn noise_count(&self) -> usize {
        0
    }

    fn drift(&self, s: &[C64], out: &mut [C64]) {
        let m = self.modes;
        let psi = &s[..m];
        for j in 0..m {
            let mut lin = C64::new(0.0, 0.0);
            for k in 0..m {
                lin += self.omega[j * m + k] * psi[k];
            }
            let d = -I * (lin + 2.0 * self.chi * (psi[j].norm_sqr() - 1.0) * psi[j]);
            out[j] = d;
            out[m + j] = d.conj();
        }
    }

    fn diffusion(&self, _s: &[C64], _v: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
    }
}

/// Coherent mean field plus independent complex vacuum noise with
/// `⟨|η_j|²⟩ = ½` per mode, drawn from each trajectory's own stream.
pub fn wigner_initial_ensemble(
    mean_field: &[C64],
    count: usize,
    seed: u64,
) -> Result<Ensemble<PhasePoint>> {
    Ensemble::from_fn(count, seed, |_, rng| {
        let psi: Vec<C64> = mean_field
            .iter()
            .map(|a| {
                let x: f64 = StandardNormal.sample(rng);
                let y: f64 = StandardNormal.sample(rng);
                a + C64::new(0.5 * x, 0.5 * y)
            })
            .collect();
        PhasePoint::coherent(&psi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boson::observables::{number, Representation};
    use crate::sde::{evolve, EngineConfig, StepSchedule};
    use crate::series::Axis;

    #[test]
    fn conjugate_pair_is_preserved_exactly() {
        let model = BoseLatticeModel::dimer(1.0, 0.3);
        let w = BoseHubbardWigner::new(&model);
        let mut e = wigner_initial_ensemble(&[C64::new(2.0, 0.0), C64::new(0.0, 0.0)], 20, 1).unwrap();
        let sched = StepSchedule::new(0.01, 50, 50).unwrap();
        evolve(&mut e, &w, &sched, &EngineConfig::default(), Axis::Time, |_| Ok(vec![])).unwrap();
        for p in e.points() {
            for (a, b) in p.alpha().iter().zip(p.beta()) {
                assert_eq!(*b, a.conj());
            }
        }
    }

    #[test]
    fn linear_dynamics_conserves_number() {
        let model = BoseLatticeModel::dimer(1.0, 0.0);
        let w = BoseHubbardWigner::new(&model);
        let mut e = wigner_initial_ensemble(&[C64::new(2.0, 0.0), C64::new(0.0, 0.0)], 4000, 9).unwrap();
        let sched = StepSchedule::new(0.01, 100, 100).unwrap();
        evolve(&mut e, &w, &sched, &EngineConfig::default(), Axis::Time, |_| Ok(vec![])).unwrap();
        let total = e
            .weighted_mean(|p| p.alpha().iter().map(|a| a.norm_sqr()).sum::<f64>().into(), 10)
            .unwrap();
        // Symmetric order: subtract ½ per mode.
        assert!(total.agrees_re(4.0 + 1.0, 3.0), "{total:?}");
        let n1 = number(&e, 1, Representation::Wigner, 10).unwrap();
        let want = 4.0 * 1f64.sin().powi(2);
        assert!(n1.agrees_re(want, 3.0), "{n1:?} vs {want}");
    }

    #[test]
    fn vacuum_has_zero_corrected_number() {
        let e = wigner_initial_ensemble(&[C64::new(0.0, 0.0)], 20000, 5).unwrap();
        let n = number(&e, 0, Representation::Wigner, 10).unwrap();
        assert!(n.agrees_re(0.0, 3.0), "{n:?}");
    }
}
