//! Bosonic phase-space mappings of the lattice Hamiltonian
//!
//! ```text
//! H = Σ_ij ω_ij a†_i a_j + χ Σ_j a†_j a†_j a_j a_j      (ħ = 1)
//! ```
//!
//! sampled either exactly with the positive-P representation or
//! approximately with the truncated Wigner method.

use nalgebra::DMatrix;

use crate::ensemble::C64;
use crate::error::{invalid, Result};

pub mod collision;
pub mod hubbard;
pub mod kerr;
pub mod observables;
pub mod wigner;

pub use collision::{gp_ground_state, init_collision_state, momentum_ensemble, CollisionSetup};
pub use hubbard::{BoseGauge, BoseHubbardPositiveP};
pub use kerr::{KerrGauge, KerrProblem};
pub use observables::{
    estimate_g1, estimate_g2, estimate_g2_binned, mean_amplitude, number, quadrature_variance,
    Representation,
};
pub use wigner::{wigner_initial_ensemble, BoseHubbardWigner};

/// Linear coupling matrix `ω` (chemical potential on the diagonal) and the
/// on-site nonlinearity `χ` multiplying `a†a†aa`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoseLatticeModel {
    omega: DMatrix<C64>,
    chi: f64,
}

impl BoseLatticeModel {
    pub fn new(omega: DMatrix<C64>, chi: f64) -> Result<Self> {
        let m = omega.nrows();
        if m == 0 || !omega.is_square() {
            return Err(invalid("omega must be a non-empty square matrix"));
        }
        if !chi.is_finite() {
            return Err(invalid("chi must be finite"));
        }
        let scale = omega.iter().map(|x| x.norm()).fold(1.0, f64::max);
        for i in 0..m {
            for j in 0..m {
                if (omega[(i, j)] - omega[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(invalid(format!("omega is not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(Self { omega, chi })
    }

    pub fn single_mode(omega: f64, chi: f64) -> Self {
        Self::new(DMatrix::from_element(1, 1, C64::new(omega, 0.0)), chi).expect("1x1 real")
    }

    /// Two sites coupled by `J a†_0 a_1 + h.c.`.
    pub fn dimer(coupling: f64, chi: f64) -> Self {
        let j = C64::new(coupling, 0.0);
        let z = C64::new(0.0, 0.0);
        Self::new(DMatrix::from_row_slice(2, 2, &[z, j, j, z]), chi).expect("symmetric")
    }

    /// Periodic 1D lattice with kinetic energy `2J(1 − cos k)` per mode.
    pub fn ring(sites: usize, hopping: f64, chi: f64) -> Result<Self> {
        if sites < 3 {
            return Err(invalid("a ring needs at least 3 sites"));
        }
        let mut omega = DMatrix::from_element(sites, sites, C64::new(0.0, 0.0));
        for j in 0..sites {
            omega[(j, j)] = C64::new(2.0 * hopping, 0.0);
            omega[(j, (j + 1) % sites)] = C64::new(-hopping, 0.0);
            omega[((j + 1) % sites, j)] = C64::new(-hopping, 0.0);
        }
        Self::new(omega, chi)
    }

    /// Same lattice with an added on-site potential.
    pub fn with_potential(&self, potential: &[f64]) -> Result<Self> {
        if potential.len() != self.modes() {
            return Err(invalid("potential length must equal mode count"));
        }
        let mut omega = self.omega.clone();
        for (j, v) in potential.iter().enumerate() {
            omega[(j, j)] += C64::new(*v, 0.0);
        }
        Self::new(omega, self.chi)
    }

    pub fn modes(&self) -> usize {
        self.omega.nrows()
    }

    pub fn omega(&self) -> &DMatrix<C64> {
        &self.omega
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub(crate) fn omega_row_major(&self) -> Vec<C64> {
        let m = self.modes();
        (0..m * m).map(|k| self.omega[(k / m, k % m)]).collect()
    }
}
