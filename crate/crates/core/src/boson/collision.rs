//! Desk-scale condensate collision on a periodic 1D lattice.
//!
//! A trapped mean-field ground state is split into two counter-propagating
//! packets at `±k_q` plus a weak seed packet at `−k_s`; the trap is then
//! removed and the field evolves freely under the lattice Hamiltonian.
//! Wavenumbers are in radians per lattice site.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::boson::BoseLatticeModel;
use crate::ensemble::{Ensemble, PhasePoint, PhaseSpacePoint, C64};
use crate::error::{invalid, Error, Result};

/// Parameters of the initial modulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionSetup {
    /// Packet wavenumber `k_q`; packets move at `±k_q`.
    pub k_q: f64,
    /// Seed wavenumber `k_s`; the seed moves at `−k_s`.
    pub k_s: f64,
    /// Fraction of atoms in the seed; the rest is split evenly.
    pub seed_fraction: f64,
}

impl CollisionSetup {
    /// The 49% / 49% / 2% split.
    pub fn standard(k_q: f64, k_s: f64) -> Self {
        Self {
            k_q,
            k_s,
            seed_fraction: 0.02,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.seed_fraction) {
            return Err(Error::Config(format!(
                "seed_fraction must lie in [0, 1), got {}",
                self.seed_fraction
            )));
        }
        for (name, k) in [("k_q", self.k_q), ("k_s", self.k_s)] {
            if !k.is_finite() || k.abs() > PI {
                return Err(Error::Config(format!(
                    "{name} = {k} exceeds the lattice Nyquist limit π"
                )));
            }
        }
        Ok(())
    }

    /// `√f₁ e^{i k_q x} + √f₁ e^{−i k_q x} + √f_s e^{−i k_s x}`, `f₁ = (1 − f_s)/2`.
    pub fn modulation(&self, x: f64) -> C64 {
        let main = ((1.0 - self.seed_fraction) / 2.0).sqrt();
        let seed = self.seed_fraction.sqrt();
        main * C64::from_polar(1.0, self.k_q * x)
            + main * C64::from_polar(1.0, -self.k_q * x)
            + seed * C64::from_polar(1.0, -self.k_s * x)
    }
}

/// Coherent positive-P ensemble whose mean field is `gp_profile` times the
/// three-packet modulation, rescaled to keep `Σ|gp_profile|²`.
pub fn init_collision_state(
    model: &BoseLatticeModel,
    gp_profile: &[C64],
    setup: &CollisionSetup,
    count: usize,
    seed: u64,
) -> Result<Ensemble<PhasePoint>> {
    let field = collision_field(model, gp_profile, setup)?;
    Ensemble::replicate(PhasePoint::coherent(&field), count, seed)
}

/// The modulated, norm-preserving mean field used by
/// [`init_collision_state`].
pub fn collision_field(
    model: &BoseLatticeModel,
    gp_profile: &[C64],
    setup: &CollisionSetup,
) -> Result<Vec<C64>> {
    setup.validate()?;
    if gp_profile.len() != model.modes() {
        return Err(invalid(format!(
            "profile has {} sites, model has {}",
            gp_profile.len(),
            model.modes()
        )));
    }
    let norm: f64 = gp_profile.iter().map(|a| a.norm_sqr()).sum();
    let mut field: Vec<C64> = gp_profile
        .iter()
        .enumerate()
        .map(|(x, a)| a * setup.modulation(x as f64))
        .collect();
    let new_norm: f64 = field.iter().map(|a| a.norm_sqr()).sum();
    if new_norm > 0.0 {
        let scale = (norm / new_norm).sqrt();
        field.iter_mut().for_each(|a| *a *= scale);
    }
    Ok(field)
}

/// Mean-field ground state of `model + trap` with `n_atoms` particles,
/// found by normalized imaginary-time relaxation of
/// `ψ ← ψ − dτ (ω ψ + V ψ + 2χ|ψ|²ψ)`.
pub fn gp_ground_state(
    model: &BoseLatticeModel,
    trap: &[f64],
    n_atoms: f64,
    d_tau: f64,
    iterations: usize,
) -> Result<Vec<C64>> {
    let m = model.modes();
    if trap.len() != m {
        return Err(invalid("trap length must equal mode count"));
    }
    if !(n_atoms > 0.0) || !(d_tau > 0.0) {
        return Err(invalid("need n_atoms > 0 and d_tau > 0"));
    }
    let omega = model.omega_row_major();
    let chi = model.chi();
    let mut psi = vec![C64::new((n_atoms / m as f64).sqrt(), 0.0); m];
    let mut next = psi.clone();
    for _ in 0..iterations {
        for j in 0..m {
            let mut h = C64::new(trap[j], 0.0) * psi[j];
            for k in 0..m {
                h += omega[j * m + k] * psi[k];
            }
            h += 2.0 * chi * psi[j].norm_sqr() * psi[j];
            next[j] = psi[j] - d_tau * h;
        }
        let norm: f64 = next.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Consistency(
                "imaginary-time relaxation diverged; reduce d_tau".into(),
            ));
        }
        let scale = (n_atoms / norm).sqrt();
        for (p, q) in psi.iter_mut().zip(&next) {
            *p = q * scale;
        }
    }
    Ok(psi)
}

/// Lattice wavenumber of DFT bin `q` in `(−π, π]`.
pub fn wavenumber(q: usize, m: usize) -> f64 {
    let q = q as f64;
    let m_f = m as f64;
    let k = 2.0 * PI * q / m_f;
    if k > PI {
        k - 2.0 * PI
    } else {
        k
    }
}

/// DFT bin holding wavenumber `−k` for bin `q`.
pub fn opposite_bin(q: usize, m: usize) -> usize {
    (m - q) % m
}

/// Transforms every trajectory to momentum modes:
/// `α_k = M^{−½} Σ_x e^{−ikx} α_x`, `β_k = M^{−½} Σ_x e^{ikx} β_x`,
/// so that `β_k α_k` samples `â†_k â_k`. Weights are carried over.
pub fn momentum_ensemble(ens: &Ensemble<PhasePoint>) -> Ensemble<PhasePoint> {
    let m = ens.modes();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let scale = 1.0 / (m as f64).sqrt();
    ens.map_points(|p| {
        let mut a = p.alpha().to_vec();
        let mut b = p.beta().to_vec();
        fwd.process(&mut a);
        inv.process(&mut b);
        a.iter_mut().chain(b.iter_mut()).for_each(|x| *x *= scale);
        let mut q = PhasePoint::new(&a, &b).expect("same length");
        q.set_log_weight(p.log_weight());
        if !p.is_alive() {
            q.kill();
        }
        q
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_profile(m: usize, width: f64, n: f64) -> Vec<C64> {
        let c = m as f64 / 2.0;
        let raw: Vec<C64> = (0..m)
            .map(|x| C64::new((-((x as f64 - c) / width).powi(2) / 2.0).exp(), 0.0))
            .collect();
        let norm: f64 = raw.iter().map(|a| a.norm_sqr()).sum();
        raw.iter().map(|a| a * (n / norm).sqrt()).collect()
    }

    #[test]
    fn unmodulated_profile_is_unchanged() {
        let model = BoseLatticeModel::ring(32, 1.0, 0.01).unwrap();
        let gp = gaussian_profile(32, 5.0, 100.0);
        let setup = CollisionSetup {
            k_q: 0.0,
            k_s: 0.0,
            seed_fraction: 0.0,
        };
        let field = collision_field(&model, &gp, &setup).unwrap();
        for (a, b) in field.iter().zip(&gp) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn standard_split_preserves_norm() {
        let model = BoseLatticeModel::ring(64, 1.0, 0.01).unwrap();
        let gp = gaussian_profile(64, 10.0, 500.0);
        let setup = CollisionSetup::standard(PI / 2.0, 1.0);
        let field = collision_field(&model, &gp, &setup).unwrap();
        let n: f64 = field.iter().map(|a| a.norm_sqr()).sum();
        assert!((n - 500.0).abs() < 1e-9);
        // The unnormalized modulation already nearly preserves the norm.
        let raw: f64 = gp
            .iter()
            .enumerate()
            .map(|(x, a)| (a * setup.modulation(x as f64)).norm_sqr())
            .sum();
        assert!((raw / 500.0 - 1.0).abs() < 1e-2, "{raw}");
    }

    #[test]
    fn nyquist_limit_is_enforced() {
        let model = BoseLatticeModel::ring(16, 1.0, 0.0).unwrap();
        let gp = gaussian_profile(16, 3.0, 10.0);
        let bad = CollisionSetup::standard(3.5, 1.0);
        assert!(matches!(collision_field(&model, &gp, &bad), Err(Error::Config(_))));
        let bad = CollisionSetup { seed_fraction: 1.0, ..CollisionSetup::standard(1.0, 1.0) };
        assert!(collision_field(&model, &gp, &bad).is_err());
    }

    #[test]
    fn momentum_transform_preserves_number_and_locates_packets() {
        let m = 32;
        let model = BoseLatticeModel::ring(m, 1.0, 0.0).unwrap();
        let gp = vec![C64::new(1.0, 0.0); m];
        let k_bin = 4;
        let k = wavenumber(k_bin, m);
        let setup = CollisionSetup { k_q: k, k_s: 0.0, seed_fraction: 0.0 };
        let e = init_collision_state(&model, &gp, &setup, 10, 1).unwrap();
        let mom = momentum_ensemble(&e);
        let p = &mom.points()[0];
        let total: f64 = (0..m).map(|q| p.number(q).re).sum();
        assert!((total - m as f64).abs() < 1e-9);
        assert!((p.number(k_bin).re - m as f64 / 2.0).abs() < 1e-9);
        assert!((p.number(opposite_bin(k_bin, m)).re - m as f64 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn gp_ground_state_is_localized_in_trap() {
        let m = 32;
        let model = BoseLatticeModel::ring(m, 1.0, 0.01).unwrap();
        let trap: Vec<f64> = (0..m).map(|x| 0.01 * (x as f64 - 16.0).powi(2)).collect();
        let psi = gp_ground_state(&model, &trap, 100.0, 0.05, 4000).unwrap();
        let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        assert!((n - 100.0).abs() < 1e-9);
        assert!(psi[16].norm() > psi[2].norm() * 5.0);
    }
}
