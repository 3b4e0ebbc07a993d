//! Grand-canonical thermal averages of the Fermi-Hubbard model by full
//! diagonalization of the `4^M` Fock space.
//!
//! Mode `p = 2j + s` (site-major, spin-minor, `s = 0` for ↑). A Fock state
//! is the bit mask of occupied modes, with creation operators applied in
//! increasing mode order; `c†_p` therefore picks up `(−1)` per occupied
//! mode below `p`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::fermion::FermiHubbardModel;
use crate::oracle::{MAX_BLOCK, MAX_DIMENSION};
use crate::series::{exact_real, Axis, MomentSeries};

/// Exact thermal averages at one inverse temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FermiOracleRow {
    pub tau: f64,
    /// Filling per site and spin.
    pub density: f64,
    /// `(1/M) Σ_j ⟨n_j↓ n_j↑⟩`.
    pub double_occupancy: f64,
    /// `⟨H⟩`, without the `−μN` term.
    pub energy: f64,
}

/// Rows in the same column layout as a simulated thermal run.
pub fn fermi_oracle_series(rows: &[FermiOracleRow]) -> MomentSeries {
    let mut s = MomentSeries::new(Axis::InverseTemperature);
    for r in rows {
        s.push(
            r.tau,
            0,
            vec![
                exact_real("density", r.density),
                exact_real("double_occupancy", r.double_occupancy),
                exact_real("energy", r.energy),
            ],
        );
    }
    s
}

fn sign_below(state: u32, mode: usize) -> f64 {
    if (state & ((1u32 << mode) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `c†_p c_q |state⟩ = sign |out⟩`, or `None` if it vanishes.
pub(crate) fn hop(state: u32, p: usize, q: usize) -> Option<(f64, u32)> {
    if state & (1 << q) == 0 {
        return None;
    }
    let s1 = state ^ (1 << q);
    if s1 & (1 << p) != 0 {
        return None;
    }
    Some((sign_below(state, q) * sign_below(s1, p), s1 | (1 << p)))
}

fn spin_counts(state: u32, sites: usize) -> (usize, usize) {
    let mut up = 0;
    let mut down = 0;
    for j in 0..sites {
        up += ((state >> (2 * j)) & 1) as usize;
        down += ((state >> (2 * j + 1)) & 1) as usize;
    }
    (up, down)
}

fn double_count(state: u32, sites: usize) -> f64 {
    (0..sites).filter(|j| (state >> (2 * j)) & 3 == 3).count() as f64
}

/// Dense `H − μN` on one `(N↑, N↓)` block.
pub(crate) fn block_hamiltonian(
    t_hop: &DMatrix<f64>,
    u: f64,
    mu: f64,
    states: &[u32],
    position: &[u32],
) -> DMatrix<f64> {
    let m = t_hop.nrows();
    let dim = states.len();
    let mut h = DMatrix::zeros(dim, dim);
    for (col, &s) in states.iter().enumerate() {
        h[(col, col)] = u * double_count(s, m) - mu * s.count_ones() as f64;
        for i in 0..m {
            for j in 0..m {
                let t = t_hop[(i, j)];
                if t == 0.0 || i == j {
                    continue;
                }
                for spin in 0..2 {
                    if let Some((sign, out)) = hop(s, 2 * i + spin, 2 * j + spin) {
                        h[(position[out as usize] as usize, col)] -= t * sign;
                    }
                }
            }
        }
    }
    h
}

/// Thermal averages of `model` at every `τ` in `taus`.
pub fn ed_fermi_thermal(model: &FermiHubbardModel, taus: &[f64]) -> Result<Vec<FermiOracleRow>> {
    thermal_averages(model.t_hop(), model.u(), model.mu(), taus)
}

/// As [`ed_fermi_thermal`] but accepting any `U ≥ 0`, including the free
/// limit.
pub fn thermal_averages(
    t_hop: &DMatrix<f64>,
    u: f64,
    mu: f64,
    taus: &[f64],
) -> Result<Vec<FermiOracleRow>> {
    let m = t_hop.nrows();
    if m == 0 || !t_hop.is_square() {
        return Err(invalid("t_hop must be a non-empty square matrix"));
    }
    if 2 * m >= 32 || 1usize << (2 * m) > MAX_DIMENSION {
        return Err(Error::OracleSize {
            dimension: 4f64.powi(m as i32) as usize,
            limit: MAX_DIMENSION,
        });
    }
    if taus.iter().any(|t| !(*t >= 0.0)) {
        return Err(invalid("inverse temperatures must be non-negative"));
    }
    let dim = 1usize << (2 * m);
    let mut blocks: Vec<Vec<u32>> = vec![Vec::new(); (m + 1) * (m + 1)];
    let mut position = vec![0u32; dim];
    for s in 0..dim as u32 {
        let (up, down) = spin_counts(s, m);
        let b = &mut blocks[up * (m + 1) + down];
        position[s as usize] = b.len() as u32;
        b.push(s);
    }
    if let Some(big) = blocks.iter().map(Vec::len).max().filter(|&b| b > MAX_BLOCK) {
        return Err(Error::OracleSize { dimension: big, limit: MAX_BLOCK });
    }

    // (ε = E − μN, N, E, double occupancy) for every eigenstate.
    let mut levels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(dim);
    for states in blocks.iter().filter(|b| !b.is_empty()) {
        let n = states[0].count_ones() as f64;
        let h = block_hamiltonian(t_hop, u, mu, states, &position);
        let eig = SymmetricEigen::new(h);
        for k in 0..states.len() {
            let v = eig.eigenvectors.column(k);
            let d: f64 = states
                .iter()
                .zip(v.iter())
                .map(|(&s, c)| c * c * double_count(s, m))
                .sum();
            let eps = eig.eigenvalues[k];
            levels.push((eps, n, eps + mu * n, d));
        }
    }
    let ground = levels.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);

    Ok(taus
        .iter()
        .map(|&tau| {
            let (mut z, mut n, mut e, mut d) = (0.0, 0.0, 0.0, 0.0);
            for &(eps, ln, le, ld) in &levels {
                let w = (-tau * (eps - ground)).exp();
                z += w;
                n += w * ln;
                e += w * le;
                d += w * ld;
            }
            FermiOracleRow {
                tau,
                density: n / z / (2 * m) as f64,
                double_occupancy: d / z / m as f64,
                energy: e / z,
            }
        })
        .collect())
}

/// Free-fermion reference from the single-particle spectrum of `−t`.
pub fn free_fermion_averages(t_hop: &DMatrix<f64>, mu: f64, tau: f64) -> FermiOracleRow {
    let m = t_hop.nrows();
    let eig = SymmetricEigen::new(-t_hop.clone());
    let fermi = |e: f64| 1.0 / (1.0 + (tau * (e - mu)).exp());
    let occ: Vec<f64> = eig.eigenvalues.iter().map(|&e| fermi(e)).collect();
    let mut density = 0.0;
    let mut energy = 0.0;
    for (e, f) in eig.eigenvalues.iter().zip(&occ) {
        density += f;
        energy += 2.0 * e * f;
    }
    // Spins are independent: ⟨n_j↑ n_j↓⟩ = G_jj², G = V f Vᵀ.
    let mut docc = 0.0;
    for j in 0..m {
        let g: f64 = (0..m).map(|k| eig.eigenvectors[(j, k)].powi(2) * occ[k]).sum();
        docc += g * g;
    }
    FermiOracleRow {
        tau,
        density: density / m as f64,
        double_occupancy: docc / m as f64,
        energy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hop_signs_follow_mode_order() {
        let s = 0b101;
        let (sign, out) = hop(s, 1, 2).unwrap();
        assert_eq!(out, 0b011);
        // c_2 passes modes {0, 1}: one occupied → −1; c†_1 passes mode 0 → −1.
        assert_eq!(sign, 1.0);
        let (sign, out) = hop(0b110, 0, 2).unwrap();
        assert_eq!(out, 0b011);
        assert_eq!(sign, -1.0);
        assert!(hop(0b011, 1, 0).is_none());
        assert!(hop(0b001, 1, 2).is_none());
    }

    #[test]
    fn infinite_temperature_values() {
        let model = FermiHubbardModel::chain(3, 1.0, 2.0, 0.7, false).unwrap();
        let r = ed_fermi_thermal(&model, &[0.0]).unwrap()[0];
        assert!((r.density - 0.5).abs() < 1e-14);
        assert!((r.double_occupancy - 0.25).abs() < 1e-14);
        // Hopping averages out; U Σ ⟨n↓n↑⟩ = 3U/4.
        assert!((r.energy - 1.5).abs() < 1e-13);
    }

    #[test]
    fn single_site_closed_form() {
        let (u, mu) = (2.5, 0.8);
        let t = DMatrix::zeros(1, 1);
        let taus = [0.0, 0.3, 1.0, 4.0];
        for r in thermal_averages(&t, u, mu, &taus).unwrap() {
            let tau = r.tau;
            let z = 1.0 + 2.0 * (tau * mu).exp() + (-tau * (u - 2.0 * mu)).exp();
            let d = (-tau * (u - 2.0 * mu)).exp() / z;
            let n = (2.0 * (tau * mu).exp() + 2.0 * (-tau * (u - 2.0 * mu)).exp()) / z / 2.0;
            assert!((r.double_occupancy - d).abs() < 1e-12);
            assert!((r.density - n).abs() < 1e-12);
            assert!((r.energy - u * d).abs() < 1e-12);
        }
    }

    #[test]
    fn free_fermions_match_fermi_function() {
        for (m, mu) in [(2usize, 0.3), (4, -0.5), (5, 1.1)] {
            let model = FermiHubbardModel::chain(m, 1.0, 1.0, mu, true).unwrap();
            let t = model.t_hop();
            for tau in [0.0, 0.5, 2.0, 4.0] {
                let ed = thermal_averages(t, 0.0, mu, &[tau]).unwrap()[0];
                let free = free_fermion_averages(t, mu, tau);
                assert!((ed.density - free.density).abs() < 1e-10, "m={m} tau={tau}");
                assert!((ed.energy - free.energy).abs() < 1e-10, "m={m} tau={tau}");
                assert!((ed.double_occupancy - free.double_occupancy).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn block_hamiltonians_are_symmetric() {
        let model = FermiHubbardModel::rectangle(2, 2, 1.0, 4.0, 2.0, false).unwrap();
        let m = 4;
        let dim = 1usize << (2 * m);
        let mut blocks: Vec<Vec<u32>> = vec![Vec::new(); (m + 1) * (m + 1)];
        let mut position = vec![0u32; dim];
        for s in 0..dim as u32 {
            let (up, down) = spin_counts(s, m);
            let b = &mut blocks[up * (m + 1) + down];
            position[s as usize] = b.len() as u32;
            b.push(s);
        }
        for states in blocks.iter().filter(|b| !b.is_empty()) {
            let h = block_hamiltonian(model.t_hop(), 4.0, 2.0, states, &position);
            assert!((&h - h.transpose()).norm() < 1e-15);
        }
    }

    #[test]
    fn half_filling_at_particle_hole_point() {
        let model = FermiHubbardModel::chain(4, 1.0, 2.0, 1.0, false).unwrap();
        for r in ed_fermi_thermal(&model, &[0.5, 2.0, 4.0]).unwrap() {
            assert!((r.density - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn series_export_has_zero_errors() {
        let model = FermiHubbardModel::chain(2, 1.0, 2.0, 1.0, false).unwrap();
        let rows = ed_fermi_thermal(&model, &[0.0, 1.0]).unwrap();
        let s = fermi_oracle_series(&rows);
        assert_eq!(s.rows.len(), 2);
        assert!(s.rows.iter().all(|r| r.values.iter().all(|v| v.std_error == 0.0)));
    }
}
