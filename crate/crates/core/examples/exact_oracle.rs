//! Exact references: Bose-Hubbard dimer dynamics and Hubbard-chain thermal
//! averages from full diagonalization.
//!
//! cargo run --release --example exact_oracle

use phasesim::boson::BoseLatticeModel;
use phasesim::fermion::FermiHubbardModel;
use phasesim::oracle::{ed_bose_evolve, ed_fermi_thermal};
use phasesim::C64;

fn main() -> phasesim::Result<()> {
    let dimer = BoseLatticeModel::dimer(1.0, 1.0);
    let alpha = [C64::new(2.0, 0.0), C64::new(0.0, 0.0)];
    let times: Vec<f64> = (0..=10).map(|i| 0.2 * i as f64).collect();
    let bose = ed_bose_evolve(&dimer, &alpha, &times)?;
    println!("dimer, chi/J = 1");
    for row in &bose.rows {
        println!("  Jt {:.1}: n_0 {:.4} n_1 {:.4} g2(0,0) {:.4}", row.time, row.number(0), row.number(1), row.g2(0, 0));
    }

    let chain = FermiHubbardModel::chain(4, 1.0, 2.0, 1.0, false)?;
    let taus: Vec<f64> = (0..=8).map(|i| 0.5 * i as f64).collect();
    println!("4-site chain, U = 2, mu = 1");
    for row in ed_fermi_thermal(&chain, &taus)? {
        println!(
            "  tau {:.1}: n {:.4} docc {:.4} E {:.4}",
            row.tau, row.density, row.double_occupancy, row.energy
        );
    }
    Ok(())
}
