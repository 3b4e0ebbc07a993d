//! Grand-canonical thermal state of a 4-site Hubbard chain by imaginary-time
//! Gaussian phase-space sampling, against exact diagonalization.
//!
//! cargo run --release --example hubbard_thermal

use phasesim::fermion::{init_infinite_temperature, thermal_run, FermiHubbardModel, ThermalSchedule};
use phasesim::oracle::ed_fermi_thermal;
use phasesim::sde::EngineConfig;

fn main() -> phasesim::Result<()> {
    let model = FermiHubbardModel::chain(4, 1.0, 2.0, 0.5, false)?;
    let mut ens = init_infinite_temperature(&model, 5000, 7)?;
    let schedule = ThermalSchedule::new(2.0, 0.005, 0.25)?;
    let config = EngineConfig { noise_substeps: 1, ..EngineConfig::default() };
    let report = thermal_run(&mut ens, &model, &schedule, &config, 20)?;
    let series = &report.evolve.series;
    let exact = ed_fermi_thermal(&model, &series.times())?;

    let docc = series.column_index("double_occupancy").expect("column");
    let energy = series.column_index("energy").expect("column");
    println!("{:>5} {:>20} {:>8} {:>20} {:>8}", "tau", "<n_dn n_up>", "ED", "E", "ED");
    for (row, ex) in series.rows.iter().zip(&exact) {
        let (d, e) = (row.values[docc], row.values[energy]);
        println!(
            "{:5.2} {:11.4} ± {:6.4} {:8.4} {:11.3} ± {:6.3} {:8.3}",
            row.time, d.mean.re, d.std_error_re, ex.double_occupancy, e.mean.re, e.std_error_re, ex.energy
        );
    }
    println!(
        "positive weights: {:.3}, max relative imaginary part: {:.1e}",
        report.positive_weight_fraction, report.max_imaginary
    );
    Ok(())
}
