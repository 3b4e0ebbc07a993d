//! Two-site Bose-Hubbard tunnelling from a coherent state with four atoms on
//! site 0, positive-P against exact diagonalization.
//!
//! cargo run --release --example bose_hubbard_dimer [chi]

use phasesim::boson::{estimate_g2, number, BoseHubbardPositiveP, BoseLatticeModel, Representation};
use phasesim::oracle::ed_bose_evolve;
use phasesim::sde::{evolve, EngineConfig, StepSchedule};
use phasesim::{Axis, Error, Observation, C64};

fn main() -> phasesim::Result<()> {
    let chi: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let model = BoseLatticeModel::dimer(1.0, chi);
    let problem = BoseHubbardPositiveP::new(&model);
    let alpha = [C64::new(2.0, 0.0), C64::new(0.0, 0.0)];
    let mut ens = problem.coherent_ensemble(&alpha, 10_000, 3)?;
    let schedule = StepSchedule::over_span(5e-4, 2.0, 0.2)?;
    let pp = Representation::PositiveP;
    let series = match evolve(&mut ens, &problem, &schedule, &EngineConfig::default(), Axis::Time, |e| {
        Ok(vec![
            Observation::real("n_0", number(e, 0, pp, 20)?),
            Observation::real("g2_00", estimate_g2(e, 0, 0, pp, 20)?),
        ])
    }) {
        Ok(report) => report.series,
        Err(Error::AbortFloor { partial, .. }) => *partial,
        Err(e) => return Err(e),
    };
    let exact = ed_bose_evolve(&model, &alpha, &series.times())?;

    println!("chi/J = {chi}");
    println!("{:>5} {:>20} {:>7} {:>20} {:>7}", "Jt", "n_0", "ED", "g2(0,0)", "ED");
    for (row, ex) in series.rows.iter().zip(&exact.rows) {
        let (n0, g2) = (row.values[0], row.values[1]);
        println!(
            "{:5.1} {:11.3} ± {:6.3} {:7.3} {:11.3} ± {:6.3} {:7.3}",
            row.time, n0.mean.re, n0.std_error_re, ex.number(0), g2.mean.re, g2.std_error_re, ex.g2(0, 0)
        );
    }
    Ok(())
}
