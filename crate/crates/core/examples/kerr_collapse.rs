//! Phase-diffusion collapse of a coherent state under a Kerr Hamiltonian,
//! positive-P against the closed form.
//!
//! cargo run --release --example kerr_collapse

use phasesim::boson::{KerrGauge, KerrProblem};
use phasesim::sde::{evolve, EngineConfig, StepSchedule};
use phasesim::{Axis, Error, Observation, PhasePoint, C64};

fn main() -> phasesim::Result<()> {
    let problem = KerrProblem::new(0.0, 100.0, KerrGauge::None)?;
    let mut ens = problem.initial_ensemble(10_000, 1)?;
    let schedule = StepSchedule::over_span(1e-4, 0.3, 0.02)?;
    let series = match evolve(&mut ens, &problem, &schedule, &EngineConfig::default(), Axis::Time, |e| {
        let a = |p: &PhasePoint| p.alpha()[0];
        let modulus = e.weighted_functional(&[&a], |m| C64::new(m[0].norm(), 0.0), 10)?;
        Ok(vec![Observation::real("abs_a", modulus)])
    }) {
        Ok(report) => report.series,
        Err(Error::AbortFloor { partial, .. }) => {
            println!("abort floor reached, showing the partial series");
            *partial
        }
        Err(e) => return Err(e),
    };

    println!("{:>6} {:>8} {:>18} {:>8}", "t", "alive", "|<a>| simulated", "exact");
    for row in &series.rows {
        let est = row.values[0];
        let exact = problem.exact_mean_amplitude(row.time).norm();
        println!(
            "{:6.2} {:8} {:9.3} ± {:6.3} {:8.3}",
            row.time, row.n_alive, est.mean.re, est.std_error_re, exact
        );
    }
    Ok(())
}
