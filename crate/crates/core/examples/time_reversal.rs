//! Forward Kerr evolution followed by the sign-reversed Hamiltonian. The
//! moments return to their initial values while the trajectories stay spread.
//!
//! cargo run --release --example time_reversal

use phasesim::boson::observables::mean_amplitude_squared;
use phasesim::boson::{mean_amplitude, number, KerrGauge, KerrProblem, Representation};
use phasesim::sde::{evolve, time_reverse, EngineConfig, StepSchedule};
use phasesim::{Axis, Ensemble, PhasePoint, PhaseSpacePoint};

fn spread(ens: &Ensemble<PhasePoint>) -> f64 {
    let alive: Vec<_> = ens.points().iter().filter(|p| p.is_alive()).map(|p| p.alpha()[0]).collect();
    let n = alive.len() as f64;
    let mean = alive.iter().sum::<phasesim::C64>() / n;
    alive.iter().map(|a| (a - mean).norm_sqr()).sum::<f64>() / (n - 1.0)
}

fn show(label: &str, ens: &Ensemble<PhasePoint>) -> phasesim::Result<()> {
    let a = mean_amplitude(ens, 0, 10)?;
    let n = number(ens, 0, Representation::PositiveP, 10)?;
    let a2 = mean_amplitude_squared(ens, 0, 10)?;
    println!(
        "{label:>9}: <a> = {:.3} ± {:.3}, <n> = {:.3} ± {:.3}, <a^2> = {:.2} ± {:.2}, var(alpha) = {:.3e}",
        a.mean, a.std_error, n.mean.re, n.std_error_re, a2.mean, a2.std_error, spread(ens)
    );
    Ok(())
}

fn main() -> phasesim::Result<()> {
    let problem = KerrProblem::new(0.0, 100.0, KerrGauge::None)?;
    let reversed = time_reverse(&problem);
    let mut ens = problem.initial_ensemble(10_000, 2)?;
    let schedule = StepSchedule::over_span(1e-4, 0.05, 0.05)?;
    let config = EngineConfig::default();

    show("initial", &ens)?;
    evolve(&mut ens, &problem, &schedule, &config, Axis::Time, |_| Ok(vec![]))?;
    show("forward", &ens)?;
    evolve(&mut ens, &reversed, &schedule, &config, Axis::Time, |_| Ok(vec![]))?;
    show("reversed", &ens)?;
    Ok(())
}
