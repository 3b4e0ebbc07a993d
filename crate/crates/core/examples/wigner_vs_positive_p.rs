//! Short-time quadrature variances of a Kerr-squeezed coherent state from
//! truncated Wigner and positive-P.
//!
//! cargo run --release --example wigner_vs_positive_p

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use phasesim::boson::{
    quadrature_variance, wigner_initial_ensemble, BoseHubbardWigner, BoseLatticeModel, KerrGauge,
    KerrProblem, Representation,
};
use phasesim::sde::{evolve, EngineConfig, StepSchedule};
use phasesim::{Axis, C64};

fn main() -> phasesim::Result<()> {
    let n_mean = 100.0;
    let span = 0.005;
    let schedule = StepSchedule::over_span(1e-4, span, span)?;
    let config = EngineConfig::default();

    let kerr = KerrProblem::new(0.0, n_mean, KerrGauge::None)?;
    let mut pp = kerr.initial_ensemble(10_000, 4)?;
    evolve(&mut pp, &kerr, &schedule, &config, Axis::Time, |_| Ok(vec![]))?;

    let model = BoseLatticeModel::single_mode(0.0, 0.5);
    let wigner = BoseHubbardWigner::new(&model);
    let mut w = wigner_initial_ensemble(&[C64::new(n_mean.sqrt(), 0.0)], 10_000, 5)?;
    evolve(&mut w, &wigner, &schedule, &config, Axis::Time, |_| Ok(vec![]))?;

    println!("2 chi t n = {:.2}", 2.0 * 0.5 * span * n_mean);
    for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
        let a = quadrature_variance(&pp, 0, theta, Representation::PositiveP, 10)?;
        let b = quadrature_variance(&w, 0, theta, Representation::Wigner, 10)?;
        println!(
            "theta = {theta:.3}: positive-P {:.3} ± {:.3}, Wigner {:.3} ± {:.3}",
            a.mean.re, a.std_error_re, b.mean.re, b.std_error_re
        );
    }
    Ok(())
}
