use phasesim::boson::{mean_amplitude, KerrGauge, KerrProblem};
use phasesim::sde::{evolve, EngineConfig, SdeProblem, StepSchedule, Stepper};
use phasesim::{Axis, Ensemble, Observation, PhasePoint, C64};

/// `dλ = −κ λ dt + dW` on one real coordinate (stored as `α`, with `β` idle).
struct OrnsteinUhlenbeck {
    kappa: f64,
}

impl SdeProblem for OrnsteinUhlenbeck {
    fn dimension(&self) -> usize {
        2
    }
    fn noise_count(&self) -> usize {
        1
    }
    fn drift(&self, s: &[C64], out: &mut [C64]) {
        out[0] = -self.kappa * s[0];
        out[1] = C64::new(0.0, 0.0);
    }
    fn diffusion(&self, _s: &[C64], v: &[C64], out: &mut [C64]) {
        out[0] = v[0];
        out[1] = C64::new(0.0, 0.0);
    }
}

fn origin(count: usize, seed: u64) -> Ensemble<PhasePoint> {
    let z = [C64::new(0.0, 0.0)];
    Ensemble::replicate(PhasePoint::new(&z, &z).unwrap(), count, seed).unwrap()
}

/// Records the sample variance of `α` and its standard error.
fn variance_series(
    kappa: f64,
    count: usize,
    schedule: StepSchedule,
    stepper: Stepper,
) -> Vec<(f64, f64, f64)> {
    let mut ens = origin(count, 11);
    let problem = OrnsteinUhlenbeck { kappa };
    let config = EngineConfig::default().with_stepper(stepper);
    let report = evolve(&mut ens, &problem, &schedule, &config, Axis::Time, |e| {
        let v = e.weighted_mean(|p| p.alpha()[0] * p.alpha()[0], 10)?;
        Ok(vec![Observation::real("x2", v)])
    })
    .unwrap();
    report
        .series
        .rows
        .iter()
        .map(|r| (r.time, r.values[0].mean.re, r.values[0].std_error_re))
        .collect()
}

#[test]
fn wiener_process_variance_grows_linearly() {
    let rows = variance_series(0.0, 100_000, StepSchedule::new(0.05, 20, 5).unwrap(), Stepper::Euler);
    for (t, var, err) in rows.into_iter().skip(1) {
        let n: f64 = 100_000.0;
        let sigma = t * (2.0 / (n - 1.0)).sqrt();
        assert!((var - t).abs() < 5.0 * sigma, "t={t} var={var} err={err}");
    }
}

#[test]
fn ornstein_uhlenbeck_variance_matches_closed_form() {
    let n: f64 = 40_000.0;
    let rows = variance_series(1.0, n as usize, StepSchedule::new(0.002, 750, 125).unwrap(), Stepper::Midpoint);
    for (t, var, _) in rows.into_iter().skip(1) {
        let exact = (1.0 - (-2.0 * t).exp()) / 2.0;
        let sigma = exact * (2.0 / (n - 1.0)).sqrt();
        assert!((var - exact).abs() < 5.0 * sigma, "t={t} var={var} exact={exact}");
    }
}

fn kerr_amplitude(dt: f64, substeps: usize, span: f64, stepper: Stepper, count: usize) -> Vec<C64> {
    let problem = KerrProblem::new(0.0, 100.0, KerrGauge::None).unwrap();
    let mut ens = problem.initial_ensemble(count, 5).unwrap();
    let config = EngineConfig { stepper, noise_substeps: substeps, ..EngineConfig::default() };
    let schedule = StepSchedule::over_span(dt, span, span / 4.0).unwrap();
    let report = evolve(&mut ens, &problem, &schedule, &config, Axis::Time, |e| {
        Ok(vec![Observation::complex("a", mean_amplitude(e, 0, 10)?)])
    })
    .unwrap();
    report.series.rows.iter().map(|r| r.values[0].mean).collect()
}

#[test]
fn kerr_step_halving_shrinks_the_discretization_change() {
    // Same Brownian path at dt, dt/2 and dt/4.
    let (dt, span) = (0.004, 0.08);
    let a = kerr_amplitude(dt, 4, span, Stepper::Midpoint, 2000);
    let b = kerr_amplitude(dt / 2.0, 2, span, Stepper::Midpoint, 2000);
    let c = kerr_amplitude(dt / 4.0, 1, span, Stepper::Midpoint, 2000);
    let coarse: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).sum();
    let fine: f64 = b.iter().zip(&c).map(|(x, y)| (x - y).norm()).sum();
    assert!(coarse >= 1.5 * fine, "coarse {coarse}, fine {fine}");
}

#[test]
fn euler_and_midpoint_converge_together_for_kerr() {
    let problem = KerrProblem::new(0.0, 100.0, KerrGauge::None).unwrap();
    let exact = problem.exact_mean_amplitude(0.05);
    let mut gaps = Vec::new();
    for dt in [2e-4, 1e-4, 5e-5, 2.5e-5] {
        let schedule = StepSchedule::over_span(dt, 0.05, 0.05).unwrap();
        let mut estimates = Vec::new();
        for stepper in [Stepper::Euler, Stepper::Midpoint] {
            let mut ens = problem.initial_ensemble(4000, 21).unwrap();
            let config = EngineConfig::default().with_stepper(stepper);
            let r = evolve(&mut ens, &problem, &schedule, &config, Axis::Time, |e| {
                Ok(vec![Observation::complex("a", mean_amplitude(e, 0, 10)?)])
            })
            .unwrap();
            estimates.push(r.series.rows.last().unwrap().values[0]);
        }
        let (e, m) = (estimates[0], estimates[1]);
        let combined = (e.std_error.powi(2) + m.std_error.powi(2)).sqrt();
        gaps.push(((e.mean - m.mean).norm(), combined));
        assert!(m.agrees(exact, 3.0), "midpoint at dt={dt}: {m:?} vs {exact}");
    }
    // Euler's bias is first order: the gap roughly halves with dt.
    for w in gaps.windows(2) {
        assert!(w[1].0 < 0.75 * w[0].0 || w[1].0 < 3.0 * w[1].1, "{gaps:?}");
    }
    let (last, sigma) = gaps[gaps.len() - 1];
    assert!(last < 3.0 * sigma, "{gaps:?}");
}
