//! Fixed-step Itô integration of weighted phase-space trajectories.
//!
//! A problem supplies the generic evolution
//!
//! ```text
//! dλ   = A(λ) dt + B(λ) (ζ − g(λ)) dt
//! dlnΩ = (U(λ) − ½ g·g) dt + g·ζ dt
//! ```
//!
//! where `ζ` is real white noise with `⟨ζ_k ζ_l⟩ = δ_kl / dt` and `g` is a
//! stochastic gauge. The `−½ g·g` term is the Itô correction that makes the
//! exponential of the log-weight update an unbiased step of `dΩ = Ω(U dt + g dW)`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::ensemble::{Ensemble, PhaseSpacePoint, C64};
use crate::error::{invalid, Error, Result};
use crate::series::{Axis, MomentSeries, Observation};

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Drift, diffusion, weight and gauge terms of a phase-space SDE.
///
/// Coordinates are complex; noises are real. All terms must be in Itô form.
pub trait SdeProblem: Sync {
    /// Number of complex coordinates per trajectory.
    fn dimension(&self) -> usize;

    /// Number of independent real noises per step.
    fn noise_count(&self) -> usize;

    /// Writes `A(λ)` into `out`.
    fn drift(&self, state: &[C64], out: &mut [C64]);

    /// Writes `B(λ) v` into `out`; `v` has `noise_count()` entries.
    fn diffusion(&self, state: &[C64], v: &[C64], out: &mut [C64]);

    /// Weight drift `U(λ)`.
    fn weight_drift(&self, _state: &[C64]) -> C64 {
        ZERO
    }

    /// Writes the gauge `g(λ)` into `out` and returns `true`, or returns
    /// `false` (leaving `out` untouched) when the gauge is identically zero.
    fn gauge(&self, _state: &[C64], _out: &mut [C64]) -> bool {
        false
    }
}

impl<S: SdeProblem + ?Sized> SdeProblem for &S {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn noise_count(&self) -> usize {
        (**self).noise_count()
    }
    fn drift(&self, state: &[C64], out: &mut [C64]) {
        (**self).drift(state, out)
    }
    fn diffusion(&self, state: &[C64], v: &[C64], out: &mut [C64]) {
        (**self).diffusion(state, v, out)
    }
    fn weight_drift(&self, state: &[C64]) -> C64 {
        (**self).weight_drift(state)
    }
    fn gauge(&self, state: &[C64], out: &mut [C64]) -> bool {
        (**self).gauge(state, out)
    }
}

impl<S: SdeProblem + ?Sized> SdeProblem for Box<S> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn noise_count(&self) -> usize {
        (**self).noise_count()
    }
    fn drift(&self, state: &[C64], out: &mut [C64]) {
        (**self).drift(state, out)
    }
    fn diffusion(&self, state: &[C64], v: &[C64], out: &mut [C64]) {
        (**self).diffusion(state, v, out)
    }
    fn weight_drift(&self, state: &[C64]) -> C64 {
        (**self).weight_drift(state)
    }
    fn gauge(&self, state: &[C64], out: &mut [C64]) -> bool {
        (**self).gauge(state, out)
    }
}

/// A problem with the sign of its generator flipped.
///
/// Negating the Hamiltonian negates the drift and the diffusion matrix
/// `D = B Bᵀ`, so `B → iB`. The gauge maps to `g → i g`, which keeps the
/// gauge-induced drift correction `−B g` negated along with everything else.
/// Noise draws remain fresh: reversal is a change of generator, not a replay.
#[derive(Clone, Debug)]
pub struct TimeReversed<S>(pub S);

/// Reverses the direction of evolution of `problem`.
pub fn time_reverse<S: SdeProblem>(problem: S) -> TimeReversed<S> {
    TimeReversed(problem)
}

impl<S: SdeProblem> SdeProblem for TimeReversed<S> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }
    fn noise_count(&self) -> usize {
        self.0.noise_count()
    }
    fn drift(&self, state: &[C64], out: &mut [C64]) {
        self.0.drift(state, out);
        out.iter_mut().for_each(|x| *x = -*x);
    }
    fn diffusion(&self, state: &[C64], v: &[C64], out: &mut [C64]) {
        self.0.diffusion(state, v, out);
        out.iter_mut().for_each(|x| *x *= I);
    }
    fn weight_drift(&self, state: &[C64]) -> C64 {
        -self.0.weight_drift(state)
    }
    fn gauge(&self, state: &[C64], out: &mut [C64]) -> bool {
        if self.0.gauge(state, out) {
            out.iter_mut().for_each(|x| *x *= I);
            true
        } else {
            false
        }
    }
}

/// Fixed step schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSchedule {
    pub dt: f64,
    pub n_steps: usize,
    pub record_stride: usize,
}

impl StepSchedule {
    pub fn new(dt: f64, n_steps: usize, record_stride: usize) -> Result<Self> {
        let s = Self {
            dt,
            n_steps,
            record_stride,
        };
        s.validate()?;
        Ok(s)
    }

    /// Schedule covering `span` in steps of `dt`, recording every
    /// `record_every` time units. Both must be integer multiples of `dt`.
    pub fn over_span(dt: f64, span: f64, record_every: f64) -> Result<Self> {
        let n_steps = steps_in(span, dt)?;
        let stride = steps_in(record_every, dt)?.max(1);
        Self::new(dt, n_steps, stride)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride must be at least 1"));
        }
        Ok(())
    }

    pub fn span(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// Same span and record times at half the step.
    pub fn halved(&self) -> Self {
        Self {
            dt: self.dt / 2.0,
            n_steps: self.n_steps * 2,
            record_stride: self.record_stride * 2,
        }
    }
}

fn steps_in(span: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(span >= 0.0) {
        return Err(invalid(format!("need dt > 0 and span >= 0, got dt={dt}, span={span}")));
    }
    let n = (span / dt).round();
    if (n * dt - span).abs() > 1e-9 * span.max(dt) {
        return Err(invalid(format!("span {span} is not a multiple of dt {dt}")));
    }
    Ok(n as usize)
}

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stepper {
    Euler,
    Midpoint,
}

/// Engine settings shared by every step of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub stepper: Stepper,
    /// A trajectory dies once any coordinate exceeds this modulus.
    pub divergence_threshold: f64,
    /// Minimum alive fraction; falling below aborts the run.
    pub abort_floor: f64,
    pub midpoint_iterations: usize,
    pub midpoint_tolerance: f64,
    /// Each step's Wiener increment is the sum of this many finer
    /// increments. A run at `dt` with 2 substeps consumes the same random
    /// numbers as a run at `dt/2` with 1, so both follow one Brownian path.
    pub noise_substeps: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            stepper: Stepper::Midpoint,
            divergence_threshold: 1e6,
            abort_floor: 0.9,
            midpoint_iterations: 4,
            midpoint_tolerance: 1e-12,
            noise_substeps: 1,
        }
    }
}

impl EngineConfig {
    pub fn with_stepper(mut self, stepper: Stepper) -> Self {
        self.stepper = stepper;
        self
    }
}

/// Outcome of a single trajectory step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Ok,
    /// Midpoint iteration failed to contract; an Euler step was taken.
    MidpointFallback,
    Died,
}

/// Reusable buffers for one worker.
#[derive(Clone, Debug)]
pub struct StepScratch {
    drift: Vec<C64>,
    mid: Vec<C64>,
    next_mid: Vec<C64>,
    noise_term: Vec<C64>,
    gauge: Vec<C64>,
    v: Vec<C64>,
}

impl StepScratch {
    pub fn new(dimension: usize, noise_count: usize) -> Self {
        Self {
            drift: vec![ZERO; dimension],
            mid: vec![ZERO; dimension],
            next_mid: vec![ZERO; dimension],
            noise_term: vec![ZERO; dimension],
            gauge: vec![ZERO; noise_count],
            v: vec![ZERO; noise_count],
        }
    }

    pub fn for_problem<S: SdeProblem + ?Sized>(problem: &S) -> Self {
        Self::new(problem.dimension(), problem.noise_count())
    }
}

/// Noise contribution `B(λ)(ζ − g)` and log-weight increment at `state`.
fn noise_and_weight<S: SdeProblem + ?Sized>(
    problem: &S,
    state: &[C64],
    weight_drift: C64,
    dt: f64,
    noise: &[f64],
    scratch: &mut StepScratch,
) -> C64 {
    let gauged = problem.gauge(state, &mut scratch.gauge);
    let mut dlog = weight_drift * dt;
    if gauged {
        let mut gg = ZERO;
        let mut gz = ZERO;
        for ((v, g), z) in scratch.v.iter_mut().zip(&scratch.gauge).zip(noise) {
            *v = C64::new(*z, 0.0) - g;
            gg += g * g;
            gz += g * z;
        }
        dlog += (gz - 0.5 * gg) * dt;
    } else {
        for (v, z) in scratch.v.iter_mut().zip(noise) {
            *v = C64::new(*z, 0.0);
        }
    }
    if scratch.v.is_empty() {
        scratch.noise_term.iter_mut().for_each(|x| *x = ZERO);
    } else {
        problem.diffusion(state, &scratch.v, &mut scratch.noise_term);
    }
    dlog
}

fn finalize<P: PhaseSpacePoint>(point: &mut P, dlog: C64, threshold: f64) -> bool {
    let lw = point.log_weight() + dlog;
    point.set_log_weight(lw);
    let ok = lw.is_finite()
        && point
            .coords()
            .iter()
            .all(|c| c.is_finite() && c.norm() <= threshold);
    if !ok {
        point.kill();
    }
    ok
}

/// One Euler–Maruyama step; `noise` holds `ζ` with variance `1/dt`.
pub fn step_ito_euler<P, S>(
    point: &mut P,
    problem: &S,
    dt: f64,
    noise: &[f64],
    config: &EngineConfig,
    scratch: &mut StepScratch,
) -> StepOutcome
where
    P: PhaseSpacePoint,
    S: SdeProblem + ?Sized,
{
    if !point.is_alive() {
        return StepOutcome::Died;
    }
    problem.drift(point.coords(), &mut scratch.drift);
    euler_from_drift(point, problem, dt, noise, config, scratch)
}

fn euler_from_drift<P, S>(
    point: &mut P,
    problem: &S,
    dt: f64,
    noise: &[f64],
    config: &EngineConfig,
    scratch: &mut StepScratch,
) -> StepOutcome
where
    P: PhaseSpacePoint,
    S: SdeProblem + ?Sized,
{
    let u = problem.weight_drift(point.coords());
    let dlog = noise_and_weight(problem, point.coords(), u, dt, noise, scratch);
    for ((x, a), b) in point
        .coords_mut()
        .iter_mut()
        .zip(&scratch.drift)
        .zip(&scratch.noise_term)
    {
        *x += (a + b) * dt;
    }
    if finalize(point, dlog, config.divergence_threshold) {
        StepOutcome::Ok
    } else {
        StepOutcome::Died
    }
}

/// One semi-implicit step: the drift is evaluated at the fixed-point
/// midpoint `m = λ + ½ dt A(m)`, while the noise, gauge and diffusion stay
/// at the start of the step so the scheme remains Itô.
///
/// The fixed point is iterated at most `midpoint_iterations` times. It is
/// accepted when the last update is below `midpoint_tolerance` or still
/// contracting; otherwise the step falls back to Euler.
pub fn step_ito_midpoint<P, S>(
    point: &mut P,
    problem: &S,
    dt: f64,
    noise: &[f64],
    config: &EngineConfig,
    scratch: &mut StepScratch,
) -> StepOutcome
where
    P: PhaseSpacePoint,
    S: SdeProblem + ?Sized,
{
    if !point.is_alive() {
        return StepOutcome::Died;
    }
    let half = 0.5 * dt;
    problem.drift(point.coords(), &mut scratch.drift);
    let mut converged = false;
    let mut previous = f64::INFINITY;
    scratch.mid.copy_from_slice(point.coords());
    for iter in 0..config.midpoint_iterations.max(1) {
        if iter > 0 {
            problem.drift(&scratch.mid, &mut scratch.drift);
        }
        let mut inc = 0.0f64;
        for ((nm, x), a) in scratch
            .next_mid
            .iter_mut()
            .zip(point.coords())
            .zip(&scratch.drift)
        {
            *nm = x + a * half;
        }
        for (nm, m) in scratch.next_mid.iter().zip(&scratch.mid) {
            let d = (nm - m).norm();
            inc = if d.is_nan() { f64::NAN } else { inc.max(d) };
        }
        std::mem::swap(&mut scratch.mid, &mut scratch.next_mid);
        if !inc.is_finite() {
            converged = false;
            previous = f64::NAN;
            break;
        }
        if inc <= config.midpoint_tolerance {
            converged = true;
            break;
        }
        converged = inc < previous;
        previous = inc;
    }
    if !converged || previous.is_nan() {
        problem.drift(point.coords(), &mut scratch.drift);
        return match euler_from_drift(point, problem, dt, noise, config, scratch) {
            StepOutcome::Ok => StepOutcome::MidpointFallback,
            other => other,
        };
    }
    let u = problem.weight_drift(&scratch.mid);
    let dlog = noise_and_weight(problem, point.coords(), u, dt, noise, scratch);
    // λ' = 2m − λ + B(ζ−g) dt, i.e. λ + A(m_prev) dt + noise.
    for ((x, m), b) in point
        .coords_mut()
        .iter_mut()
        .zip(&scratch.mid)
        .zip(&scratch.noise_term)
    {
        *x = 2.0 * m - *x + b * dt;
    }
    if finalize(point, dlog, config.divergence_threshold) {
        StepOutcome::Ok
    } else {
        StepOutcome::Died
    }
}

/// Summary of an `evolve` call.
#[derive(Clone, Debug)]
pub struct EvolveReport {
    pub series: MomentSeries,
    pub midpoint_fallbacks: usize,
    pub dead: usize,
    pub alive_fraction: f64,
}

/// Draws one step's white noise `ζ` (variance `1/dt`) for a trajectory.
fn draw_step_noise<R: rand::Rng>(rng: &mut R, dt: f64, substeps: usize, out: &mut [f64]) {
    if substeps <= 1 {
        let scale = 1.0 / dt.sqrt();
        for z in out.iter_mut() {
            let w: f64 = StandardNormal.sample(rng);
            *z = scale * w;
        }
        return;
    }
    out.iter_mut().for_each(|z| *z = 0.0);
    let fine = (dt / substeps as f64).sqrt() / dt;
    for _ in 0..substeps {
        for z in out.iter_mut() {
            let w: f64 = StandardNormal.sample(rng);
            *z += fine * w;
        }
    }
}

/// Advances every alive trajectory through `schedule`, calling `recorder`
/// at step 0 and every `record_stride` steps.
///
/// Returns [`Error::AbortFloor`] carrying the partial series if the alive
/// fraction drops below `config.abort_floor`.
pub fn evolve<P, S, R>(
    ensemble: &mut Ensemble<P>,
    problem: &S,
    schedule: &StepSchedule,
    config: &EngineConfig,
    axis: Axis,
    mut recorder: R,
) -> Result<EvolveReport>
where
    P: PhaseSpacePoint,
    S: SdeProblem + ?Sized,
    R: FnMut(&Ensemble<P>) -> Result<Vec<Observation>>,
{
    schedule.validate()?;
    let dim = problem.dimension();
    if let Some(p) = ensemble.points.first() {
        if p.coords().len() != dim {
            return Err(invalid(format!(
                "ensemble has {} coordinates per trajectory, problem expects {dim}",
                p.coords().len()
            )));
        }
    }
    let n_noise = problem.noise_count();
    let substeps = config.noise_substeps.max(1);
    let dt = schedule.dt;
    let t0 = ensemble.time;
    let mut series = MomentSeries::new(axis);
    let mut fallbacks = 0usize;

    let record = |ens: &Ensemble<P>, series: &mut MomentSeries, rec: &mut R| -> Result<()> {
        let obs = rec(ens)?;
        series.push(ens.time, ens.alive_count(), obs);
        Ok(())
    };
    record(ensemble, &mut series, &mut recorder)?;

    for k in 1..=schedule.n_steps {
        let step_index = ensemble.step_index;
        let outcomes: Vec<StepOutcome> = ensemble
            .points
            .par_iter_mut()
            .zip(ensemble.streams.par_iter_mut())
            .map_init(
                || (StepScratch::new(dim, n_noise), vec![0.0; n_noise]),
                |(scratch, noise), (point, rng)| {
                    if !point.is_alive() {
                        return StepOutcome::Ok;
                    }
                    draw_step_noise(rng, dt, substeps, noise);
                    match config.stepper {
                        Stepper::Euler => step_ito_euler(point, problem, dt, noise, config, scratch),
                        Stepper::Midpoint => {
                            step_ito_midpoint(point, problem, dt, noise, config, scratch)
                        }
                    }
                },
            )
            .collect();
        for (idx, o) in outcomes.iter().enumerate() {
            match o {
                StepOutcome::Died => ensemble.deaths.push((idx, step_index + 1)),
                StepOutcome::MidpointFallback => fallbacks += 1,
                StepOutcome::Ok => {}
            }
        }
        ensemble.step_index += 1;
        ensemble.time = t0 + k as f64 * dt;

        let alive_fraction = ensemble.alive_fraction();
        if alive_fraction < config.abort_floor {
            return Err(Error::AbortFloor {
                alive_fraction,
                floor: config.abort_floor,
                step: ensemble.step_index,
                time: ensemble.time,
                partial: Box::new(series),
            });
        }
        if k % schedule.record_stride == 0 {
            record(ensemble, &mut series, &mut recorder)?;
        }
    }

    Ok(EvolveReport {
        series,
        midpoint_fallbacks: fallbacks,
        dead: ensemble.trajectory_count() - ensemble.alive_count(),
        alive_fraction: ensemble.alive_fraction(),
    })
}


#[cfg(test)]
mod tests {
    use super::test_problems::Linear;
    use super::*;
    use crate::ensemble::{PhasePoint, DEFAULT_SUBENSEMBLES};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn point(x: f64) -> PhasePoint {
        PhasePoint::new(&[c(x)], &[c(x)]).unwrap()
    }

    #[test]
    fn null_dynamics_is_identity() {
        let p0 = point(1.5);
        let prob = Linear::null(2);
        let cfg = EngineConfig::default();
        for stepper in [Stepper::Euler, Stepper::Midpoint] {
            let mut p = p0.clone();
            let mut s = StepScratch::for_problem(&prob);
            let out = match stepper {
                Stepper::Euler => step_ito_euler(&mut p, &prob, 0.1, &[3.0, -2.0], &cfg, &mut s),
                Stepper::Midpoint => step_ito_midpoint(&mut p, &prob, 0.1, &[3.0, -2.0], &cfg, &mut s),
            };
            assert_eq!(out, StepOutcome::Ok);
            assert_eq!(p, p0);
        }
    }

    #[test]
    fn euler_decay_converges_to_exponential() {
        let prob = Linear { rate: c(-1.0), ..Linear::null(2) };
        let cfg = EngineConfig::default();
        for (dt, tol) in [(1e-2, 2e-3), (1e-3, 2e-4)] {
            let mut p = point(1.0);
            let mut s = StepScratch::for_problem(&prob);
            let n = (1.0 / dt) as usize;
            for _ in 0..n {
                step_ito_euler(&mut p, &prob, dt, &[0.0, 0.0], &cfg, &mut s);
            }
            assert!((p.alpha()[0].re - (-1f64).exp()).abs() < tol);
        }
    }

    #[test]
    fn midpoint_matches_closed_form_linear_factor() {
        let prob = Linear { rate: c(-1.0), ..Linear::null(2) };
        let cfg = EngineConfig { midpoint_iterations: 30, ..EngineConfig::default() };
        let dt = 0.05;
        let mut p = point(1.0);
        let mut s = StepScratch::for_problem(&prob);
        let factor: f64 = (1.0 - dt / 2.0) / (1.0 + dt / 2.0);
        for k in 1..=20 {
            let out = step_ito_midpoint(&mut p, &prob, dt, &[0.0, 0.0], &cfg, &mut s);
            assert_eq!(out, StepOutcome::Ok);
            assert!((p.alpha()[0].re - factor.powi(k)).abs() < 1e-8);
        }
    }

    #[test]
    fn midpoint_falls_back_when_not_contracting() {
        // dt·|rate|/2 = 3: the fixed-point map expands.
        let prob = Linear { rate: c(-60.0), ..Linear::null(2) };
        let cfg = EngineConfig::default();
        let mut p = point(1.0);
        let mut s = StepScratch::for_problem(&prob);
        let out = step_ito_midpoint(&mut p, &prob, 0.1, &[0.0, 0.0], &cfg, &mut s);
        assert_eq!(out, StepOutcome::MidpointFallback);
        assert!((p.alpha()[0].re - (1.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn divergent_trajectories_die() {
        let prob = Linear { rate: c(1e8), ..Linear::null(2) };
        let cfg = EngineConfig::default();
        let mut p = point(1.0);
        let mut s = StepScratch::for_problem(&prob);
        assert_eq!(
            step_ito_euler(&mut p, &prob, 0.1, &[0.0, 0.0], &cfg, &mut s),
            StepOutcome::Died
        );
        assert!(!p.is_alive());
        let mut q = PhasePoint::new(&[C64::new(f64::NAN, 0.0)], &[c(0.0)]).unwrap();
        let prob = Linear::null(2);
        assert_eq!(
            step_ito_euler(&mut q, &prob, 0.1, &[0.0, 0.0], &cfg, &mut s),
            StepOutcome::Died
        );
    }

    #[test]
    fn weight_depends_only_on_u_without_gauge() {
        let prob = Linear {
            weight: C64::new(0.3, -0.2),
            sigma: c(1.0),
            ..Linear::null(2)
        };
        let cfg = EngineConfig::default();
        let mut p = point(0.0);
        let mut s = StepScratch::for_problem(&prob);
        step_ito_euler(&mut p, &prob, 0.1, &[5.0, -7.0], &cfg, &mut s);
        assert!((p.log_weight() - C64::new(0.03, -0.02)).norm() < 1e-15);
    }

    #[test]
    fn gauge_shifts_drift_and_weight() {
        let g = C64::new(0.5, 0.25);
        let prob = Linear {
            sigma: c(2.0),
            gauge: Some(g),
            ..Linear::null(1)
        };
        let cfg = EngineConfig::default();
        #[derive(Clone)]
        struct One(Vec<C64>, C64, bool);
        impl PhaseSpacePoint for One {
            fn coords(&self) -> &[C64] { &self.0 }
            fn coords_mut(&mut self) -> &mut [C64] { &mut self.0 }
            fn log_weight(&self) -> C64 { self.1 }
            fn set_log_weight(&mut self, w: C64) { self.1 = w }
            fn is_alive(&self) -> bool { self.2 }
            fn kill(&mut self) { self.2 = false }
        }
        let mut q = One(vec![c(0.0)], c(0.0), true);
        let mut s = StepScratch::for_problem(&prob);
        let dt = 0.01;
        let z = 3.0;
        step_ito_euler(&mut q, &prob, dt, &[z], &cfg, &mut s);
        assert!((q.0[0] - 2.0 * (c(z) - g) * dt).norm() < 1e-15);
        assert!((q.1 - (g * z - 0.5 * g * g) * dt).norm() < 1e-15);
    }

    #[test]
    fn reversal_is_an_involution_on_drift_and_diffusion_matrix() {
        let prob = Linear {
            rate: C64::new(-0.3, 1.2),
            sigma: C64::new(0.7, -0.1),
            weight: c(0.4),
            ..Linear::null(2)
        };
        let twice = time_reverse(time_reverse(&prob));
        let state = [C64::new(1.0, 2.0), C64::new(-0.5, 0.1)];
        let (mut a, mut b) = ([ZERO; 2], [ZERO; 2]);
        prob.drift(&state, &mut a);
        twice.drift(&state, &mut b);
        assert_eq!(a, b);
        let once = time_reverse(&prob);
        once.drift(&state, &mut b);
        assert_eq!(b[0], -a[0]);
        // Diffusion matrix D = B Bᵀ flips sign once, returns after twice.
        let v = [c(1.0), c(0.0)];
        prob.diffusion(&state, &v, &mut a);
        once.diffusion(&state, &v, &mut b);
        assert!((b[0] * b[0] + a[0] * a[0]).norm() < 1e-15);
        twice.diffusion(&state, &v, &mut b);
        assert!((b[0] * b[0] - a[0] * a[0]).norm() < 1e-15);
        assert_eq!(twice.weight_drift(&state), prob.weight_drift(&state));
    }

    #[test]
    fn null_problem_reversed_is_null() {
        let prob = time_reverse(Linear::null(2));
        let state = [c(1.0), c(2.0)];
        let mut out = [c(9.0); 2];
        prob.drift(&state, &mut out);
        assert_eq!(out, [ZERO; 2]);
        prob.diffusion(&state, &[c(1.0), c(1.0)], &mut out);
        assert_eq!(out, [ZERO; 2]);
        assert_eq!(prob.weight_drift(&state), ZERO);
    }

    #[test]
    fn zero_steps_leave_ensemble_unchanged() {
        let mut e = Ensemble::replicate(point(2.0), 20, 3).unwrap();
        let before = e.points().to_vec();
        let prob = Linear { rate: c(-1.0), sigma: c(1.0), ..Linear::null(2) };
        let sched = StepSchedule::new(0.1, 0, 1).unwrap();
        let rep = evolve(&mut e, &prob, &sched, &EngineConfig::default(), Axis::Time, |_| Ok(vec![]))
            .unwrap();
        assert_eq!(e.points(), &before[..]);
        assert_eq!(rep.series.rows.len(), 1);
    }

    #[test]
    fn null_dynamics_records_constant_moments() {
        let mut e = Ensemble::replicate(point(2.0), 20, 3).unwrap();
        let prob = Linear::null(2);
        let sched = StepSchedule::new(0.1, 10, 2).unwrap();
        let rep = evolve(&mut e, &prob, &sched, &EngineConfig::default(), Axis::Time, |e| {
            Ok(vec![Observation::complex(
                "x",
                e.weighted_mean(|p| p.alpha()[0], DEFAULT_SUBENSEMBLES)?,
            )])
        })
        .unwrap();
        assert_eq!(rep.series.rows.len(), 6);
        for r in &rep.series.rows {
            assert_eq!(r.values[0].mean, c(2.0));
        }
        assert!((rep.series.rows[5].time - 1.0).abs() < 1e-12);
    }

    #[test]
    fn abort_floor_reports_partial_series() {
        let mut e = Ensemble::replicate(point(1.0), 10, 3).unwrap();
        let prob = Linear { rate: c(200.0), ..Linear::null(2) };
        let sched = StepSchedule::new(0.1, 10, 1).unwrap();
        let err = evolve(&mut e, &prob, &sched, &EngineConfig::default().with_stepper(Stepper::Euler), Axis::Time, |_| Ok(vec![]))
            .unwrap_err();
        match err {
            Error::AbortFloor { partial, alive_fraction, .. } => {
                assert!(alive_fraction < 0.9);
                assert!(!partial.rows.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(e.deaths.len(), 10);
    }

    #[test]
    fn substep_noise_shares_the_brownian_path() {
        let mut rng_a = crate::ensemble::trajectory_stream(5, 0);
        let mut rng_b = crate::ensemble::trajectory_stream(5, 0);
        let dt = 0.2;
        let mut coarse = [0.0; 3];
        draw_step_noise(&mut rng_a, dt, 2, &mut coarse);
        let (mut f1, mut f2) = ([0.0; 3], [0.0; 3]);
        draw_step_noise(&mut rng_b, dt / 2.0, 1, &mut f1);
        draw_step_noise(&mut rng_b, dt / 2.0, 1, &mut f2);
        for k in 0..3 {
            let dw_coarse = coarse[k] * dt;
            let dw_fine = (f1[k] + f2[k]) * dt / 2.0;
            assert!((dw_coarse - dw_fine).abs() < 1e-14);
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(StepSchedule::new(-0.1, 5, 1).is_err());
        assert!(StepSchedule::new(0.1, 5, 0).is_err());
        let s = StepSchedule::over_span(0.01, 1.0, 0.1).unwrap();
        assert_eq!((s.n_steps, s.record_stride), (100, 10));
        assert!(StepSchedule::over_span(0.03, 1.0, 0.1).is_err());
        let h = s.halved();
        assert_eq!((h.n_steps, h.record_stride), (200, 20));
    }
}
