//! Builds, evolves and records a run described by a [`RunConfig`], and
//! writes the resulting artifact.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::boson::collision::{opposite_bin, wavenumber};
use crate::boson::{
    estimate_g1, estimate_g2, gp_ground_state, init_collision_state, mean_amplitude,
    momentum_ensemble, number, quadrature_variance, wigner_initial_ensemble, BoseGauge,
    BoseHubbardPositiveP, BoseHubbardWigner, BoseLatticeModel, CollisionSetup, KerrGauge,
    KerrProblem, Representation,
};
use crate::boson::observables::mean_amplitude_squared;
use crate::config::{
    BoseLattice, FermiLattice, GaugeKind, ModelKind, OutputFormat, RunConfig, StepperKind,
};
use crate::ensemble::{Ensemble, PhasePoint, C64};
use crate::error::{Error, Result};
use crate::fermion::{init_infinite_temperature, thermal_run, FermiHubbardModel, ThermalSchedule};
use crate::oracle::{ed_bose_evolve, ed_fermi_thermal, fermi_oracle_series};
use crate::sde::{evolve, EvolveReport, SdeProblem};
use crate::series::{Axis, MomentSeries, Observation};

/// Where a run stopped early because too many trajectories diverged.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbortInfo {
    pub alive_fraction: f64,
    pub floor: f64,
    pub step: usize,
    pub time: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub version: &'static str,
    pub scheme: String,
    pub wall_time_s: f64,
    pub dead_trajectories: usize,
    pub alive_fraction: f64,
    pub midpoint_fallbacks: usize,
    pub aborted: Option<AbortInfo>,
    /// Model-specific diagnostics (oracle cutoff, reality checks, ...).
    pub diagnostics: Map<String, Value>,
}

#[derive(Clone, Debug)]
pub struct RunArtifact {
    pub config: RunConfig,
    pub series: MomentSeries,
    pub metadata: RunMetadata,
}

impl RunArtifact {
    pub fn aborted(&self) -> bool {
        self.metadata.aborted.is_some()
    }

    /// Metadata wrapper: effective config, metadata and, for the JSON
    /// format, the series itself.
    pub fn to_json(&self, with_series: bool) -> Value {
        let mut v = json!({
            "config": self.config,
            "metadata": self.metadata,
        });
        if with_series {
            v["series"] = self.series.to_json();
        }
        v
    }
}

/// Runs the configured model. An abort-floor breach is not an error: the
/// partial series is returned with [`RunMetadata::aborted`] set.
pub fn run(config: &RunConfig) -> Result<RunArtifact> {
    config.validate()?;
    let start = Instant::now();
    let mut diagnostics = Map::new();
    let outcome = match config.model {
        ModelKind::Kerr => run_kerr(config),
        ModelKind::BoseHubbardPp | ModelKind::BoseHubbardWigner => run_bose_hubbard(config),
        ModelKind::Collision => run_collision(config, &mut diagnostics),
        ModelKind::FermiHubbard => run_fermi(config, &mut diagnostics),
        ModelKind::OracleBose => run_oracle_bose(config, &mut diagnostics),
        ModelKind::OracleFermi => run_oracle_fermi(config),
    };
    let scheme = if config.model.is_oracle() {
        "exact-diagonalization".to_string()
    } else {
        match config.engine.stepper {
            StepperKind::Euler => "ito-euler".into(),
            StepperKind::Midpoint => "ito-midpoint".into(),
        }
    };
    let n = config.ensemble.trajectories;
    let (series, dead, fallbacks, aborted) = match outcome {
        Ok(r) => (r.series, r.dead, r.midpoint_fallbacks, None),
        Err(Error::AbortFloor {
            alive_fraction,
            floor,
            step,
            time,
            partial,
        }) => {
            let dead = ((1.0 - alive_fraction) * n as f64).round() as usize;
            let info = AbortInfo { alive_fraction, floor, step, time };
            (*partial, dead, 0, Some(info))
        }
        Err(e) => return Err(e),
    };
    let alive_fraction = if config.model.is_oracle() {
        1.0
    } else {
        1.0 - dead as f64 / n as f64
    };
    Ok(RunArtifact {
        config: config.clone(),
        series,
        metadata: RunMetadata {
            version: env!("CARGO_PKG_VERSION"),
            scheme,
            wall_time_s: start.elapsed().as_secs_f64(),
            dead_trajectories: dead,
            alive_fraction,
            midpoint_fallbacks: fallbacks,
            aborted,
            diagnostics,
        },
    })
}

/// Writes the artifact according to `config.output`; returns the paths.
pub fn write_artifact(artifact: &RunArtifact) -> Result<Vec<PathBuf>> {
    let base = &artifact.config.output.path;
    if let Some(dir) = base.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let with_ext = |ext: &str| {
        let mut p = base.clone().into_os_string();
        p.push(".");
        p.push(ext);
        PathBuf::from(p)
    };
    let json_path = with_ext("json");
    let mut written = Vec::new();
    match artifact.config.output.format {
        OutputFormat::Csv => {
            let csv_path = with_ext("csv");
            fs::write(&csv_path, artifact.series.to_csv())?;
            written.push(csv_path);
            fs::write(&json_path, pretty(&artifact.to_json(false)))?;
        }
        OutputFormat::Json => {
            fs::write(&json_path, pretty(&artifact.to_json(true)))?;
        }
    }
    written.push(json_path);
    Ok(written)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn bose_model(config: &RunConfig) -> Result<(BoseLatticeModel, Vec<C64>)> {
    let b = config.bose_hubbard.as_ref().expect("filled by parse");
    let model = match b.lattice {
        BoseLattice::Single => BoseLatticeModel::single_mode(b.hopping, b.chi),
        BoseLattice::Dimer => BoseLatticeModel::dimer(b.hopping, b.chi),
        BoseLattice::Ring => BoseLatticeModel::ring(b.sites, b.hopping, b.chi)?,
    };
    let alpha = b
        .initial_re
        .iter()
        .zip(&b.initial_im)
        .map(|(&re, &im)| C64::new(re, im))
        .collect();
    Ok((model, alpha))
}

/// `a_j`, `n_j` per mode then `g2_jj` per mode: the oracle column layout.
fn bose_columns(
    e: &Ensemble<PhasePoint>,
    repr: Representation,
    n_sub: usize,
) -> Result<Vec<Observation>> {
    let m = e.modes();
    let mut obs = Vec::with_capacity(3 * m);
    for j in 0..m {
        obs.push(Observation::complex(format!("a_{j}"), mean_amplitude(e, j, n_sub)?));
        obs.push(Observation::real(format!("n_{j}"), number(e, j, repr, n_sub)?));
    }
    for j in 0..m {
        obs.push(Observation::real(format!("g2_{j}{j}"), estimate_g2(e, j, j, repr, n_sub)?));
    }
    Ok(obs)
}

fn evolve_bose<S: SdeProblem + ?Sized>(
    config: &RunConfig,
    ens: &mut Ensemble<PhasePoint>,
    problem: &S,
    repr: Representation,
) -> Result<EvolveReport> {
    let n_sub = config.ensemble.n_sub;
    evolve(
        ens,
        problem,
        &config.step_schedule()?,
        &config.engine_config(),
        Axis::Time,
        |e| {
            let mut obs = bose_columns(e, repr, n_sub)?;
            obs.push(Observation::complex("a2_0", mean_amplitude_squared(e, 0, n_sub)?));
            obs.push(Observation::real("xvar_0", quadrature_variance(e, 0, 0.0, repr, n_sub)?));
            obs.push(Observation::real(
                "pvar_0",
                quadrature_variance(e, 0, std::f64::consts::FRAC_PI_2, repr, n_sub)?,
            ));
            Ok(obs)
        },
    )
}

fn run_kerr(config: &RunConfig) -> Result<EvolveReport> {
    let k = config.kerr.as_ref().expect("filled by parse");
    let gauge = match k.gauge {
        GaugeKind::None => KerrGauge::None,
        GaugeKind::RealPart => KerrGauge::RealPart,
    };
    let problem = KerrProblem::new(k.omega, k.n_mean, gauge)?.with_chi(k.chi);
    let mut ens = problem.initial_ensemble(config.ensemble.trajectories, config.ensemble.seed)?;
    evolve_bose(config, &mut ens, &problem, Representation::PositiveP)
}

fn run_bose_hubbard(config: &RunConfig) -> Result<EvolveReport> {
    let (model, alpha) = bose_model(config)?;
    let (n, seed) = (config.ensemble.trajectories, config.ensemble.seed);
    if config.model == ModelKind::BoseHubbardWigner {
        let problem = BoseHubbardWigner::new(&model);
        let mut ens = wigner_initial_ensemble(&alpha, n, seed)?;
        return evolve_bose(config, &mut ens, &problem, Representation::Wigner);
    }
    let gauge = match config.bose_hubbard.as_ref().expect("filled").gauge {
        GaugeKind::None => BoseGauge::None,
        GaugeKind::RealPart => BoseGauge::RealPart,
    };
    let problem = BoseHubbardPositiveP::new(&model).with_gauge(gauge);
    let mut ens = problem.coherent_ensemble(&alpha, n, seed)?;
    evolve_bose(config, &mut ens, &problem, Representation::PositiveP)
}

fn run_collision(
    config: &RunConfig,
    diagnostics: &mut Map<String, Value>,
) -> Result<EvolveReport> {
    let c = config.collision.as_ref().expect("filled by parse");
    let m = c.sites;
    let model = BoseLatticeModel::ring(m, c.hopping, c.chi)?;
    let centre = m as f64 / 2.0;
    let trap: Vec<f64> = (0..m).map(|x| c.trap * (x as f64 - centre).powi(2)).collect();
    let gp = gp_ground_state(&model, &trap, c.n_atoms, c.gp_d_tau, c.gp_iterations)?;
    let setup = CollisionSetup {
        k_q: c.k_q,
        k_s: c.k_s,
        seed_fraction: c.seed_fraction,
    };
    let mut ens =
        init_collision_state(&model, &gp, &setup, config.ensemble.trajectories, config.ensemble.seed)?;
    let problem = BoseHubbardPositiveP::new(&model);
    let n_sub = config.ensemble.n_sub;
    let wavenumbers: Vec<Value> = (0..m).map(|q| json!(wavenumber(q, m))).collect();
    diagnostics.insert("wavenumbers".into(), Value::Array(wavenumbers));
    let report = evolve(
        &mut ens,
        &problem,
        &config.step_schedule()?,
        &config.engine_config(),
        Axis::Time,
        |e| collision_columns(e, n_sub),
    )?;
    Ok(report)
}

/// Momentum densities `nk_q` and the pair table `g2_same_q = g⁽²⁾(k,k)`,
/// `g2_opp_q = g⁽²⁾(k,−k)`, `g1_opp_q = g⁽¹⁾(k,−k)` per DFT bin `q`.
pub fn collision_columns(e: &Ensemble<PhasePoint>, n_sub: usize) -> Result<Vec<Observation>> {
    let k = momentum_ensemble(e);
    let m = k.modes();
    let repr = Representation::PositiveP;
    let mut obs = Vec::with_capacity(4 * m);
    for q in 0..m {
        obs.push(Observation::real(format!("nk_{q}"), number(&k, q, repr, n_sub)?));
    }
    for q in 0..m {
        let o = opposite_bin(q, m);
        obs.push(Observation::real(format!("g2_same_{q}"), estimate_g2(&k, q, q, repr, n_sub)?));
        obs.push(Observation::real(format!("g2_opp_{q}"), estimate_g2(&k, q, o, repr, n_sub)?));
        obs.push(Observation::complex(format!("g1_opp_{q}"), estimate_g1(&k, q, o, n_sub)?));
    }
    Ok(obs)
}

pub(crate) fn fermi_model(config: &RunConfig) -> Result<FermiHubbardModel> {
    let f = config.fermi_hubbard.as_ref().expect("filled by parse");
    match f.lattice {
        FermiLattice::Chain => FermiHubbardModel::chain(f.sites, f.t, f.u, f.mu, f.periodic),
        FermiLattice::Rectangle => {
            FermiHubbardModel::rectangle(f.rows, f.cols, f.t, f.u, f.mu, f.periodic)
        }
    }
}

fn run_fermi(config: &RunConfig, diagnostics: &mut Map<String, Value>) -> Result<EvolveReport> {
    let model = fermi_model(config)?;
    let s = &config.schedule;
    let schedule = ThermalSchedule::new(s.span, s.dt, s.dt * s.record_stride as f64)?;
    let mut ens =
        init_infinite_temperature(&model, config.ensemble.trajectories, config.ensemble.seed)?;
    let report = thermal_run(&mut ens, &model, &schedule, &config.engine_config(), config.ensemble.n_sub)?;
    diagnostics.insert("max_relative_imaginary".into(), json!(report.max_imaginary));
    diagnostics.insert("positive_weight_fraction".into(), json!(report.positive_weight_fraction));
    Ok(report.evolve)
}

/// Record times of the configured schedule.
fn record_times(config: &RunConfig) -> Result<Vec<f64>> {
    let s = config.step_schedule()?;
    Ok((0..=s.n_steps)
        .step_by(s.record_stride)
        .map(|k| k as f64 * s.dt)
        .collect())
}

fn oracle_report(series: MomentSeries) -> EvolveReport {
    EvolveReport {
        series,
        midpoint_fallbacks: 0,
        dead: 0,
        alive_fraction: 1.0,
    }
}

fn run_oracle_bose(
    config: &RunConfig,
    diagnostics: &mut Map<String, Value>,
) -> Result<EvolveReport> {
    let (model, alpha) = bose_model(config)?;
    let oracle = ed_bose_evolve(&model, &alpha, &record_times(config)?)?;
    diagnostics.insert("cutoff".into(), json!(oracle.cutoff));
    diagnostics.insert("norm_deficit".into(), json!(oracle.deficit));
    diagnostics.insert("dimension".into(), json!(oracle.dimension));
    Ok(oracle_report(oracle.to_series()))
}

fn run_oracle_fermi(config: &RunConfig) -> Result<EvolveReport> {
    let model = fermi_model(config)?;
    let rows = ed_fermi_thermal(&model, &record_times(config)?)?;
    Ok(oracle_report(fermi_oracle_series(&rows)))
}
