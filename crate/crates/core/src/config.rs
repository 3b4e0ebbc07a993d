//! TOML run configuration.
//!
//! ```toml
//! model = "fermi-hubbard"
//!
//! [fermi_hubbard]
//! lattice = "chain"
//! sites = 4
//! u = 2.0
//! mu = 0.5
//!
//! [schedule]
//! dt = 0.005
//! span = 4.0
//! record_stride = 10
//!
//! [ensemble]
//! trajectories = 20000
//! seed = 7
//! ```
//!
//! Every section except `model` and `schedule` has defaults. After
//! [`parse_config`] every field is populated, so [`RunConfig::to_toml`]
//! reproduces the run exactly.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sde::{EngineConfig, StepSchedule, Stepper};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Kerr,
    BoseHubbardPp,
    BoseHubbardWigner,
    Collision,
    FermiHubbard,
    OracleBose,
    OracleFermi,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Kerr => "kerr",
            ModelKind::BoseHubbardPp => "bose-hubbard-pp",
            ModelKind::BoseHubbardWigner => "bose-hubbard-wigner",
            ModelKind::Collision => "collision",
            ModelKind::FermiHubbard => "fermi-hubbard",
            ModelKind::OracleBose => "oracle-bose",
            ModelKind::OracleFermi => "oracle-fermi",
        }
    }

    pub fn is_oracle(self) -> bool {
        matches!(self, ModelKind::OracleBose | ModelKind::OracleFermi)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeKind {
    #[default]
    None,
    RealPart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepperKind {
    Euler,
    Midpoint,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// Series as `<path>.csv`, metadata and config as `<path>.json`.
    #[default]
    Csv,
    /// Everything in `<path>.json`.
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoseLattice {
    /// One mode; `hopping` is its frequency `ω`.
    Single,
    #[default]
    Dimer,
    Ring,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FermiLattice {
    #[default]
    Chain,
    Rectangle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KerrParams {
    pub n_mean: f64,
    pub omega: f64,
    pub chi: f64,
    pub gauge: GaugeKind,
}

impl Default for KerrParams {
    fn default() -> Self {
        Self {
            n_mean: 100.0,
            omega: 0.0,
            chi: 0.5,
            gauge: GaugeKind::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoseHubbardParams {
    pub lattice: BoseLattice,
    /// Only read for the ring.
    pub sites: usize,
    pub hopping: f64,
    pub chi: f64,
    pub gauge: GaugeKind,
    /// Initial coherent amplitudes, real and imaginary parts; one entry
    /// per site.
    pub initial_re: Vec<f64>,
    pub initial_im: Vec<f64>,
}

impl Default for BoseHubbardParams {
    fn default() -> Self {
        Self {
            lattice: BoseLattice::Dimer,
            sites: 2,
            hopping: 1.0,
            chi: 0.1,
            gauge: GaugeKind::None,
            initial_re: vec![2.0, 0.0],
            initial_im: vec![0.0, 0.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollisionParams {
    pub sites: usize,
    pub hopping: f64,
    pub chi: f64,
    pub n_atoms: f64,
    /// Harmonic trap `V(x) = trap (x − M/2)²` used for the ground state only.
    pub trap: f64,
    pub k_q: f64,
    pub k_s: f64,
    pub seed_fraction: f64,
    pub gp_d_tau: f64,
    pub gp_iterations: usize,
}

impl Default for CollisionParams {
    fn default() -> Self {
        Self {
            sites: 64,
            hopping: 1.0,
            chi: 0.002,
            n_atoms: 1000.0,
            trap: 0.002,
            k_q: PI / 2.0,
            k_s: PI / 2.0 - 2.0 * PI / 64.0 * 3.0,
            seed_fraction: 0.02,
            gp_d_tau: 0.05,
            gp_iterations: 4000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FermiHubbardParams {
    pub lattice: FermiLattice,
    /// Chain length.
    pub sites: usize,
    pub rows: usize,
    pub cols: usize,
    pub periodic: bool,
    pub t: f64,
    pub u: f64,
    pub mu: f64,
}

impl Default for FermiHubbardParams {
    fn default() -> Self {
        Self {
            lattice: FermiLattice::Chain,
            sites: 4,
            rows: 2,
            cols: 2,
            periodic: false,
            t: 1.0,
            u: 2.0,
            mu: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Step `dt` (real time) or `dτ` (inverse temperature).
    pub dt: f64,
    /// Total evolution time or final `τ`.
    pub span: f64,
    #[serde(default = "one")]
    pub record_stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub trajectories: usize,
    pub seed: u64,
    pub n_sub: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            trajectories: 1000,
            seed: 1,
            n_sub: crate::ensemble::DEFAULT_SUBENSEMBLES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineSettings {
    pub stepper: StepperKind,
    pub divergence_threshold: f64,
    pub abort_floor: f64,
    pub midpoint_iterations: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        let e = EngineConfig::default();
        Self {
            stepper: StepperKind::Midpoint,
            divergence_threshold: e.divergence_threshold,
            abort_floor: e.abort_floor,
            midpoint_iterations: e.midpoint_iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Output path without extension.
    pub path: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::from("phasesim-run"),
            format: OutputFormat::Csv,
        }
    }
}

/// Fully populated run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kerr: Option<KerrParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bose_hubbard: Option<BoseHubbardParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision: Option<CollisionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fermi_hubbard: Option<FermiHubbardParams>,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub engine: EngineSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Parses, fills defaults and validates.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    cfg.fill_defaults()?;
    cfg.validate()?;
    Ok(cfg)
}

fn range(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(range(key, format!("must be positive and finite, got {x}")))
    }
}

fn non_negative(key: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(range(key, format!("must be non-negative and finite, got {x}")))
    }
}

fn finite(key: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(range(key, format!("must be finite, got {x}")))
    }
}

impl RunConfig {
    /// Name of the parameter section the model reads.
    fn section(&self) -> &'static str {
        match self.model {
            ModelKind::Kerr => "kerr",
            ModelKind::BoseHubbardPp | ModelKind::BoseHubbardWigner | ModelKind::OracleBose => {
                "bose_hubbard"
            }
            ModelKind::Collision => "collision",
            ModelKind::FermiHubbard | ModelKind::OracleFermi => "fermi_hubbard",
        }
    }

    fn fill_defaults(&mut self) -> Result<()> {
        let wanted = self.section();
        let present = [
            ("kerr", self.kerr.is_some()),
            ("bose_hubbard", self.bose_hubbard.is_some()),
            ("collision", self.collision.is_some()),
            ("fermi_hubbard", self.fermi_hubbard.is_some()),
        ];
        for (name, is_set) in present {
            if is_set && name != wanted {
                return Err(Error::Config(format!(
                    "{name}: section is not used by model {}",
                    self.model.name()
                )));
            }
        }
        match wanted {
            "kerr" => {
                self.kerr.get_or_insert_with(Default::default);
            }
            "bose_hubbard" => {
                self.bose_hubbard.get_or_insert_with(Default::default);
            }
            "collision" => {
                self.collision.get_or_insert_with(Default::default);
            }
            _ => {
                self.fermi_hubbard.get_or_insert_with(Default::default);
            }
        }
        Ok(())
    }

    /// Checks every range; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let s = &self.schedule;
        positive("schedule.dt", s.dt)?;
        non_negative("schedule.span", s.span)?;
        if s.record_stride == 0 {
            return Err(range("schedule.record_stride", "must be at least 1"));
        }
        let n = (s.span / s.dt).round();
        if (n * s.dt - s.span).abs() > 1e-9 * s.span.max(s.dt) {
            return Err(range(
                "schedule.span",
                format!("{} is not a multiple of schedule.dt = {}", s.span, s.dt),
            ));
        }

        let e = &self.ensemble;
        if e.trajectories == 0 {
            return Err(range("ensemble.trajectories", "must be at least 1, got 0"));
        }
        if e.n_sub < 2 {
            return Err(range("ensemble.n_sub", format!("must be at least 2, got {}", e.n_sub)));
        }
        if !self.model.is_oracle() && e.n_sub > e.trajectories {
            return Err(range(
                "ensemble.n_sub",
                format!("{} exceeds ensemble.trajectories = {}", e.n_sub, e.trajectories),
            ));
        }

        let g = &self.engine;
        positive("engine.divergence_threshold", g.divergence_threshold)?;
        if !(0.0..=1.0).contains(&g.abort_floor) {
            return Err(range(
                "engine.abort_floor",
                format!("must lie in [0, 1], got {}", g.abort_floor),
            ));
        }
        if g.midpoint_iterations == 0 {
            return Err(range("engine.midpoint_iterations", "must be at least 1"));
        }
        if self.output.path.as_os_str().is_empty() {
            return Err(range("output.path", "must not be empty"));
        }

        if let Some(k) = &self.kerr {
            positive("kerr.n_mean", k.n_mean)?;
            finite("kerr.omega", k.omega)?;
            non_negative("kerr.chi", k.chi)?;
        }
        if let Some(b) = &self.bose_hubbard {
            finite("bose_hubbard.hopping", b.hopping)?;
            non_negative("bose_hubbard.chi", b.chi)?;
            let sites = self.bose_sites();
            if b.lattice == BoseLattice::Ring && b.sites < 3 {
                return Err(range("bose_hubbard.sites", format!("ring needs at least 3, got {}", b.sites)));
            }
            for (key, v) in [("bose_hubbard.initial_re", &b.initial_re), ("bose_hubbard.initial_im", &b.initial_im)] {
                if v.len() != sites {
                    return Err(range(key, format!("needs {sites} entries, got {}", v.len())));
                }
                if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                    return Err(range(key, format!("must be finite, got {x}")));
                }
            }
            if self.model == ModelKind::BoseHubbardWigner && b.gauge != GaugeKind::None {
                return Err(range("bose_hubbard.gauge", "truncated Wigner runs take no gauge"));
            }
        }
        if let Some(c) = &self.collision {
            if c.sites < 4 {
                return Err(range("collision.sites", format!("must be at least 4, got {}", c.sites)));
            }
            finite("collision.hopping", c.hopping)?;
            non_negative("collision.chi", c.chi)?;
            positive("collision.n_atoms", c.n_atoms)?;
            non_negative("collision.trap", c.trap)?;
            for (key, k) in [("collision.k_q", c.k_q), ("collision.k_s", c.k_s)] {
                if !k.is_finite() || k.abs() > PI {
                    return Err(range(key, format!("must lie in [-π, π], got {k}")));
                }
            }
            if !(0.0..1.0).contains(&c.seed_fraction) {
                return Err(range(
                    "collision.seed_fraction",
                    format!("must lie in [0, 1), got {}", c.seed_fraction),
                ));
            }
            positive("collision.gp_d_tau", c.gp_d_tau)?;
        }
        if let Some(f) = &self.fermi_hubbard {
            match f.lattice {
                FermiLattice::Chain if f.sites == 0 => {
                    return Err(range("fermi_hubbard.sites", "must be at least 1"));
                }
                FermiLattice::Rectangle if f.rows == 0 || f.cols == 0 => {
                    return Err(range("fermi_hubbard.rows", "rows and cols must be at least 1"));
                }
                _ => {}
            }
            finite("fermi_hubbard.t", f.t)?;
            positive("fermi_hubbard.u", f.u)?;
            finite("fermi_hubbard.mu", f.mu)?;
        }
        Ok(())
    }

    pub(crate) fn bose_sites(&self) -> usize {
        match &self.bose_hubbard {
            Some(b) => match b.lattice {
                BoseLattice::Single => 1,
                BoseLattice::Dimer => 2,
                BoseLattice::Ring => b.sites,
            },
            None => 0,
        }
    }

    /// Overrides from the command line; re-validates.
    pub fn with_overrides(mut self, seed: Option<u64>, trajectories: Option<usize>) -> Result<Self> {
        if let Some(s) = seed {
            self.ensemble.seed = s;
        }
        if let Some(n) = trajectories {
            self.ensemble.trajectories = n;
        }
        self.validate()?;
        Ok(self)
    }

    /// The exact-diagonalization counterpart of a simulation config, on
    /// the same schedule.
    pub fn as_oracle(&self) -> Result<Self> {
        let mut c = self.clone();
        c.model = match self.model {
            ModelKind::OracleBose | ModelKind::OracleFermi => self.model,
            ModelKind::BoseHubbardPp | ModelKind::BoseHubbardWigner => ModelKind::OracleBose,
            ModelKind::FermiHubbard => ModelKind::OracleFermi,
            ModelKind::Kerr => {
                let k = self.kerr.as_ref().expect("filled");
                c.kerr = None;
                c.bose_hubbard = Some(BoseHubbardParams {
                    lattice: BoseLattice::Single,
                    sites: 1,
                    hopping: k.omega,
                    chi: k.chi,
                    gauge: GaugeKind::None,
                    initial_re: vec![k.n_mean.sqrt()],
                    initial_im: vec![0.0],
                });
                ModelKind::OracleBose
            }
            ModelKind::Collision => {
                return Err(Error::Config(
                    "model: collision has no exact-diagonalization counterpart".into(),
                ))
            }
        };
        Ok(c)
    }

    pub fn step_schedule(&self) -> Result<StepSchedule> {
        StepSchedule::over_span(self.schedule.dt, self.schedule.span, self.schedule.dt)
            .and_then(|s| StepSchedule::new(s.dt, s.n_steps, self.schedule.record_stride))
    }

    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            stepper: match self.engine.stepper {
                StepperKind::Euler => Stepper::Euler,
                StepperKind::Midpoint => Stepper::Midpoint,
            },
            divergence_threshold: self.engine.divergence_threshold,
            abort_floor: self.engine.abort_floor,
            midpoint_iterations: self.engine.midpoint_iterations,
            ..EngineConfig::default()
        }
    }

    /// Effective configuration, defaults included, as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
