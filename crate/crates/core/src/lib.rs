//! Weighted phase-space trajectory simulation of interacting bosons and
//! fermions on lattices, with exact-diagonalization references.

pub mod boson;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod fermion;
pub mod oracle;
pub mod run;
pub mod sde;
pub mod series;

pub use ensemble::{
    Ensemble, FermiPoint, ObservableEstimate, PhasePoint, PhaseSpacePoint, Spin, C64,
    DEFAULT_SUBENSEMBLES,
};
pub use config::{parse_config, RunConfig};
pub use error::{Error, Result};
pub use run::{run, write_artifact, RunArtifact};
pub use sde::{evolve, EngineConfig, SdeProblem, StepSchedule, Stepper};
pub use series::{Axis, MomentSeries, Observation};
