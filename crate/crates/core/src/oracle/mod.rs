//! Dense exact-diagonalization references for small lattices.

pub mod bose;
pub mod fermi;

pub use bose::{coherent_cutoff, ed_bose_evolve, BoseOracle, BoseOracleRow};
pub use fermi::{
    ed_fermi_thermal, fermi_oracle_series, free_fermion_averages, thermal_averages, FermiOracleRow,
};

/// Largest Hilbert-space dimension an oracle accepts.
pub const MAX_DIMENSION: usize = 1_000_000;

/// Largest single symmetry block that is diagonalized densely.
pub const MAX_BLOCK: usize = 6_000;

/// Largest truncated coherent-state norm deficit accepted.
pub const MAX_DEFICIT: f64 = 1e-10;
