use std::path::Path;
use std::process::Command;

use phasesim::config::parse_config;
use phasesim::oracle::ed_fermi_thermal;
use phasesim::{run, write_artifact};

fn fermi_config(dir: &Path, name: &str, trajectories: usize) -> String {
    format!(
        r#"
model = "fermi-hubbard"

[fermi_hubbard]
lattice = "chain"
sites = 4
t = 1.0
u = 2.0
mu = 1.0

[schedule]
dt = 0.01
span = 1.0
record_stride = 10

[ensemble]
trajectories = {trajectories}
seed = 4

[output]
path = "{}"
"#,
        dir.join(name).display()
    )
}

#[test]
fn identical_configs_give_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&fermi_config(dir.path(), "a", 400)).unwrap();
    let first = run(&cfg).unwrap();
    let second = run(&cfg).unwrap();
    assert_eq!(first.series.to_csv(), second.series.to_csv());
    let paths = write_artifact(&first).unwrap();
    assert_eq!(paths.len(), 2);
    let csv = std::fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(csv, second.series.to_csv());
}

#[test]
fn four_site_reference_matches_exact_diagonalization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&fermi_config(dir.path(), "ref", 4000)).unwrap();
    let artifact = run(&cfg).unwrap();
    let docc = artifact.series.column("double_occupancy").unwrap();
    let taus = artifact.series.times();
    let model = phasesim::fermion::FermiHubbardModel::chain(4, 1.0, 2.0, 1.0, false).unwrap();
    let exact = ed_fermi_thermal(&model, &taus).unwrap();
    for (est, ex) in docc.iter().zip(&exact).skip(1) {
        assert!(est.agrees_re(ex.double_occupancy, 3.0), "tau {}: {est:?} vs {}", ex.tau, ex.double_occupancy);
    }
    assert_eq!(artifact.metadata.diagnostics["positive_weight_fraction"], 1.0);
}

#[test]
fn oracle_and_simulation_share_grid_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = parse_config(&fermi_config(dir.path(), "sim", 100)).unwrap();
    let sim = run(&sim_cfg).unwrap();
    let ed = run(&sim_cfg.as_oracle().unwrap()).unwrap();
    assert_eq!(sim.series.times(), ed.series.times());
    assert_eq!(sim.series.csv_header(), ed.series.csv_header());
    assert_eq!(ed.metadata.scheme, "exact-diagonalization");
}

#[test]
fn kerr_oracle_shares_amplitude_columns() {
    let text = "model = \"kerr\"\n[kerr]\nn_mean = 10.0\n[schedule]\ndt = 0.01\nspan = 0.1\nrecord_stride = 5\n\
                [ensemble]\ntrajectories = 2000\n";
    let cfg = parse_config(text).unwrap();
    let sim = run(&cfg).unwrap();
    let ed = run(&cfg.as_oracle().unwrap()).unwrap();
    assert_eq!(sim.series.times(), ed.series.times());
    let a_sim = sim.series.column("a_0").unwrap();
    let a_ed = ed.series.column("a_0").unwrap();
    for (s, e) in a_sim.iter().zip(&a_ed) {
        assert!(s.agrees(e.mean, 3.0) || (s.mean - e.mean).norm() < 1e-12, "{s:?} vs {e:?}");
    }
}

#[test]
fn abort_floor_yields_partial_artifact() {
    let text = "model = \"kerr\"\n[schedule]\ndt = 0.01\nspan = 2.0\nrecord_stride = 10\n\
                [ensemble]\ntrajectories = 200\n[engine]\ndivergence_threshold = 12.0\n";
    let cfg = parse_config(text).unwrap();
    let artifact = run(&cfg).unwrap();
    assert!(artifact.aborted());
    assert!(!artifact.series.rows.is_empty());
    assert!(artifact.series.rows.len() < 21);
    assert!(artifact.metadata.dead_trajectories > 0);
}

fn phasesim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_phasesim")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, fermi_config(dir.path(), "cli", 50)).unwrap();
    let g = good.to_str().unwrap();

    let out = phasesim(&["fermi-hubbard", "--config", g, "--seed", "3", "--trajectories", "40"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = std::fs::read_to_string(dir.path().join("cli.json")).unwrap();
    assert!(meta.contains("\"trajectories\": 40"));
    assert!(dir.path().join("cli.csv").exists());

    let out = phasesim(&["oracle", "--config", g]);
    assert_eq!(out.status.code(), Some(0));

    // Wrong subcommand for the model.
    assert_eq!(phasesim(&["kerr", "--config", g]).status.code(), Some(2));
    // Range error on the override.
    assert_eq!(phasesim(&["fermi-hubbard", "--config", g, "--trajectories", "0"]).status.code(), Some(2));
    // Missing file.
    let missing = dir.path().join("missing.toml");
    assert_eq!(phasesim(&["kerr", "--config", missing.to_str().unwrap()]).status.code(), Some(4));

    let abort = dir.path().join("abort.toml");
    std::fs::write(
        &abort,
        format!(
            "model = \"kerr\"\n[schedule]\ndt = 0.01\nspan = 2.0\n[ensemble]\ntrajectories = 100\n\
             [engine]\ndivergence_threshold = 12.0\n[output]\npath = \"{}\"\n",
            dir.path().join("abort").display()
        ),
    )
    .unwrap();
    assert_eq!(phasesim(&["kerr", "--config", abort.to_str().unwrap()]).status.code(), Some(3));
    assert!(dir.path().join("abort.csv").exists());

    // Unwritable output location.
    let blocked = dir.path().join("blocked");
    std::fs::write(&blocked, "").unwrap();
    let io = dir.path().join("io.toml");
    std::fs::write(
        &io,
        fermi_config(dir.path(), "x", 20).replace(
            &dir.path().join("x").display().to_string(),
            &blocked.join("out").display().to_string(),
        ),
    )
    .unwrap();
    assert_eq!(phasesim(&["fermi-hubbard", "--config", io.to_str().unwrap()]).status.code(), Some(4));
}
