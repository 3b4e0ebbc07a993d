//! Collision of two counter-propagating packets cut from a trapped
//! condensate, with a weak seed. Prints momentum occupations and the
//! same-mode and opposite-mode second-order correlations.
//!
//! cargo run --release --example bec_collision

use phasesim::config::parse_config;
use phasesim::run;

const CONFIG: &str = r#"
model = "collision"

[collision]
sites = 64
chi = 0.002
n_atoms = 1000
trap = 0.002

[schedule]
dt = 0.01
span = 1.0
record_stride = 50

[ensemble]
trajectories = 4000
seed = 6
n_sub = 20
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = parse_config(CONFIG)?;
    let artifact = run(&config)?;
    let series = &artifact.series;
    let last = series.rows.last().expect("at least one record");
    let value = |name: String| last.values[series.column_index(&name).expect("known column")];

    println!("t = {}", last.time);
    println!("{:>3} {:>18} {:>16} {:>16}", "q", "n_k", "g2(k,k)", "g2(k,-k)");
    for q in 0..64 {
        let (n, same, opp) = (value(format!("nk_{q}")), value(format!("g2_same_{q}")), value(format!("g2_opp_{q}")));
        println!(
            "{q:3} {:9.4} ± {:6.4} {:7.2} ± {:6.2} {:7.2} ± {:6.2}",
            n.mean.re, n.std_error_re, same.mean.re, same.std_error_re, opp.mean.re, opp.std_error_re
        );
    }
    Ok(())
}
