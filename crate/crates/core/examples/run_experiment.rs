//! Runs an experiment config through the harness and prints the summary.
//!
//! `cargo run --example run_experiment -- examples/configs/b_limit_b3.json`

use std::path::PathBuf;

use bergman::harness::{run, ExperimentConfig};
use bergman::Result;

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/b_limit_b3.json")));
    let config = ExperimentConfig::load(&path)?;
    let report = run(&config)?;
    println!("{}: {} ({} rows)", config.experiment, report.verdict(), report.summary.rows);
    for check in &report.summary.checks {
        let value = check.value.map_or("-".to_string(), |v| format!("{v:.4e}"));
        println!("  {:<28} {value:>12} {:?} {:e} -> {:?}", check.name, check.comparison, check.threshold, check.passed);
    }
    for (name, fit) in &report.summary.fits {
        println!("  fit {name}: {} exponent {:?} amplitude {:?}", fit.status, fit.exponent, fit.amplitude);
    }
    Ok(())
}
