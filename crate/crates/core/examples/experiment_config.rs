//! Loads an experiment config and runs it the way the `eikonal run` command
//! does, writing CSV and JSON into a temporary directory.
//!
//!     cargo run --example experiment_config -- configs/maze.json

use std::path::PathBuf;

use eikonal_twoscale::cli::config::ExperimentConfig;
use eikonal_twoscale::cli::{cmd_reference, cmd_run};

fn main() -> eikonal_twoscale::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke_constant.json"));
    let mut cfg = ExperimentConfig::load(&path)?;
    let out = std::env::temp_dir().join("eikonal-example");
    cfg.output.dir = out.clone();
    let cfg = cfg.resolve()?;

    cmd_reference(&cfg)?;
    cmd_run(&cfg)?;
    let history = std::fs::read_to_string(out.join("history.csv"))?;
    for line in history.lines() {
        let cols: Vec<&str> = line.split(',').take(6).collect();
        println!("{}", cols.join("  "));
    }
    println!("outputs in {}", out.display());
    Ok(())
}
