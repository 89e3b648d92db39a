//! The λ-sweep through the config-driven harness: exact occupations at
//! `t = T/λ²` against the Boltzmann solution at kinetic time `T`.
//!
//! `cargo run --release --example harness_sweep`

use qboltz::harness::{parse_config, run, Command};
use qboltz::output::read_rows;

fn main() -> qboltz::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/sweep.conf");
    let mut config = parse_config(path)?;
    config.output_dir = std::env::temp_dir().join("qboltz-sweep-example");
    let table = run(Command::Sweep, &config)?;
    for row in read_rows(table.path("sweep.csv"))? {
        println!(
            "λ = {:<5} t = {:<8.3} exact error = {}  memory error = {}",
            row[0].parse::<f64>().unwrap_or(f64::NAN),
            row[1].parse::<f64>().unwrap_or(f64::NAN),
            row[2],
            row[3]
        );
    }
    for (k, v) in &table.summary {
        println!("{k} = {v}");
    }
    println!("artifacts in {}", table.dir.display());
    Ok(())
}
