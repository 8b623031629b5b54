//! Runs a sweep described by a TOML file, the same format the CLI accepts
//! with `--config`, and writes CSV to stdout.
//!
//! ```text
//! cargo run --release --example config_file -- experiment.toml
//! ```
//!
//! Without an argument a small built-in configuration is used.

use msk_collide::montecarlo::{sweep, ExperimentConfig};

const SAMPLE: &str = r#"
packets_per_point = 200
payload_bits = 64
payload_mode = "independent"
coding = "hdd"
target = "soi"
tau_grid = [0.0, 1.0, 2.0]
sir_db_grid = [-4.0, -2.0, 0.0, 2.0, 4.0]
phi_mode = "random_uniform"
master_seed = 42
"#;

fn main() -> msk_collide::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path)
            .map_err(|e| msk_collide::Error::Config(format!("{path}: {e}")))?,
        None => SAMPLE.to_string(),
    };
    let cfg = ExperimentConfig::from_toml(&text)?;
    let grid = sweep(&cfg)?;
    println!("tau_over_T,sir_db,prr_mean,prr_std,ber,ser,packets");
    for p in &grid.points {
        println!(
            "{},{},{},{},{},{},{}",
            p.tau, p.sir_db, p.prr_mean, p.prr_std, p.ber, p.ser, p.packets
        );
    }
    Ok(())
}
