//! SIR capture threshold against time offset for the three receivers with
//! independent payloads.
//!
//! ```text
//! cargo run --release --example capture_threshold -- [packets_per_point]
//! ```

use msk_collide::montecarlo::{grid, sweep, threshold_extract, ExperimentConfig};
use msk_collide::receiver::Decoder;

fn main() -> msk_collide::Result<()> {
    let packets = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(200);
    let taus = grid(0.0, 2.0, 0.25);
    println!("{:>8} {:>9} {:>9} {:>9}", "tau/T", "uncoded", "hdd", "sdd");
    let mut curves = Vec::new();
    for coding in [Decoder::Uncoded, Decoder::Hdd, Decoder::Sdd] {
        let cfg = ExperimentConfig {
            coding,
            packets_per_point: packets,
            tau_grid: taus.clone(),
            sir_db_grid: grid(-12.0, 6.0, 0.5),
            ..Default::default()
        };
        curves.push(threshold_extract(&sweep(&cfg)?, 0.9));
    }
    for (i, tau) in taus.iter().enumerate() {
        let cell = |c: &Vec<msk_collide::montecarlo::ThresholdPoint>| match c[i].sir_db {
            Some(v) => format!("{v:>8.2}"),
            None => format!("{:>8}", "-"),
        };
        println!(
            "{tau:>8.2} {} {} {}  dB",
            cell(&curves[0]),
            cell(&curves[1]),
            cell(&curves[2])
        );
    }
    Ok(())
}
