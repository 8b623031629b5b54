//! Soft-decision PRR with one strong or several weaker interferers of the
//! same total power, for identical and independent payloads.
//!
//! ```text
//! cargo run --release --example n_interferers -- [packets]
//! ```

use msk_collide::montecarlo::{n_interferer_experiment, ExperimentConfig};
use msk_collide::receiver::Decoder;

fn main() -> msk_collide::Result<()> {
    let packets = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(500);
    let cfg = ExperimentConfig {
        coding: Decoder::Sdd,
        packets_per_point: packets,
        ..Default::default()
    };
    println!(
        "{:>3} {:>12} {:>12} {:>9} {:>8}",
        "n", "payload", "layout", "prr", "std"
    );
    for r in n_interferer_experiment(&cfg, 8)? {
        println!(
            "{:>3} {:>12} {:>12} {:>9.3} {:>8.3}",
            r.n,
            r.payload_mode.to_string(),
            r.layout.to_string(),
            r.point.prr_mean,
            r.point.prr_std
        );
    }
    Ok(())
}
