//! ASCII map of the region of time and phase offsets in which a much
//! stronger interferer is received by a receiver synchronized to another
//! sender.
//!
//! ```text
//! cargo run --release --example capture_zone -- [uncoded|hdd|sdd] [packets]
//! ```

use msk_collide::montecarlo::{capture_zone, grid, phase_grid, ExperimentConfig, TargetSender};
use msk_collide::receiver::Decoder;

fn main() -> msk_collide::Result<()> {
    let coding: Decoder = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("hdd")
        .parse()?;
    let packets = std::env::args()
        .nth(2)
        .and_then(|a| a.parse().ok())
        .unwrap_or(100);
    let cfg = ExperimentConfig {
        coding,
        target: TargetSender::Interferer,
        packets_per_point: packets,
        tau_grid: grid(-1.5, 1.5, 0.125),
        phi_grid: phase_grid(32),
        ..Default::default()
    };
    let map = capture_zone(&cfg, -40.0)?;
    println!("{coding} error rate at SIR = -40 dB ('#' < 1 %, '+' < 10 %, '.' < 50 %)");
    println!("phi_c from -pi (left) to pi (right), tau from -1.5T (top) to 1.5T (bottom)");
    for (t, tau) in map.tau_grid.iter().enumerate() {
        let row: String = (0..map.phi_grid.len())
            .map(|f| match map.error_rate(t, f) {
                e if e < 0.01 => '#',
                e if e < 0.1 => '+',
                e if e < 0.5 => '.',
                _ => ' ',
            })
            .collect();
        println!("{tau:>6.3} |{row}|");
    }
    Ok(())
}
