//! PRR against SIR when both senders transmit the same packet, as in
//! flooding protocols that rely on concurrent transmissions.
//!
//! ```text
//! cargo run --release --example identical_payload -- [packets]
//! ```

use msk_collide::montecarlo::{grid, sweep, ExperimentConfig};
use msk_collide::receiver::Decoder;
use msk_collide::signal::PayloadMode;

fn main() -> msk_collide::Result<()> {
    let packets = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(500);
    let sirs = grid(-40.0, 10.0, 5.0);
    print!("{:>8} {:>8}", "coding", "tau/T");
    for s in &sirs {
        print!("{s:>7}");
    }
    println!("   (SIR dB)");
    for coding in [Decoder::Uncoded, Decoder::Hdd, Decoder::Sdd] {
        let cfg = ExperimentConfig {
            coding,
            payload_mode: PayloadMode::Identical,
            packets_per_point: packets,
            tau_grid: vec![0.0, 0.5, 1.0],
            sir_db_grid: sirs.clone(),
            ..Default::default()
        };
        let g = sweep(&cfg)?;
        for (t, tau) in g.tau_grid.iter().enumerate() {
            print!("{coding:>8} {tau:>8.2}");
            for p in g.column(t) {
                print!("{:>7.3}", p.prr_mean);
            }
            println!();
        }
    }
    Ok(())
}
