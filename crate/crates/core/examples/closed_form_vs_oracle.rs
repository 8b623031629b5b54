//! Evaluates the closed-form matched-filter output of one interferer and
//! compares it with direct numerical integration, both after ideal
//! low-pass filtering and on the full passband product.
//!
//! ```text
//! cargo run --example closed_form_vs_oracle -- [draws]
//! ```

use msk_collide::demod::lambda;
use msk_collide::oracle::{
    oracle_lambda_baseband, oracle_lambda_passband, validate_random, QuadratureConfig,
};
use msk_collide::signal::{multiplex_bits, Branch, InterfererParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> msk_collide::Result<()> {
    let draws: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(1000);
    let cfg = QuadratureConfig::default();

    let payload = multiplex_bits(&[1, -1, -1, 1, 1, 1, -1, 1, -1, -1])?;
    println!(
        "{:>6} {:>6} {:>3} {:>14} {:>14} {:>14}",
        "tau/T", "phi_c", "br", "closed", "baseband", "passband"
    );
    for (tau, phi) in [(0.0, 0.0), (1.0, 0.0), (0.4, 1.2), (-1.7, 2.5), (2.9, 4.0)] {
        let p = InterfererParams::new(1.0, tau, phi, payload.clone())?;
        for branch in [Branch::I, Branch::Q] {
            let closed = lambda(&p, branch, 2, 1.0).value;
            let base = oracle_lambda_baseband(&p, 2, branch, &cfg, 1.0)?;
            let pass = oracle_lambda_passband(&p, 2, branch, &cfg, 1.0)?;
            println!(
                "{tau:>6.2} {phi:>6.2} {branch:>3} {closed:>14.10} {base:>14.10} {pass:>14.10}"
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let report = validate_random(draws, &cfg, false, &mut rng)?;
    println!(
        "\n{} random comparisons: max relative deviation {:.2e}\nworst: {}",
        report.comparisons, report.max_deviation, report.worst_case
    );
    Ok(())
}
