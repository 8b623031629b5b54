//! One packet collision, decoded by all three receivers.
//!
//! ```text
//! cargo run --example single_collision -- [sir_db] [tau_over_T] [phi_c]
//! ```

use msk_collide::montecarlo::interference_amplitude;
use msk_collide::receiver::{decode_packet, soft_packet, Decoder, Target};
use msk_collide::signal::{
    make_payload, InterfererParams, PayloadCoding, PayloadMode, Scenario, IEEE_802_15_4,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> msk_collide::Result<()> {
    let arg = |i: usize, default: f64| {
        std::env::args()
            .nth(i)
            .and_then(|a| a.parse().ok())
            .unwrap_or(default)
    };
    let (sir_db, tau, phi_c) = (arg(1, 0.0), arg(2, 0.5), arg(3, 0.8));
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    for decoder in [Decoder::Uncoded, Decoder::Hdd, Decoder::Sdd] {
        let coding = if decoder.is_coded() {
            PayloadCoding::Coded
        } else {
            PayloadCoding::Uncoded
        };
        let (soi, other) = make_payload(PayloadMode::Independent, coding, 64, &mut rng)?;
        let interferer = InterfererParams::new(interference_amplitude(sir_db), tau, phi_c, other)?;
        let scenario = Scenario::new(1.0, soi, vec![interferer])?;

        let soft = soft_packet(&scenario, &scenario.soi_payload, &mut rng);
        let preview: Vec<String> = soft.iter().take(8).map(|v| format!("{v:+.3}")).collect();
        let out = decode_packet(&scenario, decoder, Target::Soi, &IEEE_802_15_4, &mut rng)?;
        println!(
            "{decoder:>7}: {} soft bits (first: {}), {} / {} bit errors, {} / {} symbol errors, packet {}",
            soft.len(),
            preview.join(" "),
            out.bit_errors,
            out.bits,
            out.symbol_errors,
            out.symbols,
            if out.success() { "received" } else { "lost" }
        );
    }
    Ok(())
}
