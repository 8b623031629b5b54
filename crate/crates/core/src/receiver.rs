//! Bit and symbol decisions from demodulator soft outputs.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::demod::{noise_sample, InterfererTaps};
use crate::error::{Error, Result};
use crate::signal::{Branch, ChipTable, IqStream, Scenario, CHIPS_PER_SYMBOL, SYMBOL_COUNT};

/// Hard decision on a soft bit; an exact zero maps to `+1`.
#[inline]
pub fn slice(soft: f64) -> i8 {
    if soft < 0.0 {
        -1
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolDecision {
    pub symbol: u8,
    /// Absolute correlation of the winning chip sequence.
    pub correlation: f64,
    /// Winner minus best other absolute correlation.
    pub runner_up_gap: f64,
}

/// Bipolar copy of a chip table, laid out for repeated correlation.
#[derive(Debug, Clone)]
pub struct Correlator {
    rows: [[f64; CHIPS_PER_SYMBOL]; SYMBOL_COUNT],
}

impl Correlator {
    pub fn new(table: &ChipTable) -> Self {
        let mut rows = [[0.0; CHIPS_PER_SYMBOL]; SYMBOL_COUNT];
        for (dst, src) in rows.iter_mut().zip(table.rows()) {
            for (d, &c) in dst.iter_mut().zip(src) {
                *d = if c == 1 { 1.0 } else { -1.0 };
            }
        }
        Correlator { rows }
    }

    /// Absolute correlation of 32 chips with every sequence.
    pub fn correlations(&self, chips: &[f64]) -> Result<[f64; SYMBOL_COUNT]> {
        let chips: &[f64; CHIPS_PER_SYMBOL] = chips.try_into().map_err(|_| Error::ChipCount {
            expected: CHIPS_PER_SYMBOL,
            got: chips.len(),
        })?;
        let mut out = [0.0; SYMBOL_COUNT];
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().zip(chips).map(|(r, x)| r * x).sum::<f64>().abs();
        }
        Ok(out)
    }

    pub fn decode(&self, chips: &[f64]) -> Result<SymbolDecision> {
        Ok(argmax(&self.correlations(chips)?))
    }
}

/// Absolute correlation of `chips` with every bipolar sequence in `table`.
pub fn correlations(chips: &[f64], table: &ChipTable) -> Result<[f64; SYMBOL_COUNT]> {
    Correlator::new(table).correlations(chips)
}

fn argmax(corr: &[f64; SYMBOL_COUNT]) -> SymbolDecision {
    let mut best = 0;
    for s in 1..SYMBOL_COUNT {
        // strict: ties keep the lowest symbol
        if corr[s] > corr[best] {
            best = s;
        }
    }
    let runner_up = corr
        .iter()
        .enumerate()
        .filter(|(s, _)| *s != best)
        .map(|(_, c)| *c)
        .fold(f64::NEG_INFINITY, f64::max);
    SymbolDecision {
        symbol: best as u8,
        correlation: corr[best],
        runner_up_gap: (corr[best] - runner_up).max(0.0),
    }
}

/// Hard decision decoding of 32 sliced chips.
pub fn hdd_decode(chips: &[i8], table: &ChipTable) -> Result<SymbolDecision> {
    let soft: Vec<f64> = chips.iter().map(|&c| c as f64).collect();
    Ok(argmax(&correlations(&soft, table)?))
}

/// Soft decision decoding of 32 unquantized demodulator outputs.
pub fn sdd_decode(soft_chips: &[f64], table: &ChipTable) -> Result<SymbolDecision> {
    Ok(argmax(&correlations(soft_chips, table)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    Uncoded,
    Hdd,
    Sdd,
}

impl Decoder {
    pub fn is_coded(self) -> bool {
        !matches!(self, Decoder::Uncoded)
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoder::Uncoded => "uncoded",
            Decoder::Hdd => "hdd",
            Decoder::Sdd => "sdd",
        })
    }
}

impl std::str::FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncoded" => Ok(Decoder::Uncoded),
            "hdd" => Ok(Decoder::Hdd),
            "sdd" => Ok(Decoder::Sdd),
            other => Err(Error::Config(format!("unknown coding {other:?}"))),
        }
    }
}

/// Whose packet the receiver tries to recover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Soi,
    Interferer(usize),
}

/// Outcome of decoding one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketOutcome {
    /// Sliced bits in transmit order (uncoded), or the chips of the decided
    /// symbols (coded).
    pub decoded_bits: Vec<i8>,
    /// Decided symbols; for uncoded packets, 4-bit groups of the sliced bits.
    pub decoded_symbols: Vec<u8>,
    /// Information bit errors.
    pub bit_errors: usize,
    pub bits: usize,
    pub symbol_errors: usize,
    pub symbols: usize,
}

impl PacketOutcome {
    pub fn success(&self) -> bool {
        self.bit_errors == 0 && self.symbol_errors == 0
    }
}

fn pack_nibbles(bits: &[i8]) -> Vec<u8> {
    bits.chunks(4)
        .map(|g| {
            g.iter()
                .enumerate()
                .fold(0u8, |acc, (n, &b)| acc | (((b > 0) as u8) << n))
        })
        .collect()
}

/// Demodulates, decodes and scores one packet on the receiver's timing grid,
/// which is always the synchronized sender's grid.
///
/// The soft bits of every I and Q index in the target's payload span are
/// interleaved back into transmit order. Coded packets are cut into 32-chip
/// groups and correlated against `table`; the reference symbols are recovered
/// from the target's own chips.
pub fn decode_packet<R: Rng + ?Sized>(
    scenario: &Scenario,
    decoder: Decoder,
    target: Target,
    table: &ChipTable,
    rng: &mut R,
) -> Result<PacketOutcome> {
    let reference =
        match target {
            Target::Soi => &scenario.soi_payload,
            Target::Interferer(index) => {
                scenario.interferers.get(index).map(|p| p.payload()).ok_or(
                    Error::InterfererIndex {
                        index,
                        count: scenario.interferers.len(),
                    },
                )?
            }
        };
    let soft = soft_packet(scenario, reference, rng);
    let truth = reference.demultiplex();
    score(&soft, &truth, decoder, table)
}

/// Soft outputs for the span of `reference`, in transmit order.
pub fn soft_packet<R: Rng + ?Sized>(
    scenario: &Scenario,
    reference: &IqStream,
    rng: &mut R,
) -> Vec<f64> {
    let (signal, interference) = soft_components(scenario, reference);
    signal
        .iter()
        .zip(&interference)
        .map(|(s, i)| s + i + noise_sample(scenario.noise_std, rng))
        .collect()
}

/// Noiseless soft outputs over the span of `reference`, split into the
/// synchronized sender's share and the summed interference, in transmit
/// order. Both parts scale linearly with their amplitudes.
pub fn soft_components(scenario: &Scenario, reference: &IqStream) -> (Vec<f64>, Vec<f64>) {
    let taps: Vec<InterfererTaps> = scenario
        .interferers
        .iter()
        .map(|p| InterfererTaps::new(p, scenario.half_bit))
        .collect();
    let origin = reference.origin_index();
    let n_i = reference.branch_len(Branch::I);
    let n_q = reference.branch_len(Branch::Q);
    let mut signal = Vec::with_capacity(n_i + n_q);
    let mut interference = Vec::with_capacity(n_i + n_q);
    let mut push = |branch: Branch, k: i64| {
        signal.push(scenario.soi_amplitude * scenario.soi_payload.value(branch, k));
        interference.push(
            taps.iter()
                .zip(&scenario.interferers)
                .map(|(t, p)| t.branch(branch).apply(p.payload(), branch, k))
                .sum::<f64>(),
        );
    };
    for n in 0..n_i {
        let k = origin + n as i64;
        push(Branch::I, k);
        if n < n_q {
            push(Branch::Q, k);
        }
    }
    (signal, interference)
}

/// Decodes transmit-order soft outputs and counts errors against `truth`.
pub fn score(
    soft: &[f64],
    truth: &[i8],
    decoder: Decoder,
    table: &ChipTable,
) -> Result<PacketOutcome> {
    if soft.len() != truth.len() {
        return Err(Error::ChipCount {
            expected: truth.len(),
            got: soft.len(),
        });
    }
    match decoder {
        Decoder::Uncoded => {
            let decoded: Vec<i8> = soft.iter().map(|&s| slice(s)).collect();
            let bit_errors = decoded.iter().zip(truth).filter(|(a, b)| a != b).count();
            let symbol_errors = decoded
                .chunks(4)
                .zip(truth.chunks(4))
                .filter(|(a, b)| a != b)
                .count();
            Ok(PacketOutcome {
                decoded_symbols: pack_nibbles(&decoded),
                decoded_bits: decoded,
                bit_errors,
                bits: truth.len(),
                symbol_errors,
                symbols: truth.len().div_ceil(4),
            })
        }
        Decoder::Hdd | Decoder::Sdd => {
            if !soft.len().is_multiple_of(CHIPS_PER_SYMBOL) {
                return Err(Error::ChipCount {
                    expected: soft.len().next_multiple_of(CHIPS_PER_SYMBOL),
                    got: soft.len(),
                });
            }
            let mut outcome = PacketOutcome {
                decoded_bits: Vec::with_capacity(soft.len()),
                decoded_symbols: Vec::with_capacity(soft.len() / CHIPS_PER_SYMBOL),
                bit_errors: 0,
                bits: 0,
                symbol_errors: 0,
                symbols: 0,
            };
            let correlator = Correlator::new(table);
            let mut sliced = [0.0; CHIPS_PER_SYMBOL];
            for (group, reference) in soft
                .chunks(CHIPS_PER_SYMBOL)
                .zip(truth.chunks(CHIPS_PER_SYMBOL))
            {
                let decision = match decoder {
                    Decoder::Hdd => {
                        for (s, g) in sliced.iter_mut().zip(group) {
                            *s = slice(*g) as f64;
                        }
                        correlator.decode(&sliced)?
                    }
                    _ => correlator.decode(group)?,
                };
                let expected = table.lookup(reference).ok_or_else(|| {
                    Error::Config("reference chips are not a valid chip sequence".into())
                })?;
                outcome.decoded_symbols.push(decision.symbol);
                outcome
                    .decoded_bits
                    .extend_from_slice(&table.bipolar(decision.symbol)?);
                outcome.symbols += 1;
                outcome.bits += 4;
                if decision.symbol != expected {
                    outcome.symbol_errors += 1;
                    outcome.bit_errors += (decision.symbol ^ expected).count_ones() as usize;
                }
            }
            Ok(outcome)
        }
    }
}
