//! Sender-side model: payload generation, I/Q multiplexing, DSSS spreading
//! and assembly of collision scenarios.
//!
//! All time quantities are expressed in units where the half-bit duration
//! `T` is carried explicitly; experiment code uses `T = 1`.

use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transmitted bit coefficient. `0` encodes silence outside a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(transparent)]
pub struct TernaryBit(i8);

impl TernaryBit {
    pub const SILENCE: TernaryBit = TernaryBit(0);
    pub const PLUS: TernaryBit = TernaryBit(1);
    pub const MINUS: TernaryBit = TernaryBit(-1);

    pub fn new(value: i8) -> Result<Self> {
        match value {
            -1..=1 => Ok(TernaryBit(value)),
            v => Err(Error::NotAntipodal(v)),
        }
    }

    /// Antipodal constructor; rejects silence.
    pub fn antipodal(value: i8) -> Result<Self> {
        match value {
            -1 | 1 => Ok(TernaryBit(value)),
            v => Err(Error::NotAntipodal(v)),
        }
    }

    pub fn from_bool(bit: bool) -> Self {
        if bit {
            Self::PLUS
        } else {
            Self::MINUS
        }
    }

    #[inline]
    pub fn value(self) -> i8 {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

/// The two quadrature branches of an MSK signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    I,
    Q,
}

impl Branch {
    pub fn other(self) -> Branch {
        match self {
            Branch::I => Branch::Q,
            Branch::Q => Branch::I,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::I => f.write_str("I"),
            Branch::Q => f.write_str("Q"),
        }
    }
}

/// A packet split onto the in-phase and quadrature branches.
///
/// Bit `k` of the I branch occupies `[(2k-1)T, (2k+1)T]` relative to the
/// sender's own timeline, bit `k` of the Q branch `[2kT, (2k+2)T]`.
/// Indices outside the stored range read as silence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IqStream {
    i_bits: Vec<TernaryBit>,
    q_bits: Vec<TernaryBit>,
    origin_index: i64,
}

impl IqStream {
    pub fn new(
        i_bits: Vec<TernaryBit>,
        q_bits: Vec<TernaryBit>,
        origin_index: i64,
    ) -> Result<Self> {
        if i_bits.len() != q_bits.len() && i_bits.len() != q_bits.len() + 1 {
            return Err(Error::Config(format!(
                "branch lengths {} (I) and {} (Q) differ by more than one",
                i_bits.len(),
                q_bits.len()
            )));
        }
        Ok(IqStream {
            i_bits,
            q_bits,
            origin_index,
        })
    }

    /// Builds a stream directly from `±1` branch values.
    pub fn from_branches(i: &[i8], q: &[i8]) -> Result<Self> {
        let conv = |v: &[i8]| {
            v.iter()
                .map(|&b| TernaryBit::antipodal(b))
                .collect::<Result<Vec<_>>>()
        };
        IqStream::new(conv(i)?, conv(q)?, 0)
    }

    pub fn i_bits(&self) -> &[TernaryBit] {
        &self.i_bits
    }

    pub fn q_bits(&self) -> &[TernaryBit] {
        &self.q_bits
    }

    pub fn origin_index(&self) -> i64 {
        self.origin_index
    }

    pub fn with_origin(mut self, origin_index: i64) -> Self {
        self.origin_index = origin_index;
        self
    }

    pub fn branch_len(&self, branch: Branch) -> usize {
        match branch {
            Branch::I => self.i_bits.len(),
            Branch::Q => self.q_bits.len(),
        }
    }

    /// Number of multiplexed bits (or chips) carried by the stream.
    pub fn len(&self) -> usize {
        self.i_bits.len() + self.q_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i_bits.is_empty()
    }

    /// Bit `k` on `branch`, silence outside the payload span.
    #[inline]
    pub fn get(&self, branch: Branch, k: i64) -> TernaryBit {
        let bits = match branch {
            Branch::I => &self.i_bits,
            Branch::Q => &self.q_bits,
        };
        let idx = k - self.origin_index;
        if idx < 0 || idx as usize >= bits.len() {
            TernaryBit::SILENCE
        } else {
            bits[idx as usize]
        }
    }

    #[inline]
    pub fn value(&self, branch: Branch, k: i64) -> f64 {
        self.get(branch, k).as_f64()
    }

    /// Inverse of [`multiplex_bits`]: restores transmit order.
    pub fn demultiplex(&self) -> Vec<i8> {
        let mut out = Vec::with_capacity(self.len());
        for (n, i) in self.i_bits.iter().enumerate() {
            out.push(i.value());
            if let Some(q) = self.q_bits.get(n) {
                out.push(q.value());
            }
        }
        out
    }

    /// Same stream with every bit negated.
    pub fn negated(&self) -> IqStream {
        let neg = |v: &[TernaryBit]| v.iter().map(|b| TernaryBit(-b.0)).collect();
        IqStream {
            i_bits: neg(&self.i_bits),
            q_bits: neg(&self.q_bits),
            origin_index: self.origin_index,
        }
    }
}

/// Splits a `±1` sequence onto the I (even positions) and Q (odd positions)
/// branches.
pub fn multiplex_bits(bits: &[i8]) -> Result<IqStream> {
    if bits.is_empty() {
        return Err(Error::EmptyPayload);
    }
    let mut i_bits = Vec::with_capacity(bits.len().div_ceil(2));
    let mut q_bits = Vec::with_capacity(bits.len() / 2);
    for (n, &b) in bits.iter().enumerate() {
        let bit = TernaryBit::antipodal(b)?;
        if n % 2 == 0 {
            i_bits.push(bit);
        } else {
            q_bits.push(bit);
        }
    }
    Ok(IqStream {
        i_bits,
        q_bits,
        origin_index: 0,
    })
}

pub const CHIPS_PER_SYMBOL: usize = 32;
pub const SYMBOL_COUNT: usize = 16;
pub const BITS_PER_SYMBOL: usize = 4;

const CHIP_ROWS: [&str; SYMBOL_COUNT] = [
    "11011001110000110101001000101110",
    "11101101100111000011010100100010",
    "00101110110110011100001101010010",
    "00100010111011011001110000110101",
    "01010010001011101101100111000011",
    "00110101001000101110110110011100",
    "11000011010100100010111011011001",
    "10011100001101010010001011101101",
    "10001100100101100000011101111011",
    "10111000110010010110000001110111",
    "01111011100011001001011000000111",
    "01110111101110001100100101100000",
    "00000111011110111000110010010110",
    "01100000011101111011100011001001",
    "10010110000001110111101110001100",
    "11001001011000000111011110111000",
];

const fn parse_rows(rows: [&str; SYMBOL_COUNT]) -> [[u8; CHIPS_PER_SYMBOL]; SYMBOL_COUNT] {
    let mut out = [[0u8; CHIPS_PER_SYMBOL]; SYMBOL_COUNT];
    let mut r = 0;
    while r < SYMBOL_COUNT {
        let bytes = rows[r].as_bytes();
        assert!(bytes.len() == CHIPS_PER_SYMBOL);
        let mut c = 0;
        while c < CHIPS_PER_SYMBOL {
            out[r][c] = match bytes[c] {
                b'0' => 0,
                b'1' => 1,
                _ => panic!("chip must be 0 or 1"),
            };
            c += 1;
        }
        r += 1;
    }
    out
}

/// The sixteen 32-chip spreading sequences of a DSSS PHY.
///
/// Chips are stored in transmit order; even positions go to the I branch,
/// odd positions to the Q branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipTable {
    rows: [[u8; CHIPS_PER_SYMBOL]; SYMBOL_COUNT],
}

/// IEEE 802.15.4 2.4 GHz O-QPSK chip table.
pub const IEEE_802_15_4: ChipTable = ChipTable {
    rows: parse_rows(CHIP_ROWS),
};

impl Default for ChipTable {
    fn default() -> Self {
        IEEE_802_15_4
    }
}

impl ChipTable {
    pub fn from_rows(rows: [[u8; CHIPS_PER_SYMBOL]; SYMBOL_COUNT]) -> Result<Self> {
        if rows.iter().flatten().any(|&c| c > 1) {
            return Err(Error::Config("chip values must be 0 or 1".into()));
        }
        Ok(ChipTable { rows })
    }

    pub fn rows(&self) -> &[[u8; CHIPS_PER_SYMBOL]; SYMBOL_COUNT] {
        &self.rows
    }

    pub fn row(&self, symbol: u8) -> Result<&[u8; CHIPS_PER_SYMBOL]> {
        self.rows
            .get(symbol as usize)
            .ok_or(Error::SymbolOutOfRange(symbol))
    }

    /// Row in bipolar form, `1 -> +1`, `0 -> -1`.
    pub fn bipolar(&self, symbol: u8) -> Result<[i8; CHIPS_PER_SYMBOL]> {
        Ok(self.row(symbol)?.map(|c| if c == 1 { 1 } else { -1 }))
    }

    /// Looks up the symbol whose bipolar sequence equals `chips` exactly.
    pub fn lookup(&self, chips: &[i8]) -> Option<u8> {
        (0..SYMBOL_COUNT as u8).find(|&s| {
            self.bipolar(s)
                .map(|row| row.as_slice() == chips)
                .unwrap_or(false)
        })
    }

    /// Checks the structural properties of the 802.15.4 table: rows 1..7 are
    /// cyclic right shifts of row 0 by four chips per row, rows 8..15 repeat
    /// rows 0..7 with the odd (quadrature) chips inverted.
    pub fn check_structure(&self) -> std::result::Result<(), String> {
        let base = &self.rows[0];
        for r in 0..8 {
            let mut expected = *base;
            expected.rotate_right(4 * r);
            if self.rows[r] != expected {
                return Err(format!("row {r} is not row 0 rotated by {}", 4 * r));
            }
            let mut inverted = expected;
            for (n, c) in inverted.iter_mut().enumerate() {
                if n % 2 == 1 {
                    *c ^= 1;
                }
            }
            if self.rows[r + 8] != inverted {
                return Err(format!(
                    "row {} is not row {r} with quadrature chips inverted",
                    r + 8
                ));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("symbol");
        for c in 0..CHIPS_PER_SYMBOL {
            out.push_str(&format!(",c{c}"));
        }
        out.push('\n');
        for (s, row) in self.rows.iter().enumerate() {
            out.push_str(&s.to_string());
            for c in row {
                out.push(',');
                out.push(if *c == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut rows = [[0u8; CHIPS_PER_SYMBOL]; SYMBOL_COUNT];
        let mut seen = 0;
        for record in reader.records() {
            let record = record.map_err(|e| Error::Config(e.to_string()))?;
            if record.len() != CHIPS_PER_SYMBOL + 1 {
                return Err(Error::ChipCount {
                    expected: CHIPS_PER_SYMBOL,
                    got: record.len().saturating_sub(1),
                });
            }
            let symbol: usize = record[0]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad symbol field {:?}", &record[0])))?;
            if symbol >= SYMBOL_COUNT {
                return Err(Error::SymbolOutOfRange(symbol.min(255) as u8));
            }
            for c in 0..CHIPS_PER_SYMBOL {
                rows[symbol][c] = match record[c + 1].trim() {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(Error::Config(format!("bad chip {other:?}"))),
                };
            }
            seen += 1;
        }
        if seen != SYMBOL_COUNT {
            return Err(Error::Config(format!("expected 16 rows, got {seen}")));
        }
        ChipTable::from_rows(rows)
    }
}

/// Spreads symbols into bipolar chips in transmit order.
pub fn spread_symbols(symbols: &[u8], table: &ChipTable) -> Result<Vec<i8>> {
    let mut chips = Vec::with_capacity(symbols.len() * CHIPS_PER_SYMBOL);
    for &s in symbols {
        chips.extend_from_slice(&table.bipolar(s)?);
    }
    Ok(chips)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadMode {
    Independent,
    Identical,
}

impl fmt::Display for PayloadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayloadMode::Independent => f.write_str("independent"),
            PayloadMode::Identical => f.write_str("identical"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadCoding {
    Uncoded,
    Coded,
}

/// One random payload of `length_bits` information bits.
pub fn random_payload<R: Rng + ?Sized>(
    coding: PayloadCoding,
    length_bits: usize,
    rng: &mut R,
) -> Result<IqStream> {
    match coding {
        PayloadCoding::Uncoded => {
            let bits: Vec<i8> = (0..length_bits)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            multiplex_bits(&bits)
        }
        PayloadCoding::Coded => {
            let symbols: Vec<u8> = (0..length_bits / BITS_PER_SYMBOL)
                .map(|_| rng.random_range(0..SYMBOL_COUNT as u8))
                .collect();
            multiplex_bits(&spread_symbols(&symbols, &IEEE_802_15_4)?)
        }
    }
}

/// Draws the payloads of the synchronized sender and one interferer.
///
/// Uncoded payloads are i.i.d. uniform `±1` bits. Coded payloads draw
/// `length_bits / 4` uniform symbols and spread them to `8 * length_bits`
/// chips. In identical mode the interferer carries a copy of the first
/// stream.
pub fn make_payload<R: Rng + ?Sized>(
    mode: PayloadMode,
    coding: PayloadCoding,
    length_bits: usize,
    rng: &mut R,
) -> Result<(IqStream, IqStream)> {
    if length_bits == 0 {
        return Err(Error::EmptyPayload);
    }
    if coding == PayloadCoding::Coded && !length_bits.is_multiple_of(8) {
        return Err(Error::CodedLength(length_bits));
    }
    let soi = random_payload(coding, length_bits, rng)?;
    let other = match mode {
        PayloadMode::Identical => soi.clone(),
        PayloadMode::Independent => random_payload(coding, length_bits, rng)?,
    };
    Ok((soi, other))
}

/// An unsynchronized sender as seen by the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfererParams {
    amplitude: f64,
    tau: f64,
    phi_c: f64,
    payload: IqStream,
}

impl InterfererParams {
    /// `tau > 0` means the interferer arrives later than the synchronized
    /// sender; `phi_c` is wrapped into `[0, 2π)`.
    pub fn new(amplitude: f64, tau: f64, phi_c: f64, payload: IqStream) -> Result<Self> {
        if !amplitude.is_finite() || amplitude <= 0.0 {
            return Err(Error::Config(format!(
                "amplitude must be positive, got {amplitude}"
            )));
        }
        if !tau.is_finite() || !phi_c.is_finite() {
            return Err(Error::Config(
                "time and phase offsets must be finite".into(),
            ));
        }
        Ok(InterfererParams {
            amplitude,
            tau,
            phi_c: wrap_phase(phi_c),
            payload,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn phi_c(&self) -> f64 {
        self.phi_c
    }

    pub fn payload(&self) -> &IqStream {
        &self.payload
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        InterfererParams::new(
            self.amplitude * factor,
            self.tau,
            self.phi_c,
            self.payload.clone(),
        )
    }
}

pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Synchronized sender plus interferers on an additive collision channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub soi_amplitude: f64,
    pub soi_payload: IqStream,
    pub interferers: Vec<InterfererParams>,
    pub half_bit: f64,
    pub noise_std: f64,
}

impl Scenario {
    /// Noiseless scenario with `T = 1`.
    pub fn new(
        soi_amplitude: f64,
        soi_payload: IqStream,
        interferers: Vec<InterfererParams>,
    ) -> Result<Self> {
        Scenario::with_channel(soi_amplitude, soi_payload, interferers, 1.0, 0.0)
    }

    pub fn with_channel(
        soi_amplitude: f64,
        soi_payload: IqStream,
        interferers: Vec<InterfererParams>,
        half_bit: f64,
        noise_std: f64,
    ) -> Result<Self> {
        if soi_amplitude.is_nan() || soi_amplitude <= 0.0 {
            return Err(Error::Config(format!(
                "SoI amplitude must be positive, got {soi_amplitude}"
            )));
        }
        if half_bit.is_nan() || half_bit <= 0.0 {
            return Err(Error::Config(format!(
                "half-bit duration must be positive, got {half_bit}"
            )));
        }
        if noise_std.is_nan() || noise_std < 0.0 {
            return Err(Error::Config(format!(
                "noise std must be non-negative, got {noise_std}"
            )));
        }
        Ok(Scenario {
            soi_amplitude,
            soi_payload,
            interferers,
            half_bit,
            noise_std,
        })
    }

    /// Linear signal-to-interference ratio `A_s² / Σ A_u²`.
    pub fn sir(&self) -> f64 {
        let interference: f64 = self
            .interferers
            .iter()
            .map(|p| p.amplitude * p.amplitude)
            .sum();
        self.soi_amplitude * self.soi_amplitude / interference
    }

    pub fn sir_db(&self) -> f64 {
        10.0 * self.sir().log10()
    }
}
