//! Randomized packet ensembles over grids of time offset, SIR, carrier phase
//! and interferer count.
//!
//! Every packet owns a ChaCha8 stream seeded from the master seed, the time
//! offset, the interferer count and the packet index. SIR, coding and the
//! power layout are deliberately not part of the seed: each grid column sees
//! the same payloads and phases at every SIR (common random numbers), so PRR
//! curves are smooth and, for the uncoded noiseless receiver, exactly
//! monotone in SIR. Results therefore do not depend on the evaluation order
//! or on the number of worker threads.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demod::noise_sample;
use crate::error::{Error, Result};
use crate::receiver::{score, soft_components, Decoder};
use crate::signal::{
    make_payload, random_payload, InterfererParams, PayloadCoding, PayloadMode, Scenario,
    IEEE_802_15_4,
};

/// Number of batches used for the PRR standard deviation.
pub const PRR_BATCHES: usize = 10;

/// How the carrier phase offset of each interferer is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMode {
    /// i.i.d. uniform on `[0, 2π)` per packet and interferer.
    RandomUniform,
    /// The same offset (radians) for every packet and interferer.
    Fixed(f64),
}

/// How the total interference power is distributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerSplit {
    /// One interferer carries all of the interference power.
    Single,
    /// `n` interferers share the interference power equally.
    EqualSplit,
}

impl fmt::Display for PowerSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerSplit::Single => "single",
            PowerSplit::EqualSplit => "equal_split",
        })
    }
}

/// Whose packet the receiver decodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSender {
    Soi,
    /// The first interferer, still on the synchronized sender's timing grid.
    Interferer,
}

/// Experiment description; also the TOML configuration format.
///
/// Time offsets are in units of the half-bit duration `T`, phases in
/// radians and SIR values in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub packets_per_point: usize,
    pub payload_bits: usize,
    pub payload_mode: PayloadMode,
    pub coding: Decoder,
    pub target: TargetSender,
    pub tau_grid: Vec<f64>,
    pub sir_db_grid: Vec<f64>,
    pub phi_mode: PhiMode,
    /// Carrier phase grid of capture-zone maps.
    pub phi_grid: Vec<f64>,
    pub n_interferers: usize,
    pub interferer_power_split: PowerSplit,
    pub master_seed: u64,
    pub noise_std: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            packets_per_point: 1000,
            payload_bits: 64,
            payload_mode: PayloadMode::Independent,
            coding: Decoder::Uncoded,
            target: TargetSender::Soi,
            tau_grid: default_tau_grid(),
            sir_db_grid: default_sir_grid(),
            phi_mode: PhiMode::RandomUniform,
            phi_grid: default_phi_grid(),
            n_interferers: 1,
            interferer_power_split: PowerSplit::EqualSplit,
            master_seed: 1,
            noise_std: 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.packets_per_point == 0 {
            return fail("packets_per_point must be at least 1".into());
        }
        if self.payload_bits == 0 {
            return fail("payload_bits must be at least 1".into());
        }
        if self.coding.is_coded() && !self.payload_bits.is_multiple_of(8) {
            return fail(format!(
                "coded payloads need a multiple of 8 bits, got payload_bits = {}",
                self.payload_bits
            ));
        }
        if self.tau_grid.is_empty() {
            return fail("tau_grid is empty".into());
        }
        if self.sir_db_grid.is_empty() {
            return fail("sir_db_grid is empty".into());
        }
        if self.phi_grid.is_empty() {
            return fail("phi_grid is empty".into());
        }
        if self.n_interferers == 0 {
            return fail("n_interferers must be at least 1".into());
        }
        if self.noise_std.is_nan() || self.noise_std < 0.0 {
            return fail(format!(
                "noise_std must be non-negative, got {}",
                self.noise_std
            ));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.tau_grid) || !finite(&self.sir_db_grid) || !finite(&self.phi_grid) {
            return fail("grids must contain finite values".into());
        }
        if let PhiMode::Fixed(phi) = self.phi_mode {
            if !phi.is_finite() {
                return fail("fixed phase offset must be finite".into());
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config is always representable in TOML")
    }

    fn payload_coding(&self) -> PayloadCoding {
        if self.coding.is_coded() {
            PayloadCoding::Coded
        } else {
            PayloadCoding::Uncoded
        }
    }
}

/// `start, start + step, …` up to and including `stop`, rounded to 1e-9 so
/// that grid values print identically everywhere.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| round9(start + i as f64 * step)).collect()
}

fn round9(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// `τ ∈ [−3T, 3T]` in steps of `0.1T`.
pub fn default_tau_grid() -> Vec<f64> {
    grid(-3.0, 3.0, 0.1)
}

/// `SIR ∈ [−50, 10] dB` in steps of 1 dB.
pub fn default_sir_grid() -> Vec<f64> {
    grid(-50.0, 10.0, 1.0)
}

/// `count` phases `−π + 2πj/count`, so 0, ±π/2 and π (as −π) are grid points
/// whenever `count` is a multiple of 4.
pub fn phase_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| -PI + TAU * j as f64 / count as f64)
        .collect()
}

pub fn default_phi_grid() -> Vec<f64> {
    phase_grid(64)
}

/// Amplitude of the interference as a whole for `A_s = 1`.
pub fn interference_amplitude(sir_db: f64) -> f64 {
    10f64.powf(-sir_db / 20.0)
}

/// Per-interferer amplitudes for a total interference level and layout.
pub fn interferer_amplitudes(sir_db: f64, n: usize, split: PowerSplit) -> Vec<f64> {
    let total = interference_amplitude(sir_db);
    match (split, n) {
        (_, 0) => Vec::new(),
        (PowerSplit::Single, _) => vec![total],
        (PowerSplit::EqualSplit, n) => vec![total / (n as f64).sqrt(); n],
    }
}

/// Statistics of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPoint {
    /// Time offset in units of `T`.
    pub tau: f64,
    pub sir_db: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub prr_mean: f64,
    pub prr_std: f64,
    pub ber: f64,
    pub ser: f64,
    pub packets: usize,
}

impl MetricPoint {
    /// BER for the uncoded receiver, SER for the despreading decoders.
    pub fn error_rate(&self, coding: Decoder) -> f64 {
        if coding.is_coded() {
            self.ser
        } else {
            self.ber
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    ok: usize,
    packets: usize,
    bit_errors: usize,
    bits: usize,
    symbol_errors: usize,
    symbols: usize,
}

fn mix(mut h: u64, v: u64) -> u64 {
    // splitmix64 finalizer over a running state
    h ^= v
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(h << 6)
        .wrapping_add(h >> 2);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Seed of one packet's random stream.
pub fn packet_seed(master_seed: u64, tau: f64, n_interferers: usize, packet: usize) -> u64 {
    let tau_key = (tau * 1e9).round() as i64 as u64;
    [tau_key, n_interferers as u64, packet as u64]
        .into_iter()
        .fold(mix(0, master_seed), mix)
}

/// Payloads, phases and unit-power interference of one randomized packet.
struct PacketDraw {
    signal: Vec<f64>,
    interference: Vec<f64>,
    truth: Vec<i8>,
}

/// Draws one packet collision at offset `tau`. `shares` are the interferer
/// amplitudes for a total interference power of one.
fn draw_packet(
    cfg: &ExperimentConfig,
    tau: f64,
    shares: &[f64],
    phi: PhiMode,
    seed: u64,
) -> Result<PacketDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coding = cfg.payload_coding();
    let (soi, first) = make_payload(cfg.payload_mode, coding, cfg.payload_bits, &mut rng)?;
    let mut payloads = vec![first];
    for _ in 1..shares.len() {
        payloads.push(match cfg.payload_mode {
            PayloadMode::Identical => soi.clone(),
            PayloadMode::Independent => random_payload(coding, cfg.payload_bits, &mut rng)?,
        });
    }
    let mut interferers = Vec::with_capacity(shares.len());
    for (amp, payload) in shares.iter().zip(payloads) {
        let phi_c = match phi {
            PhiMode::RandomUniform => rng.random::<f64>() * TAU,
            PhiMode::Fixed(p) => p,
        };
        interferers.push(InterfererParams::new(*amp, tau, phi_c, payload)?);
    }
    let scenario = Scenario::new(1.0, soi, interferers)?;
    let reference = match cfg.target {
        TargetSender::Soi => &scenario.soi_payload,
        TargetSender::Interferer => scenario
            .interferers
            .first()
            .map(|p| p.payload())
            .ok_or(Error::InterfererIndex { index: 0, count: 0 })?,
    };
    let truth = reference.demultiplex();
    let (signal, interference) = soft_components(&scenario, reference);
    Ok(PacketDraw {
        signal,
        interference,
        truth,
    })
}

/// Simulates `packets_per_point` packets at offset `tau` and evaluates each
/// of them at every SIR in `sirs`. Payloads and phases do not depend on the
/// SIR, so a column costs one draw per packet.
fn simulate_column(
    cfg: &ExperimentConfig,
    tau: f64,
    sirs: &[f64],
    shares: &[f64],
    phi: PhiMode,
) -> Result<Vec<MetricPoint>> {
    let packets = cfg.packets_per_point;
    let batches = PRR_BATCHES.min(packets);
    let mut per_batch = vec![vec![Tally::default(); batches]; sirs.len()];
    let mut totals = vec![Tally::default(); sirs.len()];
    let amplitudes: Vec<f64> = sirs.iter().map(|&s| interference_amplitude(s)).collect();
    let mut soft = Vec::new();
    for p in 0..packets {
        // keyed by the configured count, not the layout, so both layouts agree at n = 1
        let seed = packet_seed(cfg.master_seed, tau, cfg.n_interferers, p);
        let draw = draw_packet(cfg, tau, shares, phi, seed)?;
        let b = p * batches / packets;
        for (j, &a) in amplitudes.iter().enumerate() {
            soft.clear();
            soft.extend(
                draw.signal
                    .iter()
                    .zip(&draw.interference)
                    .map(|(s, i)| s + a * i),
            );
            if cfg.noise_std > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, sirs[j].to_bits()));
                for v in soft.iter_mut() {
                    *v += noise_sample(cfg.noise_std, &mut rng);
                }
            }
            let out = score(&soft, &draw.truth, cfg.coding, &IEEE_802_15_4)?;
            for t in [&mut per_batch[j][b], &mut totals[j]] {
                t.packets += 1;
                t.ok += out.success() as usize;
                t.bit_errors += out.bit_errors;
                t.bits += out.bits;
                t.symbol_errors += out.symbol_errors;
                t.symbols += out.symbols;
            }
        }
    }
    Ok(sirs
        .iter()
        .zip(per_batch.iter().zip(totals))
        .map(|(&sir, (batches, total))| point_from(tau, sir, batches, total))
        .collect())
}

/// Sample standard deviation of per-batch PRRs.
fn batch_std(batches: &[Tally]) -> f64 {
    if batches.len() < 2 {
        return 0.0;
    }
    let prr: Vec<f64> = batches
        .iter()
        .map(|b| b.ok as f64 / b.packets as f64)
        .collect();
    let mean = prr.iter().sum::<f64>() / prr.len() as f64;
    let var = prr.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (prr.len() - 1) as f64;
    var.sqrt()
}

fn point_from(tau: f64, sir_db: f64, batches: &[Tally], total: Tally) -> MetricPoint {
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    MetricPoint {
        tau,
        sir_db,
        phi_c: None,
        n: None,
        prr_mean: ratio(total.ok, total.packets),
        prr_std: batch_std(batches),
        ber: ratio(total.bit_errors, total.bits),
        ser: ratio(total.symbol_errors, total.symbols),
        packets: total.packets,
    }
}

fn unit_shares(cfg: &ExperimentConfig) -> Vec<f64> {
    interferer_amplitudes(0.0, cfg.n_interferers, cfg.interferer_power_split)
}

/// Simulates `packets_per_point` collisions at one `(τ, SIR)` point.
///
/// `n_interferers = 0` is accepted here and yields an interference-free
/// reference point. The result equals the corresponding point of
/// [`sweep`].
pub fn run_point(cfg: &ExperimentConfig, tau: f64, sir_db: f64) -> Result<MetricPoint> {
    let mut col = simulate_column(cfg, tau, &[sir_db], &unit_shares(cfg), cfg.phi_mode)?;
    Ok(col.remove(0))
}

/// Runs `f` on a pool of `threads` workers, or on the global pool for `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Results of a `τ × SIR` sweep, `τ`-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricGrid {
    pub tau_grid: Vec<f64>,
    pub sir_db_grid: Vec<f64>,
    pub points: Vec<MetricPoint>,
}

impl MetricGrid {
    pub fn point(&self, tau_index: usize, sir_index: usize) -> &MetricPoint {
        &self.points[tau_index * self.sir_db_grid.len() + sir_index]
    }

    /// Points of one `τ` column, in SIR grid order.
    pub fn column(&self, tau_index: usize) -> &[MetricPoint] {
        let n = self.sir_db_grid.len();
        &self.points[tau_index * n..(tau_index + 1) * n]
    }

    /// Looks up a point by coordinates (within 1e-6).
    pub fn find(&self, tau: f64, sir_db: f64) -> Option<&MetricPoint> {
        self.points
            .iter()
            .find(|p| (p.tau - tau).abs() < 1e-6 && (p.sir_db - sir_db).abs() < 1e-6)
    }
}

/// Cartesian product of [`run_point`] over the configured grids. Columns
/// of constant `τ` run in parallel.
pub fn sweep(cfg: &ExperimentConfig) -> Result<MetricGrid> {
    cfg.validate()?;
    let shares = unit_shares(cfg);
    let columns = cfg
        .tau_grid
        .par_iter()
        .map(|&tau| simulate_column(cfg, tau, &cfg.sir_db_grid, &shares, cfg.phi_mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricGrid {
        tau_grid: cfg.tau_grid.clone(),
        sir_db_grid: cfg.sir_db_grid.clone(),
        points: columns.into_iter().flatten().collect(),
    })
}

/// Error-rate map over `τ × φc` at one SIR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneMap {
    pub sir_db: f64,
    pub coding: Decoder,
    pub tau_grid: Vec<f64>,
    pub phi_grid: Vec<f64>,
    /// `τ`-major; every point carries its `phi_c`.
    pub points: Vec<MetricPoint>,
}

impl ZoneMap {
    pub fn error_rate(&self, tau_index: usize, phi_index: usize) -> f64 {
        self.points[tau_index * self.phi_grid.len() + phi_index].error_rate(self.coding)
    }

    /// Looks up the error rate at grid coordinates (within 1e-6).
    pub fn error_rate_at(&self, tau: f64, phi_c: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| {
                (p.tau - tau).abs() < 1e-6 && p.phi_c.is_some_and(|f| (f - phi_c).abs() < 1e-6)
            })
            .map(|p| p.error_rate(self.coding))
    }

    /// Cells with an error rate below `limit`, as `(τ index, φ index)`.
    pub fn low_error_cells(&self, limit: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for t in 0..self.tau_grid.len() {
            for f in 0..self.phi_grid.len() {
                if self.error_rate(t, f) < limit {
                    out.push((t, f));
                }
            }
        }
        out
    }
}

/// Error rate of the decoded target per `(τ, φc)` cell at a fixed SIR. The
/// configured `phi_mode` is ignored: each cell fixes its own phase.
pub fn capture_zone(cfg: &ExperimentConfig, sir_db: f64) -> Result<ZoneMap> {
    cfg.validate()?;
    let coords: Vec<(f64, f64)> = cfg
        .tau_grid
        .iter()
        .flat_map(|&t| cfg.phi_grid.iter().map(move |&f| (t, f)))
        .collect();
    let shares = unit_shares(cfg);
    let points = coords
        .par_iter()
        .map(|&(tau, phi)| {
            let mut p =
                simulate_column(cfg, tau, &[sir_db], &shares, PhiMode::Fixed(phi))?.remove(0);
            p.phi_c = Some(phi);
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZoneMap {
        sir_db,
        coding: cfg.coding,
        tau_grid: cfg.tau_grid.clone(),
        phi_grid: cfg.phi_grid.clone(),
        points,
    })
}

/// One row of the interferer-count experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub n: usize,
    pub layout: PowerSplit,
    pub payload_mode: PayloadMode,
    pub point: MetricPoint,
}

/// SIR (dB) when each of `n` interferers arrives at half the SoI power.
pub fn half_power_sir_db(n: usize) -> f64 {
    10.0 * (2.0 / n as f64).log10()
}

/// PRR against the number of interferers for both layouts and both payload
/// modes. Each of `n` equal interferers arrives at half the SoI power; the
/// single-interferer layout concentrates the same total power in one
/// sender. All offsets are `τ = 0` with random carrier phases.
pub fn n_interferer_experiment(cfg: &ExperimentConfig, max_n: usize) -> Result<Vec<CountRow>> {
    cfg.validate()?;
    if max_n == 0 {
        return Err(Error::Config("max_n must be at least 1".into()));
    }
    let mut jobs = Vec::new();
    for mode in [PayloadMode::Identical, PayloadMode::Independent] {
        for layout in [PowerSplit::EqualSplit, PowerSplit::Single] {
            for n in 1..=max_n {
                jobs.push((mode, layout, n));
            }
        }
    }
    jobs.par_iter()
        .map(|&(mode, layout, n)| {
            let c = ExperimentConfig {
                payload_mode: mode,
                interferer_power_split: layout,
                n_interferers: n,
                ..cfg.clone()
            };
            let sir = half_power_sir_db(n);
            let mut point =
                simulate_column(&c, 0.0, &[sir], &unit_shares(&c), PhiMode::RandomUniform)?
                    .remove(0);
            point.n = Some(n);
            Ok(CountRow {
                n,
                layout,
                payload_mode: mode,
                point,
            })
        })
        .collect()
}

/// SIR threshold of one `τ` column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub tau: f64,
    /// `None` when the PRR never reaches the threshold on the grid.
    pub sir_db: Option<f64>,
}

/// SIR above which the PRR stays at or above `prr_threshold`, per `τ`.
///
/// The crossing is located from the top of the SIR grid downwards and
/// linearly interpolated between the two grid points around it, so a PRR
/// plateau at very negative SIR (identical payloads, strong interferer
/// capture) does not mask the actual capture threshold. For curves that are
/// monotone in SIR this is the smallest SIR reaching the threshold. If every
/// grid point reaches the threshold the lowest grid SIR is reported.
pub fn threshold_extract(grid: &MetricGrid, prr_threshold: f64) -> Vec<ThresholdPoint> {
    let mut order: Vec<usize> = (0..grid.sir_db_grid.len()).collect();
    order.sort_by(|&a, &b| grid.sir_db_grid[a].total_cmp(&grid.sir_db_grid[b]));
    (0..grid.tau_grid.len())
        .map(|t| {
            let col = grid.column(t);
            let curve: Vec<(f64, f64)> = order
                .iter()
                .map(|&i| (col[i].sir_db, col[i].prr_mean))
                .collect();
            ThresholdPoint {
                tau: grid.tau_grid[t],
                sir_db: upper_crossing(&curve, prr_threshold),
            }
        })
        .collect()
}

fn upper_crossing(curve: &[(f64, f64)], threshold: f64) -> Option<f64> {
    let last = curve.last()?;
    if last.1 < threshold {
        return None;
    }
    match curve.iter().rposition(|&(_, prr)| prr < threshold) {
        None => Some(curve[0].0),
        Some(i) => {
            let (s0, p0) = curve[i];
            let (s1, p1) = curve[i + 1];
            Some(s0 + (threshold - p0) / (p1 - p0) * (s1 - s0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small(coding: Decoder) -> ExperimentConfig {
        ExperimentConfig {
            packets_per_point: 40,
            payload_bits: 32,
            coding,
            tau_grid: vec![-1.5, 0.0, 0.7],
            sir_db_grid: vec![-10.0, 0.0, 6.0],
            ..Default::default()
        }
    }

    #[test]
    fn sweep_is_independent_of_thread_count() {
        let cfg = small(Decoder::Hdd);
        let one = with_threads(Some(1), || sweep(&cfg)).unwrap().unwrap();
        let four = with_threads(Some(4), || sweep(&cfg)).unwrap().unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn run_point_matches_sweep() {
        let cfg = small(Decoder::Sdd);
        let grid = sweep(&cfg).unwrap();
        let p = run_point(&cfg, 0.7, 0.0).unwrap();
        assert_eq!(&p, grid.find(0.7, 0.0).unwrap());
        assert_eq!(grid.point(2, 1), grid.find(0.7, 0.0).unwrap());
        assert_eq!(grid.column(1).len(), 3);
    }

    #[test]
    fn no_interferer_is_error_free() {
        for coding in [Decoder::Uncoded, Decoder::Hdd, Decoder::Sdd] {
            let cfg = ExperimentConfig {
                n_interferers: 0,
                ..small(coding)
            };
            let p = run_point(&cfg, 0.3, -30.0).unwrap();
            assert_eq!((p.prr_mean, p.ber, p.ser, p.prr_std), (1.0, 0.0, 0.0, 0.0));
            assert_eq!(p.packets, 40);
        }
    }

    #[test]
    fn weak_interferer_is_harmless() {
        let cfg = small(Decoder::Uncoded);
        for tau in [-2.3, 0.0, 1.0, 2.9] {
            assert_eq!(run_point(&cfg, tau, 20.0).unwrap().prr_mean, 1.0);
        }
    }

    #[test]
    fn identical_synchronized_in_phase_is_error_free() {
        let cfg = ExperimentConfig {
            payload_mode: PayloadMode::Identical,
            phi_mode: PhiMode::Fixed(0.0),
            ..small(Decoder::Uncoded)
        };
        for sir in [-40.0, 0.0, 10.0] {
            let p = run_point(&cfg, 0.0, sir).unwrap();
            assert_eq!((p.ber, p.prr_mean), (0.0, 1.0));
        }
    }

    #[test]
    fn single_interferer_layouts_agree() {
        let base = small(Decoder::Hdd);
        let split = sweep(&base).unwrap();
        let single = sweep(&ExperimentConfig {
            interferer_power_split: PowerSplit::Single,
            ..base
        })
        .unwrap();
        assert_eq!(split, single);
    }

    #[test]
    fn uncoded_prr_is_monotone_in_sir() {
        let cfg = ExperimentConfig {
            sir_db_grid: grid(-12.0, 8.0, 1.0),
            ..small(Decoder::Uncoded)
        };
        let g = sweep(&cfg).unwrap();
        for t in 0..g.tau_grid.len() {
            let col = g.column(t);
            assert!(
                col.windows(2).all(|w| w[0].prr_mean <= w[1].prr_mean),
                "τ = {}",
                g.tau_grid[t]
            );
        }
    }

    #[test]
    fn noise_degrades_a_clean_channel() {
        let cfg = ExperimentConfig {
            n_interferers: 0,
            noise_std: 1.0,
            ..small(Decoder::Uncoded)
        };
        let p = run_point(&cfg, 0.0, 0.0).unwrap();
        assert!(p.ber > 0.05 && p.prr_mean < 0.5, "{p:?}");
    }

    #[test]
    fn amplitudes_and_grids() {
        assert!((interference_amplitude(-20.0) - 10.0).abs() < 1e-12);
        let split = interferer_amplitudes(0.0, 4, PowerSplit::EqualSplit);
        assert_eq!(split, vec![0.5; 4]);
        assert_eq!(interferer_amplitudes(0.0, 4, PowerSplit::Single), vec![1.0]);
        assert!((half_power_sir_db(2) - 0.0).abs() < 1e-12);
        assert_eq!(grid(0.0, 2.0, 0.5), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(default_tau_grid().len(), 61);
        let phases = phase_grid(4);
        assert_eq!(phases[0], -PI);
        assert!((phases[2]).abs() < 1e-15);
    }

    fn synthetic(curves: &[Vec<f64>], sirs: Vec<f64>) -> MetricGrid {
        let points = curves
            .iter()
            .enumerate()
            .flat_map(|(t, prrs)| {
                sirs.iter().zip(prrs).map(move |(&s, &p)| MetricPoint {
                    tau: t as f64,
                    sir_db: s,
                    phi_c: None,
                    n: None,
                    prr_mean: p,
                    prr_std: 0.0,
                    ber: 0.0,
                    ser: 0.0,
                    packets: 1,
                })
            })
            .collect();
        MetricGrid {
            tau_grid: (0..curves.len()).map(|t| t as f64).collect(),
            sir_db_grid: sirs,
            points,
        }
    }

    #[test]
    fn threshold_interpolates_the_upper_crossing() {
        let g = synthetic(
            &[
                vec![0.0, 0.5, 0.8, 1.0],
                vec![0.95, 0.95, 0.5, 1.0],
                vec![0.0, 0.1, 0.2, 0.3],
                vec![0.9, 0.95, 1.0, 1.0],
            ],
            vec![-3.0, -2.0, -1.0, 0.0],
        );
        let th = threshold_extract(&g, 0.9);
        assert!((th[0].sir_db.unwrap() - -0.5).abs() < 1e-12);
        assert!((th[1].sir_db.unwrap() - -0.2).abs() < 1e-12);
        assert_eq!(th[2].sir_db, None);
        assert_eq!(th[3].sir_db, Some(-3.0));
        assert_eq!(th[3].tau, 3.0);
    }

    #[test]
    fn threshold_ignores_sir_grid_order() {
        let g = synthetic(&[vec![1.0, 0.0, 0.8]], vec![0.0, -2.0, -1.0]);
        assert!((threshold_extract(&g, 0.9)[0].sir_db.unwrap() - -0.5).abs() < 1e-12);
    }

    #[test]
    fn config_toml_round_trip() {
        let cfg = ExperimentConfig {
            phi_mode: PhiMode::Fixed(0.25),
            target: TargetSender::Interferer,
            interferer_power_split: PowerSplit::Single,
            ..small(Decoder::Sdd)
        };
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial =
            ExperimentConfig::from_toml("coding = \"hdd\"\npackets_per_point = 7\n").unwrap();
        assert_eq!(
            (partial.coding, partial.packets_per_point),
            (Decoder::Hdd, 7)
        );
        assert_eq!(partial.tau_grid, default_tau_grid());
    }

    #[test]
    fn config_errors() {
        for text in [
            "tau_grid = []",
            "sir_db_grid = []",
            "coding = \"sdd\"\npayload_bits = 12",
            "packets_per_point = 0",
            "n_interferers = 0",
            "noise_std = -1.0",
            "unknown_field = 3",
            "coding = \"viterbi\"",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))),
                "{text}"
            );
        }
        assert!(matches!(
            sweep(&ExperimentConfig {
                tau_grid: vec![],
                ..Default::default()
            }),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn capture_zone_shape() {
        let cfg = ExperimentConfig {
            phi_grid: phase_grid(8),
            target: TargetSender::Interferer,
            ..small(Decoder::Hdd)
        };
        let z = capture_zone(&cfg, -40.0).unwrap();
        assert_eq!(z.points.len(), 3 * 8);
        for t in 0..3 {
            for f in 0..8 {
                assert!((0.0..=1.0).contains(&z.error_rate(t, f)));
            }
        }
        assert!(z.error_rate_at(0.0, 0.0).is_some());
        assert!(z.error_rate_at(0.05, 0.0).is_none());
    }

    #[test]
    fn packet_seeds_separate_their_inputs() {
        let s = packet_seed(1, 0.5, 1, 0);
        assert_eq!(s, packet_seed(1, 0.5 + 1e-12, 1, 0));
        for other in [
            packet_seed(2, 0.5, 1, 0),
            packet_seed(1, 0.6, 1, 0),
            packet_seed(1, 0.5, 2, 0),
            packet_seed(1, 0.5, 1, 1),
        ] {
            assert_ne!(s, other);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn rates_are_probabilities(tau in -3.0f64..3.0, sir in -40.0f64..10.0, seed in any::<u64>(), coded in any::<bool>()) {
            let cfg = ExperimentConfig {
                packets_per_point: 12,
                master_seed: seed,
                ..small(if coded { Decoder::Sdd } else { Decoder::Uncoded })
            };
            let p = run_point(&cfg, tau, sir).unwrap();
            for v in [p.prr_mean, p.ber, p.ser] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(p.prr_std >= 0.0);
            if p.prr_mean == 1.0 {
                prop_assert_eq!((p.ber, p.ser), (0.0, 0.0));
            }
        }
    }
}
