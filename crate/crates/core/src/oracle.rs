//! Numerical reference for the closed-form demodulator output.
//!
//! Everything here integrates the matched-filter product directly, with the
//! interferer's pulse trains evaluated pointwise from the payload. No bit
//! index arithmetic from [`crate::demod`] is reused, so agreement between the
//! two is a meaningful check.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::demod::{decompose_offset, pulse_phase, OffsetVariant};
use crate::error::{Error, Result};
use crate::signal::{Branch, InterfererParams, IqStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    Midpoint,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Subdivisions of one 2T decision interval.
    pub steps_per_bit: usize,
    pub method: QuadratureMethod,
    /// Passband only: `ωc = carrier_multiple · ωp`.
    pub carrier_multiple: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            steps_per_bit: 4096,
            method: QuadratureMethod::Simpson,
            carrier_multiple: 256,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_bit < 64 {
            return Err(Error::Config(format!(
                "steps_per_bit must be at least 64, got {}",
                self.steps_per_bit
            )));
        }
        if self.method == QuadratureMethod::Simpson && !self.steps_per_bit.is_multiple_of(2) {
            return Err(Error::Config(
                "Simpson integration needs an even step count".into(),
            ));
        }
        if self.carrier_multiple < 8 {
            return Err(Error::Config(format!(
                "carrier_multiple must be at least 8, got {}",
                self.carrier_multiple
            )));
        }
        Ok(())
    }
}

/// Bit value carried by a pulse train at absolute time `t`.
///
/// I pulse `j` of a sender delayed by `tau` covers `[(2j-1)T, (2j+1)T] + tau`,
/// Q pulse `j` covers `[2jT, (2j+2)T] + tau`.
fn pulse_value(stream: &IqStream, branch: Branch, t: f64, tau: f64, half_bit: f64) -> f64 {
    let center_offset = match branch {
        Branch::I => 0.0,
        Branch::Q => half_bit,
    };
    let j = ((t - tau - center_offset) / (2.0 * half_bit)).round() as i64;
    stream.value(branch, j)
}

/// Pulse edges of a train with offset `offset` strictly inside `(a, b)`.
fn edges_in(a: f64, b: f64, offset: f64, half_bit: f64) -> Vec<f64> {
    // edges sit at offset + (2j+1)T for integer j
    let period = 2.0 * half_bit;
    let first = ((a - offset - half_bit) / period).floor() as i64;
    let last = ((b - offset - half_bit) / period).ceil() as i64;
    (first..=last)
        .map(|j| offset + half_bit + j as f64 * period)
        .filter(|&e| e > a && e < b)
        .collect()
}

fn segments(a: f64, b: f64, mut cuts: Vec<f64>) -> Vec<(f64, f64)> {
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15 * (1.0 + x.abs()));
    cuts.windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(x, y)| y > x)
        .collect()
}

fn integrate_segment<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    steps: usize,
    method: QuadratureMethod,
) -> f64 {
    let h = (b - a) / steps as f64;
    match method {
        QuadratureMethod::Midpoint => {
            (0..steps).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
        }
        QuadratureMethod::Simpson => {
            let mut acc = f(a) + f(b);
            for i in 1..steps {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(a + i as f64 * h);
            }
            acc * h / 3.0
        }
    }
}

/// Integrates `f` over `[a, b]` split at the given breakpoints, handing each
/// piece the pulse values valid inside it (sampled at its midpoint).
fn piecewise<F>(
    a: f64,
    b: f64,
    cuts: Vec<f64>,
    total_steps: usize,
    method: QuadratureMethod,
    f: F,
) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let segs = segments(a, b, cuts);
    let len = b - a;
    segs.iter()
        .map(|&(x, y)| {
            let mut n = ((total_steps as f64) * (y - x) / len).ceil() as usize;
            n = n.max(2);
            if method == QuadratureMethod::Simpson && n % 2 == 1 {
                n += 1;
            }
            let mid = 0.5 * (x + y);
            let g = |t: f64| f(t, mid);
            integrate_segment(&g, x, y, n, method)
        })
        .sum()
}

fn decision_interval(branch: Branch, k: i64, half_bit: f64) -> (f64, f64) {
    match branch {
        Branch::I => ((2 * k - 1) as f64 * half_bit, (2 * k + 1) as f64 * half_bit),
        Branch::Q => ((2 * k) as f64 * half_bit, (2 * k + 2) as f64 * half_bit),
    }
}

fn all_edges(a: f64, b: f64, tau: f64, half_bit: f64) -> Vec<f64> {
    let mut cuts = edges_in(a, b, tau, half_bit);
    cuts.extend(edges_in(a, b, tau + half_bit, half_bit));
    cuts
}

/// Matched-filter output of one interferer after ideal low-pass filtering,
/// obtained by numerical integration.
pub fn oracle_lambda_baseband(
    params: &InterfererParams,
    k: i64,
    branch: Branch,
    cfg: &QuadratureConfig,
    half_bit: f64,
) -> Result<f64> {
    cfg.validate()?;
    let (a, b) = decision_interval(branch, k, half_bit);
    let tau = params.tau();
    let wp = FRAC_PI_2 / half_bit;
    let phi_p = wp * tau;
    let (sc, cc) = params.phi_c().sin_cos();
    let gain = (2.0 / half_bit) * params.amplitude() / 4.0;
    let payload = params.payload();
    let integrand = |t: f64, mid: f64| {
        let bi = pulse_value(payload, Branch::I, mid, tau, half_bit);
        let bq = pulse_value(payload, Branch::Q, mid, tau, half_bit);
        let x = 2.0 * wp * t - phi_p;
        match branch {
            // b_I(t-τ) cos(ωp t - φp) cos(ωp t) · ½cos φc + b_Q(t-τ) sin(ωp t - φp) cos(ωp t) · ½sin φc
            Branch::I => {
                gain * (bi * cc * (phi_p.cos() + x.cos()) + bq * sc * (x.sin() - phi_p.sin()))
            }
            // b_Q(t-τ) sin(ωp t - φp) sin(ωp t) · ½cos φc - b_I(t-τ) cos(ωp t - φp) sin(ωp t) · ½sin φc
            Branch::Q => {
                gain * (bq * cc * (phi_p.cos() - x.cos()) - bi * sc * (x.sin() + phi_p.sin()))
            }
        }
    };
    Ok(piecewise(
        a,
        b,
        all_edges(a, b, tau, half_bit),
        cfg.steps_per_bit,
        cfg.method,
        integrand,
    ))
}

/// Matched-filter output computed from the full passband product, including
/// the double-carrier terms a real low-pass filter would remove.
pub fn oracle_lambda_passband(
    params: &InterfererParams,
    k: i64,
    branch: Branch,
    cfg: &QuadratureConfig,
    half_bit: f64,
) -> Result<f64> {
    cfg.validate()?;
    let (a, b) = decision_interval(branch, k, half_bit);
    let tau = params.tau();
    let wp = FRAC_PI_2 / half_bit;
    let wc = cfg.carrier_multiple as f64 * wp;
    let phi_c = params.phi_c();
    let amp = params.amplitude();
    let payload = params.payload();
    let integrand = |t: f64, mid: f64| {
        let bi = pulse_value(payload, Branch::I, mid, tau, half_bit);
        let bq = pulse_value(payload, Branch::Q, mid, tau, half_bit);
        let u = amp
            * (bi * (wp * (t - tau)).cos() * (wc * t + phi_c).cos()
                + bq * (wp * (t - tau)).sin() * (wc * t + phi_c).sin());
        let basis = match branch {
            Branch::I => (wp * t).cos() * (wc * t).cos(),
            Branch::Q => (wp * t).sin() * (wc * t).sin(),
        };
        u * basis * 2.0 / half_bit
    };
    // resolve the double-carrier oscillation with at least 32 samples per cycle
    let steps = cfg.steps_per_bit.max(32 * cfg.carrier_multiple as usize);
    Ok(piecewise(
        a,
        b,
        all_edges(a, b, tau, half_bit),
        steps,
        cfg.method,
        integrand,
    ))
}

/// Integrand shapes of the rectangle-pulse integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectKind {
    One,
    Cos2Wp,
    Sin2Wp,
}

impl RectKind {
    pub const ALL: [RectKind; 3] = [RectKind::One, RectKind::Cos2Wp, RectKind::Sin2Wp];

    fn eval(self, t: f64, half_bit: f64) -> f64 {
        let x = PI * t / half_bit; // 2ωp t
        match self {
            RectKind::One => 1.0,
            RectKind::Cos2Wp => x.cos(),
            RectKind::Sin2Wp => x.sin(),
        }
    }
}

/// Closed form of `∫ b(t-τ) f(t) dt` over the I decision interval of bit
/// `k`, with `b` the I pulse train (`Branch::I`) or the Q pulse train
/// leaking into the I interval (`Branch::Q`).
pub fn rect_integral(
    kind: RectKind,
    branch: Branch,
    tau: f64,
    bits: &IqStream,
    k: i64,
    half_bit: f64,
) -> f64 {
    let variant = match branch {
        Branch::I => OffsetVariant::IActive,
        Branch::Q => OffsetVariant::QLeak,
    };
    let d = decompose_offset(tau, half_bit, variant);
    let kk = d.active_index(k);
    let prev = bits.value(branch, kk - 1);
    let cur = bits.value(branch, kk);
    let phi_p = pulse_phase(tau, half_bit);
    let two_wp = PI / half_bit;
    let t2 = 2.0 * half_bit;
    let (s2, c2) = (2.0 * phi_p).sin_cos();
    match (kind, branch) {
        (RectKind::One, _) => d.tau_rel * prev + (t2 - d.tau_rel) * cur,
        (RectKind::Cos2Wp, Branch::I) => -s2 / two_wp * (prev - cur),
        (RectKind::Cos2Wp, Branch::Q) => s2 / two_wp * (prev - cur),
        (RectKind::Sin2Wp, Branch::I) => -(1.0 - c2) / two_wp * (prev - cur),
        (RectKind::Sin2Wp, Branch::Q) => -(1.0 + c2) / two_wp * (prev - cur),
    }
}

/// Direct quadrature of the same rectangle-pulse integral.
pub fn rect_integral_numeric(
    kind: RectKind,
    branch: Branch,
    tau: f64,
    bits: &IqStream,
    k: i64,
    half_bit: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let (a, b) = decision_interval(Branch::I, k, half_bit);
    let integrand =
        |t: f64, mid: f64| pulse_value(bits, branch, mid, tau, half_bit) * kind.eval(t, half_bit);
    Ok(piecewise(
        a,
        b,
        all_edges(a, b, tau, half_bit),
        cfg.steps_per_bit,
        cfg.method,
        integrand,
    ))
}

/// Rebuilds the I-branch contribution from the six rectangle integrals:
/// `(2/T)(A/4)[cos φc X1 + sin φc X2]` with
/// `X1 = cos φp S^I(1) + cos φp S^I(cos) + sin φp S^I(sin)` and
/// `X2 = -[sin φp S^Q(1) + sin φp S^Q(cos) - cos φp S^Q(sin)]`.
pub fn reassemble_lambda_i(params: &InterfererParams, k: i64, half_bit: f64) -> f64 {
    let tau = params.tau();
    let bits = params.payload();
    let s = |kind, branch| rect_integral(kind, branch, tau, bits, k, half_bit);
    let (sp, cp) = pulse_phase(tau, half_bit).sin_cos();
    let x1 = cp * s(RectKind::One, Branch::I)
        + cp * s(RectKind::Cos2Wp, Branch::I)
        + sp * s(RectKind::Sin2Wp, Branch::I);
    let x2 = -(sp * s(RectKind::One, Branch::Q) + sp * s(RectKind::Cos2Wp, Branch::Q)
        - cp * s(RectKind::Sin2Wp, Branch::Q));
    let (sc, cc) = params.phi_c().sin_cos();
    (2.0 / half_bit) * params.amplitude() / 4.0 * (cc * x1 + sc * x2)
}

/// Outcome of a randomized closed-form versus quadrature comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub draws: usize,
    pub comparisons: usize,
    /// Largest relative deviation seen.
    pub max_deviation: f64,
    /// The comparison that produced `max_deviation`.
    pub worst_case: String,
}

impl ValidationReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_deviation <= tolerance
    }
}

/// Compares the closed forms with numerical integration on `draws` random
/// parameter sets: `τ ∈ [−4T, 4T]`, `φc ∈ [0, 2π)`, `A` log-uniform in
/// `[0.01, 100]` and a random window of ±1 bits.
///
/// Each draw checks both demodulator branches against
/// [`oracle_lambda_baseband`] (or [`oracle_lambda_passband`] when
/// `passband` is set) and, for the baseband run, all six rectangle
/// integrals against [`rect_integral_numeric`]. Deviations are relative to
/// `max(|reference|, A)` for the branch outputs and `max(|reference|, T)`
/// for the rectangle integrals, so zero-valued references do not blow up.
pub fn validate_random<R: rand::Rng + ?Sized>(
    draws: usize,
    cfg: &QuadratureConfig,
    passband: bool,
    rng: &mut R,
) -> Result<ValidationReport> {
    use crate::demod::lambda;
    use crate::signal::multiplex_bits;

    cfg.validate()?;
    let half_bit = 1.0;
    let mut report = ValidationReport {
        draws,
        comparisons: 0,
        max_deviation: 0.0,
        worst_case: String::new(),
    };
    let mut record = |dev: f64, what: &dyn Fn() -> String| {
        report.comparisons += 1;
        if dev > report.max_deviation || report.worst_case.is_empty() {
            report.max_deviation = report.max_deviation.max(dev);
            report.worst_case = what();
        }
    };
    for _ in 0..draws {
        let bits: Vec<i8> = (0..24)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let amplitude = 10f64.powf(rng.random_range(-2.0..2.0));
        let tau = rng.random_range(-4.0..4.0);
        let phi_c = rng.random_range(0.0..std::f64::consts::TAU);
        let payload = multiplex_bits(&bits)?;
        let params = InterfererParams::new(amplitude, tau, phi_c, payload)?;
        let k = rng.random_range(-2..14);
        for branch in [Branch::I, Branch::Q] {
            let closed = lambda(&params, branch, k, half_bit).value;
            let reference = if passband {
                oracle_lambda_passband(&params, k, branch, cfg, half_bit)?
            } else {
                oracle_lambda_baseband(&params, k, branch, cfg, half_bit)?
            };
            let dev = (closed - reference).abs() / reference.abs().max(amplitude);
            record(dev, &|| {
                format!(
                    "branch={branch} k={k} tau={tau} phi_c={phi_c} A={amplitude}: closed {closed} vs numeric {reference}"
                )
            });
        }
        if passband {
            continue;
        }
        for kind in RectKind::ALL {
            for branch in [Branch::I, Branch::Q] {
                let closed = rect_integral(kind, branch, tau, params.payload(), k, half_bit);
                let reference =
                    rect_integral_numeric(kind, branch, tau, params.payload(), k, half_bit, cfg)?;
                let dev = (closed - reference).abs() / reference.abs().max(half_bit);
                record(dev, &|| {
                    format!("rect {kind:?} bits={branch} k={k} tau={tau}: closed {closed} vs numeric {reference}")
                });
            }
        }
    }
    Ok(report)
}
