//! Closed-form matched-filter output of the MSK demodulator.
//!
//! The receiver correlates with `(2/T) cos(ωp t) cos(ωc t)` over
//! `[(2k-1)T, (2k+1)T]` for I bits and with `(2/T) sin(ωp t) sin(ωc t)` over
//! `[2kT, (2k+2)T]` for Q bits, where `ωp = π / 2T`. After ideal low-pass
//! filtering the contribution of one interferer to bit `k` is a linear
//! combination of at most four of its bits: the two same-branch bits whose
//! pulses overlap the decision interval and the two opposite-branch bits
//! that leak in through the carrier phase offset.
//!
//! For the I branch, with `τ = 2 k_τ T + τ̲`, `k' = k - k_τ`:
//!
//! ```text
//! Λ_I(k) = A/(2T) { cos φc [ cos φp (τ̲ β^I_{k'-1} + (2T-τ̲) β^I_{k'})
//!                            - (2T/π) sin φp (β^I_{k'-1} - β^I_{k'}) ]
//!                 - sin φc [ sin φp (τ̲^Q β^Q_{kQ-1} + (2T-τ̲^Q) β^Q_{kQ})
//!                            + (2T/π) cos φp (β^Q_{kQ-1} - β^Q_{kQ}) ] }
//! ```
//!
//! where the leaking Q bits are located with the offset `τ + T`. The Q
//! branch has the same shape with the roles of I and Q exchanged and the
//! leaking I bits located with the offset `τ - T`. Shifting the Q decision
//! interval by `T` onto the I grid turns `sin/cos(2ωp t - φp)` into their
//! negatives, which exactly cancels the sign change of the Q matched
//! filter, so the sign pattern is identical to the I branch. Both branches
//! are checked against [`crate::oracle::oracle_lambda_baseband`] on random
//! parameter draws in the test suite.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::signal::{Branch, InterfererParams, IqStream, Scenario, TernaryBit};

/// Which pulse train's offset is decomposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetVariant {
    /// Same-branch bits active in an I decision interval (offset `τ`).
    IActive,
    /// Q bits leaking into an I decision interval (offset `τ + T`).
    QLeak,
    /// I bits leaking into a Q decision interval (offset `τ - T`).
    ILeak,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetDecomposition {
    /// `⌊shifted / 2T⌋`; the active bits are `k - k_shift - 1` and `k - k_shift`.
    pub k_shift: i64,
    /// Remaining offset inside one bit, in `[0, 2T)`.
    pub tau_rel: f64,
    /// Pulse phase offset `ωp τ` of the unshifted `τ`.
    pub phi_p: f64,
    pub variant: OffsetVariant,
}

impl OffsetDecomposition {
    /// Index of the later of the two active bits for decision index `k`.
    #[inline]
    pub fn active_index(&self, k: i64) -> i64 {
        k - self.k_shift
    }
}

/// Splits an offset into whole bits and a remainder in `[0, 2T)`.
pub fn decompose_offset(tau: f64, half_bit: f64, variant: OffsetVariant) -> OffsetDecomposition {
    let shifted = match variant {
        OffsetVariant::IActive => tau,
        OffsetVariant::QLeak => tau + half_bit,
        OffsetVariant::ILeak => tau - half_bit,
    };
    let bit = 2.0 * half_bit;
    let mut k_shift = (shifted / bit).floor() as i64;
    let mut tau_rel = shifted - k_shift as f64 * bit;
    // guard the [0, 2T) invariant against rounding in the subtraction
    if tau_rel >= bit {
        tau_rel -= bit;
        k_shift += 1;
    }
    if tau_rel < 0.0 {
        tau_rel += bit;
        k_shift -= 1;
    }
    OffsetDecomposition {
        k_shift,
        tau_rel: tau_rel.max(0.0),
        phi_p: pulse_phase(tau, half_bit),
        variant,
    }
}

/// `φp = ωp τ` with `ωp = π / 2T`.
#[inline]
pub fn pulse_phase(tau: f64, half_bit: f64) -> f64 {
    FRAC_PI_2 * tau / half_bit
}

/// Matched-filter output of one demodulated bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitContribution {
    pub value: f64,
    pub branch: Branch,
    pub bit_index: i64,
}

/// Fully synchronized sender: `Λ = A β_k`.
#[inline]
pub fn lambda_sync(amplitude: f64, bit: TernaryBit) -> f64 {
    amplitude * bit.as_f64()
}

/// Time-aligned interferer with a carrier phase offset only.
///
/// `own` is the same-branch bit `k`; `leak_prev`, `leak_cur` are the two
/// opposite-branch bits overlapping the decision interval.
pub fn lambda_carrier_offset(
    amplitude: f64,
    phi_c: f64,
    own: f64,
    leak_prev: f64,
    leak_cur: f64,
) -> f64 {
    amplitude * (phi_c.cos() * own - phi_c.sin() / PI * (leak_prev - leak_cur))
}

/// Phase-aligned interferer with a time offset only; `prev`/`cur` are the
/// active bits `k'-1` and `k'`.
pub fn lambda_time_offset(amplitude: f64, tau: f64, half_bit: f64, prev: f64, cur: f64) -> f64 {
    let d = decompose_offset(tau, half_bit, OffsetVariant::IActive);
    let t2 = 2.0 * half_bit;
    let (s, c) = d.phi_p.sin_cos();
    amplitude / t2 * (c * (d.tau_rel * prev + (t2 - d.tau_rel) * cur) - t2 / PI * s * (prev - cur))
}

/// General form with both offsets. `own` are the active same-branch bits,
/// `leak` the active opposite-branch bits, each as `(prev, cur)`.
#[allow(clippy::too_many_arguments)]
pub fn lambda_both_offsets(
    amplitude: f64,
    phi_c: f64,
    phi_p: f64,
    half_bit: f64,
    own_rel: f64,
    own: (f64, f64),
    leak_rel: f64,
    leak: (f64, f64),
) -> f64 {
    let t2 = 2.0 * half_bit;
    let (sp, cp) = phi_p.sin_cos();
    let (sc, cc) = phi_c.sin_cos();
    let own_term = cp * (own_rel * own.0 + (t2 - own_rel) * own.1) - t2 / PI * sp * (own.0 - own.1);
    let leak_term =
        sp * (leak_rel * leak.0 + (t2 - leak_rel) * leak.1) + t2 / PI * cp * (leak.0 - leak.1);
    amplitude / t2 * (cc * own_term - sc * leak_term)
}

fn lambda_branch(params: &InterfererParams, k: i64, half_bit: f64, branch: Branch) -> f64 {
    let payload = params.payload();
    let leak_variant = match branch {
        Branch::I => OffsetVariant::QLeak,
        Branch::Q => OffsetVariant::ILeak,
    };
    let own = decompose_offset(params.tau(), half_bit, OffsetVariant::IActive);
    let leak = decompose_offset(params.tau(), half_bit, leak_variant);
    let ko = own.active_index(k);
    let kl = leak.active_index(k);
    let other = branch.other();
    lambda_both_offsets(
        params.amplitude(),
        params.phi_c(),
        own.phi_p,
        half_bit,
        own.tau_rel,
        (payload.value(branch, ko - 1), payload.value(branch, ko)),
        leak.tau_rel,
        (payload.value(other, kl - 1), payload.value(other, kl)),
    )
}

/// Contribution of an interferer to I bit `k`.
pub fn lambda_i(params: &InterfererParams, k: i64, half_bit: f64) -> BitContribution {
    BitContribution {
        value: lambda_branch(params, k, half_bit, Branch::I),
        branch: Branch::I,
        bit_index: k,
    }
}

/// Contribution of an interferer to Q bit `k`.
pub fn lambda_q(params: &InterfererParams, k: i64, half_bit: f64) -> BitContribution {
    BitContribution {
        value: lambda_branch(params, k, half_bit, Branch::Q),
        branch: Branch::Q,
        bit_index: k,
    }
}

pub fn lambda(params: &InterfererParams, branch: Branch, k: i64, half_bit: f64) -> BitContribution {
    match branch {
        Branch::I => lambda_i(params, k, half_bit),
        Branch::Q => lambda_q(params, k, half_bit),
    }
}

/// Per-branch weights of the four bits an interferer contributes.
///
/// `Λ(k) = own_prev·b[k-s-1] + own_cur·b[k-s] + leak_prev·l[k-t-1] + leak_cur·l[k-t]`
/// with `s = own_shift`, `t = leak_shift`, `b` the same branch and `l` the
/// opposite branch of the interferer payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTaps {
    pub own_shift: i64,
    pub leak_shift: i64,
    pub own_prev: f64,
    pub own_cur: f64,
    pub leak_prev: f64,
    pub leak_cur: f64,
}

impl BranchTaps {
    fn new(
        amplitude: f64,
        phi_c: f64,
        tau: f64,
        half_bit: f64,
        leak_variant: OffsetVariant,
    ) -> Self {
        let own = decompose_offset(tau, half_bit, OffsetVariant::IActive);
        let leak = decompose_offset(tau, half_bit, leak_variant);
        let t2 = 2.0 * half_bit;
        let (sp, cp) = own.phi_p.sin_cos();
        let (sc, cc) = phi_c.sin_cos();
        let g = amplitude / t2;
        let alt = t2 / PI;
        BranchTaps {
            own_shift: own.k_shift,
            leak_shift: leak.k_shift,
            own_prev: g * cc * (cp * own.tau_rel - alt * sp),
            own_cur: g * cc * (cp * (t2 - own.tau_rel) + alt * sp),
            leak_prev: -g * sc * (sp * leak.tau_rel + alt * cp),
            leak_cur: -g * sc * (sp * (t2 - leak.tau_rel) - alt * cp),
        }
    }

    #[inline]
    pub fn apply(&self, own: &IqStream, own_branch: Branch, k: i64) -> f64 {
        let ko = k - self.own_shift;
        let kl = k - self.leak_shift;
        let leak_branch = own_branch.other();
        self.own_prev * own.value(own_branch, ko - 1)
            + self.own_cur * own.value(own_branch, ko)
            + self.leak_prev * own.value(leak_branch, kl - 1)
            + self.leak_cur * own.value(leak_branch, kl)
    }
}

/// Precomputed I and Q taps of one interferer.
///
/// Evaluating a whole packet through the taps costs four multiply-adds per
/// bit; the trigonometry is done once per interferer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfererTaps {
    pub i: BranchTaps,
    pub q: BranchTaps,
}

impl InterfererTaps {
    pub fn new(params: &InterfererParams, half_bit: f64) -> Self {
        let (a, p, t) = (params.amplitude(), params.phi_c(), params.tau());
        InterfererTaps {
            i: BranchTaps::new(a, p, t, half_bit, OffsetVariant::QLeak),
            q: BranchTaps::new(a, p, t, half_bit, OffsetVariant::ILeak),
        }
    }

    pub fn branch(&self, branch: Branch) -> &BranchTaps {
        match branch {
            Branch::I => &self.i,
            Branch::Q => &self.q,
        }
    }
}

/// Noiseless decision variable of bit `k`: SoI term plus every interferer.
pub fn soft_bit_noiseless(scenario: &Scenario, branch: Branch, k: i64) -> f64 {
    let soi = lambda_sync(scenario.soi_amplitude, scenario.soi_payload.get(branch, k));
    scenario
        .interferers
        .iter()
        .map(|p| lambda(p, branch, k, scenario.half_bit).value)
        .fold(soi, |acc, v| acc + v)
}

/// Decision variable `ô_k = Λ_s + Σ Λ_u + Λ_n`.
///
/// No random number is drawn when the scenario is noiseless.
pub fn soft_bit<R: Rng + ?Sized>(scenario: &Scenario, branch: Branch, k: i64, rng: &mut R) -> f64 {
    soft_bit_noiseless(scenario, branch, k) + noise_sample(scenario.noise_std, rng)
}

#[inline]
pub(crate) fn noise_sample<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    if std > 0.0 {
        // std > 0 and finite was validated on the scenario
        Normal::new(0.0, std).map(|n| n.sample(rng)).unwrap_or(0.0)
    } else {
        0.0
    }
}
