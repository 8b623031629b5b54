//! Link-level model of colliding MSK / IEEE 802.15.4 transmissions.
//!
//! A receiver is synchronized to one sender (the signal of interest) while
//! any number of interferers transmit with their own amplitude, time offset
//! and carrier phase offset. The matched-filter output of every bit is
//! computed in closed form ([`demod`]), checked against direct numerical
//! integration ([`oracle`]), and fed to an uncoded slicer or a DSSS
//! hard/soft decision decoder ([`receiver`]). [`montecarlo`] sweeps the
//! parameter space and reports packet reception, bit and symbol error rates.
//!
//! Time is measured in units of the half-bit duration `T` (`2T` is one bit;
//! `T = 500 ns` in the 2.4 GHz IEEE 802.15.4 PHY).

pub mod cli;
pub mod demod;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod presets;
pub mod receiver;
pub mod signal;

pub use error::{Error, Result};
pub use signal::{
    Branch, ChipTable, InterfererParams, IqStream, Scenario, TernaryBit, IEEE_802_15_4,
};

/// Half-bit duration of the 2.4 GHz IEEE 802.15.4 PHY, in nanoseconds.
pub const HALF_BIT_NS: f64 = 500.0;
