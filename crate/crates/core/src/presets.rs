//! Named experiment setups with fixed grids and modes.
//!
//! | name | experiment | payload | target |
//! |------|------------|---------|--------|
//! | `fig5a`/`b`/`c` | τ × SIR sweep | independent | synchronized sender |
//! | `fig6a`/`b`/`c` | τ × SIR sweep | identical | synchronized sender |
//! | `fig7a`/`b`/`c` | SIR curves at a few offsets | independent | synchronized sender |
//! | `fig8a`/`b`/`c` | SIR curves around τ = 0 | identical | synchronized sender |
//! | `fig9` | PRR against interferer count (SDD) | both | synchronized sender |
//! | `fig10a`/`b`/`c` | τ × SIR sweep | independent | interferer |
//! | `fig11a`/`b`/`c` | τ × φc error map at −40 dB | independent | interferer |
//!
//! The suffix selects the receiver: `a` uncoded, `b` hard decision and `c`
//! soft decision despreading.

use crate::montecarlo::{grid, ExperimentConfig, TargetSender};
use crate::receiver::Decoder;
use crate::signal::PayloadMode;

/// What a preset runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetKind {
    Sweep,
    Zone { sir_db: f64 },
    Count { max_n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub config: ExperimentConfig,
}

pub const NAMES: [&str; 25] = [
    "fig5a", "fig5b", "fig5c", "fig6a", "fig6b", "fig6c", "fig7a", "fig7b", "fig7c", "fig8a",
    "fig8b", "fig8c", "fig9", "fig10a", "fig10b", "fig10c", "fig11a", "fig11b", "fig11c", "fig5",
    "fig6", "fig7", "fig8", "fig10", "fig11",
];

fn decoder_for(suffix: char) -> Option<Decoder> {
    match suffix {
        'a' => Some(Decoder::Uncoded),
        'b' => Some(Decoder::Hdd),
        'c' => Some(Decoder::Sdd),
        _ => None,
    }
}

/// Looks up a preset by name. A bare figure name without suffix (`fig5`)
/// selects the uncoded variant.
pub fn preset(name: &str) -> Option<Preset> {
    let name = NAMES.iter().copied().find(|n| *n == name)?;
    let base = ExperimentConfig::default();
    if name == "fig9" {
        return Some(Preset {
            name,
            kind: PresetKind::Count { max_n: 8 },
            config: ExperimentConfig {
                coding: Decoder::Sdd,
                tau_grid: vec![0.0],
                ..base
            },
        });
    }
    let (figure, suffix) = match name
        .strip_prefix("fig")?
        .char_indices()
        .find(|(_, c)| c.is_alphabetic())
    {
        Some((i, c)) => (&name[3..3 + i], c),
        None => (&name[3..], 'a'),
    };
    let coding = decoder_for(suffix)?;
    let (kind, config) = match figure {
        "5" => (PresetKind::Sweep, ExperimentConfig { coding, ..base }),
        "6" => (
            PresetKind::Sweep,
            ExperimentConfig {
                coding,
                payload_mode: PayloadMode::Identical,
                ..base
            },
        ),
        "7" => (
            PresetKind::Sweep,
            ExperimentConfig {
                coding,
                tau_grid: grid(0.0, 2.0, 0.5),
                ..base
            },
        ),
        "8" => (
            PresetKind::Sweep,
            ExperimentConfig {
                coding,
                payload_mode: PayloadMode::Identical,
                tau_grid: grid(-1.0, 1.0, 0.1),
                ..base
            },
        ),
        "10" => (
            PresetKind::Sweep,
            ExperimentConfig {
                coding,
                target: TargetSender::Interferer,
                ..base
            },
        ),
        "11" => (
            PresetKind::Zone { sir_db: -40.0 },
            ExperimentConfig {
                coding,
                target: TargetSender::Interferer,
                sir_db_grid: vec![-40.0],
                ..base
            },
        ),
        _ => return None,
    };
    Some(Preset { name, kind, config })
}
