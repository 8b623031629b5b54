//! Command-line front end.
//!
//! Every data file written with `--out PATH` gets a sidecar
//! `PATH.manifest.json` recording the configuration, seed, tool version,
//! run time and SHA-256 of the data file. CSV files reference their
//! manifest by that naming convention; JSON files also name it in a
//! `manifest` field. Data files contain no timing information, so the same
//! seed reproduces them byte for byte regardless of `--threads`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::montecarlo::{
    capture_zone, grid, n_interferer_experiment, sweep, with_threads, ExperimentConfig, PhiMode,
    PowerSplit, TargetSender,
};
use crate::oracle::{validate_random, QuadratureConfig, QuadratureMethod};
use crate::presets::{preset, PresetKind};
use crate::receiver::Decoder;
use crate::signal::{PayloadMode, CHIPS_PER_SYMBOL, IEEE_802_15_4};
use crate::HALF_BIT_NS;

/// Largest interferer count of the calibrated experiment range.
const CALIBRATED_MAX_N: usize = 8;

#[derive(Debug, Parser)]
#[command(
    name = "msk-collide",
    version,
    about = "Link-level simulator of colliding MSK / IEEE 802.15.4 packets"
)]
pub struct Cli {
    /// Master seed of all random draws.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Packets per grid point.
    #[arg(long, global = true)]
    pub packets: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the closed forms against numerical integration.
    Validate(ValidateArgs),
    /// PRR, BER and SER over a time offset × SIR grid.
    Sweep(ExperimentArgs),
    /// Error-rate map over time offset × carrier phase at one SIR.
    Zone(ZoneArgs),
    /// PRR against the number of interferers.
    Ninterf(NinterfArgs),
    /// Dump the IEEE 802.15.4 chip table.
    Chiptable,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Random parameter draws.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    /// Largest accepted relative deviation.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Quadrature steps per decision interval.
    #[arg(long, default_value_t = 4096)]
    pub steps: usize,
    /// Integrate the passband product instead of the low-pass baseband.
    #[arg(long)]
    pub passband: bool,
    /// Carrier frequency as a multiple of the pulse frequency (passband only).
    #[arg(long, default_value_t = 256)]
    pub carrier_multiple: u32,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// TOML experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named preset (fig5a … fig11c).
    #[arg(long)]
    pub preset: Option<String>,
    /// Receiver: uncoded, hdd or sdd.
    #[arg(long, value_parser = parse_decoder)]
    pub coding: Option<Decoder>,
    /// Interferer payloads: independent or identical.
    #[arg(long, value_parser = parse_payload)]
    pub payload: Option<PayloadMode>,
    /// Sender to decode: soi or interferer.
    #[arg(long, value_parser = parse_target)]
    pub target: Option<TargetSender>,
    /// Time offsets in units of T, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["tau_ns", "tau_range"])]
    pub tau: Option<Vec<f64>>,
    /// Time offsets in nanoseconds (T = 500 ns), comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "tau_range"
    )]
    pub tau_ns: Option<Vec<f64>>,
    /// Time offset grid in units of T as START:STOP:STEP.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub tau_range: Option<Vec<f64>>,
    /// SIR values in dB, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "sir_range"
    )]
    pub sir: Option<Vec<f64>>,
    /// SIR grid in dB as START:STOP:STEP.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub sir_range: Option<Vec<f64>>,
    /// Fix the carrier phase offset (radians) instead of drawing it.
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Number of carrier phase grid points (zone maps).
    #[arg(long)]
    pub phi_points: Option<usize>,
    /// Number of interferers sharing the offset.
    #[arg(long)]
    pub n_interferers: Option<usize>,
    /// Interference power layout: equal_split or single.
    #[arg(long, value_parser = parse_split)]
    pub power_split: Option<PowerSplit>,
    /// Information bits per packet (a multiple of 8 when coded).
    #[arg(long)]
    pub payload_bits: Option<usize>,
    /// Standard deviation of additive Gaussian noise per soft bit.
    #[arg(long)]
    pub noise_std: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ZoneArgs {
    /// Fixed SIR of the map in dB.
    #[arg(long, allow_negative_numbers = true)]
    pub sir_db: Option<f64>,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Debug, Args)]
pub struct NinterfArgs {
    /// Largest interferer count.
    #[arg(long)]
    pub max_n: Option<usize>,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

fn parse_decoder(s: &str) -> Result<Decoder, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_payload(s: &str) -> Result<PayloadMode, String> {
    match s {
        "independent" => Ok(PayloadMode::Independent),
        "identical" => Ok(PayloadMode::Identical),
        _ => Err(format!("expected independent or identical, got {s:?}")),
    }
}

fn parse_target(s: &str) -> Result<TargetSender, String> {
    match s {
        "soi" => Ok(TargetSender::Soi),
        "interferer" => Ok(TargetSender::Interferer),
        _ => Err(format!("expected soi or interferer, got {s:?}")),
    }
}

fn parse_split(s: &str) -> Result<PowerSplit, String> {
    match s {
        "single" => Ok(PowerSplit::Single),
        "equal_split" => Ok(PowerSplit::EqualSplit),
        _ => Err(format!("expected single or equal_split, got {s:?}")),
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [start, stop, step] if step > 0.0 && stop >= start => Ok(grid(start, stop, step)),
        [_, _, _] => Err("range needs STEP > 0 and STOP >= START".into()),
        _ => Err(format!("expected START:STOP:STEP, got {s:?}")),
    }
}

/// Failure of a command; all of them exit with status 2.
#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

/// Parses `std::env::args` and runs the command.
pub fn run() -> ExitCode {
    run_from(std::env::args_os())
}

/// Exit status 0 on success, 1 when validation fails and 2 on
/// configuration or output errors (including unparsable arguments).
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let arguments: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, &arguments) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli, arguments: &[String]) -> Result<bool, Failure> {
    let started = Instant::now();
    match &cli.command {
        Command::Validate(args) => cmd_validate(cli, args),
        Command::Chiptable => {
            let table = chip_rows();
            let manifest = ManifestInput::new(
                "chiptable",
                arguments,
                serde_json::json!({}),
                cli.seed.unwrap_or(0),
            );
            emit(cli, &table, manifest, started)?;
            Ok(true)
        }
        Command::Sweep(args) => {
            let (cfg, _) = resolve(cli, args)?;
            let result = with_threads(cli.threads, || sweep(&cfg))??;
            let mut table = Table::new(&[
                "tau_over_T",
                "sir_db",
                "prr_mean",
                "prr_std",
                "ber",
                "ser",
                "packets",
            ]);
            for p in &result.points {
                table.push(vec![
                    Cell::Float(p.tau),
                    Cell::Float(p.sir_db),
                    Cell::Float(p.prr_mean),
                    Cell::Float(p.prr_std),
                    Cell::Float(p.ber),
                    Cell::Float(p.ser),
                    Cell::Int(p.packets as i64),
                ]);
            }
            emit(
                cli,
                &table,
                ManifestInput::experiment("sweep", arguments, &cfg),
                started,
            )?;
            Ok(true)
        }
        Command::Zone(args) => {
            let (cfg, kind) = resolve(cli, &args.experiment)?;
            let sir_db = match (args.sir_db, kind) {
                (Some(s), _) => s,
                (None, Some(PresetKind::Zone { sir_db })) => sir_db,
                (None, _) => match cfg.sir_db_grid[..] {
                    [s] => s,
                    _ => {
                        return Err(Failure::Config(
                            "zone needs --sir-db or a single-valued SIR grid".into(),
                        ))
                    }
                },
            };
            if !sir_db.is_finite() {
                return Err(Failure::Config("--sir-db must be finite".into()));
            }
            let cfg = ExperimentConfig {
                sir_db_grid: vec![sir_db],
                ..cfg
            };
            let map = with_threads(cli.threads, || capture_zone(&cfg, sir_db))??;
            let mut table = Table::new(&["tau_over_T", "phi_c", "ber_or_ser"]);
            for p in &map.points {
                table.push(vec![
                    Cell::Float(p.tau),
                    Cell::Float(p.phi_c.unwrap_or(f64::NAN)),
                    Cell::Float(p.error_rate(map.coding)),
                ]);
            }
            emit(
                cli,
                &table,
                ManifestInput::experiment("zone", arguments, &cfg),
                started,
            )?;
            Ok(true)
        }
        Command::Ninterf(args) => {
            let (mut cfg, kind) = resolve(cli, &args.experiment)?;
            if args.experiment.coding.is_none()
                && kind.is_none()
                && args.experiment.config.is_none()
            {
                cfg.coding = Decoder::Sdd;
            }
            let max_n = match (args.max_n, kind) {
                (Some(n), _) => n,
                (None, Some(PresetKind::Count { max_n })) => max_n,
                _ => CALIBRATED_MAX_N,
            };
            let mut manifest = ManifestInput::experiment("ninterf", arguments, &cfg);
            if max_n > CALIBRATED_MAX_N {
                let note =
                    format!("max_n = {max_n} exceeds the calibrated range 1..={CALIBRATED_MAX_N}");
                eprintln!("warning: {note}");
                manifest.notes.push(note);
            }
            let rows = with_threads(cli.threads, || n_interferer_experiment(&cfg, max_n))??;
            let mut table = Table::new(&["n", "layout", "payload_mode", "prr_mean", "prr_std"]);
            for r in &rows {
                table.push(vec![
                    Cell::Int(r.n as i64),
                    Cell::Text(r.layout.to_string()),
                    Cell::Text(r.payload_mode.to_string()),
                    Cell::Float(r.point.prr_mean),
                    Cell::Float(r.point.prr_std),
                ]);
            }
            emit(cli, &table, manifest, started)?;
            Ok(true)
        }
    }
}

fn cmd_validate(cli: &Cli, args: &ValidateArgs) -> Result<bool, Failure> {
    if args.draws == 0 {
        return Err(Failure::Config("--draws must be at least 1".into()));
    }
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(Failure::Config("--tolerance must be non-negative".into()));
    }
    let cfg = QuadratureConfig {
        steps_per_bit: args.steps,
        method: QuadratureMethod::Simpson,
        carrier_multiple: args.carrier_multiple,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
    let report = with_threads(cli.threads, || {
        validate_random(args.draws, &cfg, args.passband, &mut rng)
    })??;
    let ok = report.passed(args.tolerance);
    println!(
        "{} comparisons over {} draws ({}), max relative deviation {:e}, tolerance {:e}: {}",
        report.comparisons,
        report.draws,
        if args.passband {
            "passband"
        } else {
            "baseband"
        },
        report.max_deviation,
        args.tolerance,
        if ok { "ok" } else { "FAILED" }
    );
    if !ok {
        println!("worst case: {}", report.worst_case);
    }
    Ok(ok)
}

/// Builds the experiment configuration: preset or config file first, then
/// individual flags, then the global `--seed` and `--packets`.
fn resolve(
    cli: &Cli,
    args: &ExperimentArgs,
) -> Result<(ExperimentConfig, Option<PresetKind>), Failure> {
    let (mut cfg, kind) = match (&args.preset, &args.config) {
        (Some(name), _) => {
            let p =
                preset(name).ok_or_else(|| Failure::Config(format!("unknown preset {name:?}")))?;
            (p.config, Some(p.kind))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            let cfg: ExperimentConfig = toml::from_str(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            (cfg, None)
        }
        (None, None) => (ExperimentConfig::default(), None),
    };
    if let Some(c) = args.coding {
        cfg.coding = c;
    }
    if let Some(p) = args.payload {
        cfg.payload_mode = p;
    }
    if let Some(t) = args.target {
        cfg.target = t;
    }
    if let Some(t) = &args.tau {
        cfg.tau_grid = t.clone();
    }
    if let Some(t) = &args.tau_ns {
        cfg.tau_grid = t.iter().map(|ns| ns / HALF_BIT_NS).collect();
    }
    if let Some(t) = &args.tau_range {
        cfg.tau_grid = t.clone();
    }
    if let Some(s) = &args.sir {
        cfg.sir_db_grid = s.clone();
    }
    if let Some(s) = &args.sir_range {
        cfg.sir_db_grid = s.clone();
    }
    if let Some(phi) = args.phi {
        cfg.phi_mode = PhiMode::Fixed(phi);
    }
    if let Some(n) = args.phi_points {
        cfg.phi_grid = crate::montecarlo::phase_grid(n);
    }
    if let Some(n) = args.n_interferers {
        cfg.n_interferers = n;
    }
    if let Some(s) = args.power_split {
        cfg.interferer_power_split = s;
    }
    if let Some(b) = args.payload_bits {
        cfg.payload_bits = b;
    }
    if let Some(n) = args.noise_std {
        cfg.noise_std = n;
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(p) = cli.packets {
        cfg.packets_per_point = p;
    }
    cfg.validate()?;
    Ok((cfg, kind))
}

/// One value of an output table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Float(v) => s.serialize_f64(*v),
            Cell::Text(v) => s.serialize_str(v),
        }
    }
}

/// Column-named rows rendered identically as CSV and JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
    }

    /// `{"manifest": …, "columns": […], "rows": [{column: value, …}]}`.
    pub fn to_json(&self, manifest: Option<&str>) -> String {
        struct Row<'a>(&'a [String], &'a [Cell]);
        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0.iter().zip(self.1) {
                    m.serialize_entry(k, v)?;
                }
                m.end()
            }
        }
        struct Doc<'a>(&'a Table, Option<&'a str>);
        impl Serialize for Doc<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let rows: Vec<Row> = self
                    .0
                    .rows
                    .iter()
                    .map(|r| Row(&self.0.columns, r))
                    .collect();
                let mut st = s.serialize_struct("Table", 3)?;
                st.serialize_field("manifest", &self.1)?;
                st.serialize_field("columns", &self.0.columns)?;
                st.serialize_field("rows", &rows)?;
                st.end()
            }
        }
        let mut out = serde_json::to_string_pretty(&Doc(self, manifest)).expect("table serializes");
        out.push('\n');
        out
    }
}

fn chip_rows() -> Table {
    let mut columns = vec!["symbol".to_string()];
    columns.extend((0..CHIPS_PER_SYMBOL).map(|i| format!("c{i}")));
    let rows = IEEE_802_15_4
        .rows()
        .iter()
        .enumerate()
        .map(|(s, row)| {
            std::iter::once(Cell::Int(s as i64))
                .chain(row.iter().map(|&c| Cell::Int(c as i64)))
                .collect()
        })
        .collect();
    Table { columns, rows }
}

/// Provenance record written next to every data file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub arguments: Vec<String>,
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub duration_s: f64,
    pub outputs: Vec<OutputChecksum>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputChecksum {
    pub file: String,
    pub sha256: String,
}

struct ManifestInput {
    command: String,
    arguments: Vec<String>,
    config: serde_json::Value,
    master_seed: u64,
    notes: Vec<String>,
}

impl ManifestInput {
    fn new(
        command: &str,
        arguments: &[String],
        config: serde_json::Value,
        master_seed: u64,
    ) -> Self {
        ManifestInput {
            command: command.into(),
            arguments: arguments.to_vec(),
            config,
            master_seed,
            notes: Vec::new(),
        }
    }

    fn experiment(command: &str, arguments: &[String], cfg: &ExperimentConfig) -> Self {
        let config = serde_json::to_value(cfg).expect("config serializes");
        ManifestInput::new(command, arguments, config, cfg.master_seed)
    }
}

/// Path of the manifest belonging to a data file.
pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    data.with_file_name(name)
}

fn emit(cli: &Cli, table: &Table, input: ManifestInput, started: Instant) -> Result<(), Failure> {
    let Some(out) = &cli.out else {
        let text = match cli.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(None),
        };
        print!("{text}");
        return Ok(());
    };
    let manifest_file = manifest_path(out);
    let manifest_name = manifest_file
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let data = match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(Some(&manifest_name)),
    };
    let write = |path: &Path, text: &str| {
        fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
    };
    write(out, &data)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: input.command,
        arguments: input.arguments,
        config: input.config,
        master_seed: input.master_seed,
        duration_s: started.elapsed().as_secs_f64(),
        outputs: vec![OutputChecksum {
            file: out
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: hex::encode(Sha256::digest(data.as_bytes())),
        }],
        notes: input.notes,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write(&manifest_file, &text)
}
