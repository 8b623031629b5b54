//! End-to-end runs of the command-line tool.

use std::path::Path;
use std::process::{Command, Output};

use msk_collide::cli::manifest_path;
use msk_collide::signal::{ChipTable, IEEE_802_15_4};
use sha2::{Digest, Sha256};

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msk-collide"))
        .args(args)
        .output()
        .expect("tool runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn chiptable_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chips.csv");
    let run = tool(&["chiptable", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("symbol,c0,c1,"));
    assert_eq!(ChipTable::from_csv(&text).unwrap(), IEEE_802_15_4);
    assert!(manifest_path(&out).exists());
}

#[test]
fn chiptable_to_stdout() {
    let run = tool(&["chiptable"]);
    assert_eq!(code(&run), 0);
    assert_eq!(String::from_utf8(run.stdout).unwrap().lines().count(), 17);
}

#[test]
fn sweep_writes_data_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let run = tool(&[
        "sweep",
        "--packets",
        "20",
        "--seed",
        "5",
        "--coding",
        "hdd",
        "--tau",
        "0,1.5",
        "--sir",
        "-6,0,6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let data = std::fs::read(&out).unwrap();
    let text = String::from_utf8(data.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tau_over_T,sir_db,prr_mean,prr_std,ber,ser,packets"
    );
    assert_eq!(lines.count(), 6);

    let manifest = read_json(&manifest_path(&out));
    assert_eq!(manifest["master_seed"], 5);
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["config"]["coding"], "hdd");
    assert_eq!(manifest["config"]["packets_per_point"], 20);
    let digest = hex::encode(Sha256::digest(&data));
    assert_eq!(manifest["outputs"][0]["sha256"], digest.as_str());
}

#[test]
fn json_output_names_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zone.json");
    let run = tool(&[
        "zone",
        "--packets",
        "5",
        "--format",
        "json",
        "--tau",
        "0",
        "--phi-points",
        "4",
        "--sir-db",
        "-40",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let data = read_json(&out);
    assert_eq!(data["manifest"], "zone.json.manifest.json");
    assert!(manifest_path(&out).exists());
}

#[test]
fn validate_exit_codes() {
    assert_eq!(code(&tool(&["validate", "--draws", "20"])), 0);
    assert_eq!(
        code(&tool(&["validate", "--draws", "5", "--tolerance", "0"])),
        1
    );
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "tau_grid = []\n").unwrap();
    assert_eq!(
        code(&tool(&["sweep", "--config", cfg.to_str().unwrap()])),
        2
    );

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "packets = 3\n").unwrap();
    assert_eq!(
        code(&tool(&["sweep", "--config", bad.to_str().unwrap()])),
        2
    );

    assert_eq!(code(&tool(&["sweep", "--preset", "fig99"])), 2);
    assert_eq!(code(&tool(&["sweep", "--coding", "viterbi"])), 2);
    assert_eq!(code(&tool(&["frobnicate"])), 2);
    assert_eq!(
        code(&tool(&["sweep", "--config", "/nonexistent/x.toml"])),
        2
    );
}

#[test]
fn config_file_drives_a_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "packets_per_point = 10\ncoding = \"sdd\"\npayload_mode = \"identical\"\ntau_grid = [0.0]\nsir_db_grid = [-20.0, 0.0]\nmaster_seed = 9\n",
    )
    .unwrap();
    let out = dir.path().join("s.csv");
    let run = tool(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);
    assert_eq!(read_json(&manifest_path(&out))["master_seed"], 9);
}

#[test]
fn ninterf_rows() {
    let run = tool(&["ninterf", "--packets", "10", "--max-n", "2"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("n,layout,payload_mode,prr_mean,prr_std"));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
}
