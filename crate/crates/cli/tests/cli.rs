//! End-to-end checks of the binary: exit codes, output files, and
//! determinism. Heavy analyses run at reduced cutoffs to stay fast.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_circuitq")
}

fn netlist() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../netlists/difluxmon.toml")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn read(dir: &Path, suffix: &str) -> String {
    let entry = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .find(|e| e.file_name().to_string_lossy().ends_with(suffix))
        .unwrap_or_else(|| panic!("no *{suffix} in {}", dir.display()));
    std::fs::read_to_string(entry.path()).unwrap()
}

/// Reduced-cutoff flags that keep the three-mode device tractable while
/// preserving the 0-1 transition to a few percent.
const FAST: &[&str] = &["--cutoff-charge", "4", "--cutoff-flux", "22", "--tol", "1e-8"];

#[test]
fn spectrum_reports_qubit_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let nl = netlist();
    let mut args = vec!["spectrum", nl.to_str().unwrap(), "--phi-ext", "pi", "--levels", "6"];
    args.extend_from_slice(FAST);
    args.extend_from_slice(&["--out-dir", dir.path().to_str().unwrap()]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let table = read(dir.path(), ".spectrum.tsv");
    assert!(table.contains("# w01_ghz: 2.5"), "missing w01 header:\n{table}");
    // 6 kept states -> 6 data rows after the '#' headers
    let rows = table.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 6);
    let manifest = read(dir.path(), ".manifest.json");
    assert!(manifest.contains("\"cutoff_charge\": 4"));
    assert!(manifest.contains(".spectrum.tsv"));
}

#[test]
fn missing_netlist_fails_with_diagnostic() {
    let out = run(&["spectrum", "/nonexistent/net.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn invalid_netlist_reports_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    // island 1 has no inductive connection at all: a frozen mode
    std::fs::write(&path, "nodes = 2\n\n[[branch]]\nfrom = 0\nto = 1\nc = 50.0\n").unwrap();
    let out = run(&["spectrum", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid netlist"));
}

#[test]
fn sweep_needs_exactly_one_axis() {
    let nl = netlist();
    let out = run(&["sweep", nl.to_str().unwrap()]);
    assert!(!out.status.success());
    let out = run(&["sweep", nl.to_str().unwrap(), "--flux", "0:pi:3", "--charge", "0:0.5:3"]);
    assert!(!out.status.success());
}

#[test]
fn evolve_is_deterministic_across_runs() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let targets = dir_a.path().join("targets.toml");
    std::fs::write(
        &targets,
        "[search]\nn_islands = 2\npopulation = 8\ngenerations = 6\n\
         mutation_probability = 0.6\nn_cull = 4\n\n\
         [fitness]\nomega01 = { target = 3.0 }\n",
    )
    .unwrap();

    let go = |dir: &Path| {
        let out = run(&[
            "evolve",
            targets.to_str().unwrap(),
            "--seed",
            "7",
            "--cutoff-charge",
            "5",
            "--cutoff-flux",
            "14",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (read(dir, ".history.tsv"), read(dir, ".best.toml"))
    };
    let (hist_a, best_a) = go(dir_a.path());
    let (hist_b, best_b) = go(dir_b.path());
    assert_eq!(hist_a, hist_b);
    assert_eq!(best_a, best_b);
    assert!(hist_a.lines().filter(|l| !l.starts_with('#')).count() == 6);
}

#[test]
fn resilience_writes_monotone_sigma_rows() {
    let dir = tempfile::tempdir().unwrap();
    // single-mode device keeps the Monte Carlo cheap
    let path = dir.path().join("flux.toml");
    std::fs::write(
        &path,
        "nodes = 2\nclosure = [1]\n\n[[branch]]\nfrom = 0\nto = 1\nc = 9.7\nej = 4.0\n\n\
         [[branch]]\nfrom = 0\nto = 1\nc = 9.7\nl = 181.6\n\n[bias]\nphi = \"pi\"\n",
    )
    .unwrap();
    let out = run(&[
        "resilience",
        path.to_str().unwrap(),
        "--sigmas",
        "0.0,0.02",
        "--samples",
        "10",
        "--cutoff-flux",
        "20",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read(dir.path(), ".resilience.tsv");
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    let std_of = |row: &str| row.split('\t').nth(4).unwrap().parse::<f64>().unwrap();
    assert!(std_of(rows[0]) < 1e-12);
    assert!(std_of(rows[1]) > 0.0);
}

#[test]
fn gate_table_has_requested_grid() {
    let dir = tempfile::tempdir().unwrap();
    let nl = netlist();
    let mut args = vec![
        "gate",
        nl.to_str().unwrap(),
        "--shape",
        "drag",
        "--tg",
        "10:20:2",
        "--levels",
        "4",
        "--phi-ext",
        "pi",
    ];
    args.extend_from_slice(FAST);
    args.extend_from_slice(&["--out-dir", dir.path().to_str().unwrap()]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read(dir.path(), ".gate.tsv");
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let error: f64 = row.split('\t').nth(1).unwrap().parse().unwrap();
        assert!(error > 0.0 && error < 0.2, "implausible gate error {error}");
    }
}

#[test]
fn readout_reports_dispersive_shifts_and_reset() {
    let dir = tempfile::tempdir().unwrap();
    let nl = netlist();
    let mut args = vec![
        "readout",
        nl.to_str().unwrap(),
        "--phi-ext",
        "pi",
        "--levels",
        "4",
        "--reset",
    ];
    args.extend_from_slice(FAST);
    args.extend_from_slice(&["--out-dir", dir.path().to_str().unwrap()]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read(dir.path(), ".readout.tsv");
    assert!(table.contains("# chi_1_rad_ns:"));
    assert!(table.contains("# photons_mid_0: 5.0"), "calibration missed:\n{table}");
    let reset = read(dir.path(), ".reset.tsv");
    assert!(reset.contains("# amplification:"));
}
