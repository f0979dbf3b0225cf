use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn macrocell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macrocell")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = macrocell(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn fails_naming(args: &[&str], needle: &str) {
    let out = macrocell(args);
    assert!(!out.status.success(), "{args:?} should fail");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(needle), "stderr lacks {needle:?}: {err}");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// All output files except the timestamped manifest, sorted by name.
fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .into_iter()
        .filter(|p| p.file_name().unwrap() != "manifest.toml")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn simulate(out: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "--layout", "3sector", "--iterations", "30", "--out", s(out)];
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn simulate_is_deterministic_and_worker_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    simulate(&a, &["--seed", "7", "--workers", "1"]);
    simulate(&b, &["--seed", "7", "--workers", "1"]);
    simulate(&c, &["--seed", "7", "--workers", "4"]);
    let first = outputs(&a);
    assert!(first.iter().any(|(n, _)| n == "samples.csv"));
    assert!(first.iter().any(|(n, _)| n == "summary.md"));
    assert_eq!(first, outputs(&b));
    assert_eq!(first, outputs(&c));

    let d = tmp.path().join("d");
    simulate(&d, &["--seed", "8"]);
    assert_ne!(first, outputs(&d));
}

#[test]
fn manifest_reproduces_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["simulate", "--case", "switched", "--iterations", "12", "--seed", "21", "--isd", "750", "--out", s(&a)]);
    let manifest = a.join("manifest.toml");
    ok(&["simulate", "--config", s(&manifest), "--out", s(&b)]);
    assert_eq!(outputs(&a), outputs(&b));
}

#[test]
fn invalid_inputs_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");

    let bad_key = tmp.path().join("bad_key.toml");
    fs::write(&bad_key, "[link]\nloadng = 0.5\n").unwrap();
    fails_naming(&["simulate", "--config", s(&bad_key), "--out", s(&out)], "loadng");

    let bad_loading = tmp.path().join("bad_loading.toml");
    fs::write(&bad_loading, "[link]\nloading = 1.5\n").unwrap();
    fails_naming(&["simulate", "--config", s(&bad_loading), "--out", s(&out)], "loading");

    fails_naming(&["simulate", "--workers", "0", "--out", s(&out)], "workers");
    fails_naming(&["simulate", "--isd=-5", "--out", s(&out)], "isd");
    fails_naming(&["simulate", "--layout", "7sector", "--out", s(&out)], "7sector");
}

#[test]
fn compare_cases_has_one_row_per_case() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cmp");
    ok(&["compare-cases", "--iterations", "10", "--out", s(&out)]);
    let tsv = fs::read_to_string(out.join("table_cell_throughput.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 6);
    let overview = fs::read_to_string(out.join("overview.tsv")).unwrap();
    assert!(overview.starts_with("case\t"));
    assert_eq!(overview.lines().count(), 6);
    assert!(out.join("cdf_adaptive_user_sinr.csv").exists());
}

#[test]
fn sweep_single_case() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    ok(&["sweep-isd", "--case", "adaptive", "--iterations", "5", "--out", s(&out)]);
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "case,isd_m,mean_cell_tput_mbps,mean_site_tput_mbps");
    assert_eq!(lines.count(), 4);
}

#[test]
fn dump_grid_and_patterns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("dump");
    ok(&["dump-grid", "--layout", "12sector", "--isd", "500", "--out", s(&out)]);
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 19 * 12);

    ok(&["dump-patterns", "--out", s(&out)]);
    let pattern = fs::read_to_string(out.join("pattern_3sector.csv")).unwrap();
    assert!(pattern.starts_with("angle_deg,gain_db\n"));
}

#[test]
fn beamform_demo_writes_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bf");
    ok(&["beamform-demo", "--seed", "3", "--iterations", "200", "--out", s(&out)]);
    let conv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(conv.starts_with("iteration,mse_db\n"));
    assert!(conv.lines().count() > 2);
    let beam = fs::read_to_string(out.join("beam_pattern.csv")).unwrap();
    assert_eq!(beam.lines().count(), 1 + 361);
}
