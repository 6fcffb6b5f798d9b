use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nlpl_cli::{emit_plot, parse_config, PlotKind, MANIFEST_FILE};

const K1: &str = "kernel = truncated-power\nkernel.s = 0.5\n";

fn nlpl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlpl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, body: &str) -> String {
    fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

fn sweep_cfg() -> String {
    format!("{K1}domain = interval 0 1\nmode = vanishing\ndeltas = 0.4, 0.2, 0.1, 0.05\np = 2\nm = 1\n")
}

fn eig_cfg() -> String {
    format!("{K1}domain = interval 0 1\nh = 0.0125\ndelta = 0.1\np = 2\nm = 3\n")
}

/// CSV rows with the named column blanked out.
fn without_column(csv: &str, name: &str) -> Vec<String> {
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let skip = header.iter().position(|c| *c == name).unwrap();
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, v)| v)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

fn is_full_precision(v: &str) -> bool {
    let (mantissa, exp) = match v.split_once('e') {
        Some(p) => p,
        None => return false,
    };
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.len() == 17 && exp.parse::<i32>().is_ok()
}

#[test]
fn kernel_check_reports_every_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "k.cfg", K1);
    let out = nlpl(dir.path(), &["kernel-check", "--config", &cfg, "--out", "k"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(dir.path(), "k/report.txt");
    for h in ["h0", "h1", "h2", "h3", "h4"] {
        assert!(report.contains(&format!("{h}.verdict = pass")), "{report}");
    }
    assert!(report.contains("all_pass = true"));
    let s: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("s_infinity = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((s - 0.5).abs() <= 0.01);
}

#[test]
fn failing_hypotheses_still_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let table = "0.01 1\n0.5 1\n1 1\n";
    fs::write(dir.path().join("flat.txt"), table).unwrap();
    let cfg = config(dir.path(), "k.cfg", "kernel = tabulated\nkernel.table = flat.txt\n");
    let out = nlpl(dir.path(), &["kernel-check", "--config", &cfg, "--out", "k"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(dir.path(), "k/report.txt");
    assert!(report.contains("h3.verdict = fail"), "{report}");
    assert!(report.contains("all_pass = false"));
}

#[test]
fn sweep_writes_four_rows_a_rate_line_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.cfg", &sweep_cfg());
    let out = nlpl(dir.path(), &["sweep", "--config", &cfg, "--out", "s"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "s/sweep.csv");
    let rows: Vec<&str> = csv.lines().skip(1).filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(csv.lines().any(|l| l.starts_with("# rate slope=")));
    for row in rows {
        assert!(row.split(',').all(is_full_precision), "{row}");
    }
    let svg = read(dir.path(), "s/sweep_error.svg");
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    for k in 1..=4 {
        assert!(dir.path().join(format!("s/eigenfunction_{k}.txt")).exists());
        assert!(dir.path().join(format!("s/eigenfunction_{k}.svg")).exists());
    }
}

#[test]
fn rerun_from_the_manifest_reproduces_the_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.cfg", &sweep_cfg());
    assert!(nlpl(dir.path(), &["sweep", "--config", &cfg, "--out", "a", "--threads", "1"]).status.success());
    let manifest = format!("a/{MANIFEST_FILE}");
    assert!(nlpl(dir.path(), &["sweep", "--config", &manifest, "--out", "b", "--threads", "3"]).status.success());
    let (a, b) = (read(dir.path(), "a/sweep.csv"), read(dir.path(), "b/sweep.csv"));
    assert_eq!(without_column(&a, "runtime_s"), without_column(&b, "runtime_s"));
    for k in 1..=4 {
        let f = format!("eigenfunction_{k}.txt");
        assert_eq!(read(dir.path(), &format!("a/{f}")), read(dir.path(), &format!("b/{f}")));
    }
    // a rerun gives every key explicitly, so only the settings themselves must agree
    let strip = |t: String| -> Vec<String> {
        t.lines()
            .filter(|l| !l.starts_with("out =") && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    };
    assert_eq!(strip(read(dir.path(), &manifest)), strip(read(dir.path(), "b/manifest.txt")));
}

#[test]
fn eig_is_deterministic_and_plots_with_the_collar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "e.cfg", &eig_cfg());
    for out in ["a", "b"] {
        let o = nlpl(dir.path(), &["eig", "--config", &cfg, "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = read(dir.path(), "a/eigenpairs.csv");
    assert_eq!(csv, read(dir.path(), "b/eigenpairs.csv"));
    assert_eq!(csv.lines().count(), 4);
    let lambdas: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[0] < w[1]) && lambdas[0] > 0.0);
    let svg = read(dir.path(), "a/eigenfunction_1.svg");
    assert!(svg.contains("<rect") && svg.contains("<polyline"));
    assert_eq!(svg, read(dir.path(), "b/eigenfunction_1.svg"));
}

#[test]
fn nonlinear_eig_uses_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let body = eig_cfg().replace("p = 2\nm = 3\n", "p = 3\nm = 1\n");
    let cfg = config(dir.path(), "e.cfg", &body);
    let o = nlpl(dir.path(), &["eig", "--config", &cfg, "--out", "e", "--seed", "11"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(dir.path(), "e/manifest.txt").contains("seed = 11"));
    let row = read(dir.path(), "e/eigenpairs.csv").lines().nth(1).unwrap().to_string();
    let relative: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert!(relative <= 1e-5, "{row}");
}

#[test]
fn solve_and_symbol_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let body = eig_cfg().replace("m = 3\n", "load = 2\n").replace("p = 2", "p = 3");
    let cfg = config(dir.path(), "p.cfg", &body);
    let o = nlpl(dir.path(), &["solve", "--config", &cfg, "--out", "p"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "p/solve.csv");
    assert!(csv.lines().nth(1).unwrap().ends_with(",gradient"), "{csv}");
    assert!(dir.path().join("p/solution.txt").exists() && dir.path().join("p/solution.svg").exists());

    let cfg = config(dir.path(), "y.cfg", &format!("{K1}xi = 0, 0.5, 1, 2\n"));
    let o = nlpl(dir.path(), &["symbol", "--config", &cfg, "--out", "y"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "y/symbol.csv");
    assert_eq!(csv.lines().count(), 5);
    let zero = csv.lines().nth(1).unwrap();
    assert_eq!(zero.split(',').nth(2).unwrap().parse::<f64>().unwrap(), 0.0);
}

#[test]
fn missing_key_gives_a_machine_readable_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "e.cfg", &eig_cfg().replace("p = 2\n", ""));
    let o = nlpl(dir.path(), &["eig", "--config", &cfg, "--out", "e"]);
    assert_eq!(o.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(record["kind"], "missing-key");
    assert_eq!(record["key"], "p");
    let on_disk: serde_json::Value = serde_json::from_str(&read(dir.path(), "e/error.json")).unwrap();
    assert_eq!(on_disk, record);
    assert!(!dir.path().join("e").join(MANIFEST_FILE).exists());
}

#[test]
fn horizon_list_is_an_unknown_key_for_solve() {
    let dir = tempfile::tempdir().unwrap();
    let body = eig_cfg().replace("delta = 0.1\n", "deltas = 0.1, 0.05\n").replace("m = 3\n", "");
    let cfg = config(dir.path(), "p.cfg", &body);
    let o = nlpl(dir.path(), &["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(record["kind"], "unknown-key");
    assert_eq!(record["key"], "deltas");
}

#[test]
fn computation_errors_exit_nonzero_with_a_record() {
    let dir = tempfile::tempdir().unwrap();
    // h > δ/4 leaves the horizon unresolved
    let body = sweep_cfg() + "grid = fixed 0.2\n";
    let cfg = config(dir.path(), "s.cfg", &body);
    let o = nlpl(dir.path(), &["sweep", "--config", &cfg, "--out", "s"]);
    assert_eq!(o.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_str(&read(dir.path(), "s/error.json")).unwrap();
    assert_eq!(record["kind"], "computation");
    assert_eq!(record["status"], "error");
}

#[test]
fn manifest_lists_defaults_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "e.cfg", &eig_cfg());
    assert!(nlpl(dir.path(), &["eig", "--config", &cfg, "--out", "e"]).status.success());
    let manifest = read(dir.path(), "e/manifest.txt");
    let original = parse_config(&format!("command = eig\n{}out = e\n", eig_cfg())).unwrap();
    let defaulted = manifest.lines().find_map(|l| l.strip_prefix("# defaulted = ")).unwrap();
    for key in &original.defaulted {
        assert!(defaulted.split(", ").any(|k| k == key), "{key}");
        assert!(manifest.lines().any(|l| l.starts_with(&format!("{key} = "))), "{key}");
    }
    assert_eq!(parse_config(&manifest).unwrap(), original);
}

#[test]
fn empty_sweep_table_writes_no_plot() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("sweep.csv");
    fs::write(&empty, "").unwrap();
    let target = dir.path().join("plot.svg");
    assert!(emit_plot(&empty, PlotKind::SweepError, &target).is_err());
    assert!(!target.exists());
    fs::write(&empty, format!("{}\n# rate undefined\n", nlpl::horizon::SWEEP_CSV_HEADER)).unwrap();
    assert!(emit_plot(&empty, PlotKind::SweepError, &target).is_err());
    assert!(!target.exists());
}

#[test]
fn plots_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.cfg", &sweep_cfg());
    assert!(nlpl(dir.path(), &["sweep", "--config", &cfg, "--out", "s"]).status.success());
    let csv = dir.path().join("s/sweep.csv");
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    emit_plot(&csv, PlotKind::SweepError, &a).unwrap();
    emit_plot(&csv, PlotKind::SweepError, &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
