use std::path::Path;
use std::process::{Command, Output};

fn latstab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latstab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("LATSTAB_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn data_part(report: &str) -> &str {
    report.split("# metadata").next().unwrap()
}

fn csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let head = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (head, rows)
}

#[test]
fn harmonic_stability_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = latstab(&["stability", "--model", "harmonic", "--N", "8", "--scan-M", "200"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&d.path().join("report.txt"));
    assert!(text.contains("overall: pass\n"));
    assert!(text.contains("assumption_b.inside_count_range: 3 3\n"));
    assert!(text.contains("\n# metadata\nversion: "));
    let json: serde_json::Value = serde_json::from_str(&read(&d.path().join("report.json"))).unwrap();
    assert_eq!(json["stability"]["overall"], "pass");
    assert_eq!(json["scan_series"].as_array().unwrap().len(), 199);
    assert_eq!(json["metadata"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn lj_stability_passes_and_threshold_fails() {
    let d = tempfile::tempdir().unwrap();
    let o = latstab(&["stability", "--model", "lj", "--N", "8", "--scan-M", "200"], d.path());
    assert_eq!(code(&o), 0);
    assert!(read(&d.path().join("report.txt")).contains("elasticity_bound.holds: true\n"));
    let o = latstab(&["stability", "--model", "lj", "--N", "8", "--scan-M", "200", "--det-threshold", "1.0"], d.path());
    assert_eq!(code(&o), 2);
    assert!(read(&d.path().join("report.txt")).contains("mode1.verdict: fail\n"));
}

#[test]
fn config_file_errors_exit_one_with_line() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "# comment\nmodel.name = lj\nscan.oops = 3\n").unwrap();
    let out = d.path().join("out");
    let o = latstab(&["stability", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run.cfg:3"), "{err}");
    assert!(err.contains("unknown key `scan.oops`"), "{err}");
    assert!(!out.exists());

    std::fs::write(&cfg, "grid.N = 0\n").unwrap();
    let o = latstab(&["stability", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.cfg:1: grid.N"));
}

#[test]
fn bad_flags_exit_one() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&latstab(&["stability", "--scan-M", "10"], d.path())), 1);
    assert_eq!(code(&latstab(&["stability", "--model", "morse"], d.path())), 1);
    assert_eq!(code(&latstab(&["stability", "--no-such-flag"], d.path())), 1);
    assert_eq!(code(&latstab(&["converge", "--N-list", "16,8"], d.path())), 1);
    assert_eq!(code(&latstab(&["stability", "--set", "grid.N"], d.path())), 1);
    assert_eq!(std::fs::read_dir(d.path()).unwrap().count(), 0);
}

#[test]
fn config_file_and_flag_precedence() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "model.name = lj\ngrid.N = 8\nscan.M = 100\noutput.formats = text\n").unwrap();
    let out = d.path().join("o");
    let o = latstab(&["stability", "--config", cfg.to_str().unwrap(), "--model", "harmonic"], &out);
    assert_eq!(code(&o), 0);
    let text = read(&out.join("report.txt"));
    assert!(text.starts_with("model: harmonic\ngrid.N: 8\n"));
    assert!(!out.join("report.json").exists());
}

#[test]
fn detscan_table_matches_report() {
    let d = tempfile::tempdir().unwrap();
    let o = latstab(&["detscan", "--model", "lj", "--N", "8", "--scan-M", "300"], d.path());
    assert_eq!(code(&o), 0);
    let raw = read(&d.path().join("detscan.csv"));
    assert!(!raw.contains('\r'));
    let (head, rows) = csv(&raw);
    assert_eq!(head, ["theta", "abs_det", "d_abs_det", "margin"]);
    assert_eq!(rows.len(), 299);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    assert!(rows.last().unwrap()[2].is_nan());
    let min = rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    let summary = read(&d.path().join("detscan.txt"));
    assert!(summary.contains(&format!("min_abs_det: {min:.16e}\n")));
    assert!(summary.contains("monotone_fraction: 1.0000000000000000e0\n"));
}

#[test]
fn converge_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let args = ["converge", "--model", "lj", "--N-list", "8,16,32"];
    let a = latstab(&args, &d.path().join("a"));
    let b = latstab(&[&args[..], &["--threads", "1"]].concat(), &d.path().join("b"));
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let ca = read(&d.path().join("a/convergence.csv"));
    assert_eq!(ca, read(&d.path().join("b/convergence.csv")));
    assert_eq!(
        data_part(&read(&d.path().join("a/convergence.txt"))),
        data_part(&read(&d.path().join("b/convergence.txt")))
    );
    let (head, rows) = csv(&ca);
    assert_eq!(head, ["N", "eps", "e_l2", "e_h1", "e_h2"]);
    assert_eq!(rows.len(), 3);
    let stdout = String::from_utf8_lossy(&a.stdout);
    let order: f64 = stdout.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((1.8..=2.2).contains(&order), "{stdout}");
    assert_eq!(stdout.trim().rsplit(' ').next().unwrap().split('.').nth(1).unwrap().len(), 3);
}

#[test]
fn converge_singleton_reports_na() {
    let d = tempfile::tempdir().unwrap();
    let o = latstab(&["converge", "--N-list", "8"], d.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("fitted order n/a"));
    assert!(read(&d.path().join("convergence.txt")).contains("fitted_order: n/a\n"));
}

#[test]
fn stability_report_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let args = ["stability", "--model", "lj", "--N", "8", "--scan-M", "120"];
    latstab(&args, &d.path().join("a"));
    latstab(&args, &d.path().join("b"));
    let a = read(&d.path().join("a/report.txt"));
    let b = read(&d.path().join("b/report.txt"));
    assert_eq!(data_part(&a), data_part(&b));
    let hash = |s: &str| s.lines().find(|l| l.starts_with("config_hash")).unwrap().to_string();
    assert_eq!(hash(&a), hash(&b));
}

#[test]
fn symbol_table_scales_with_eps() {
    let d = tempfile::tempdir().unwrap();
    let run = |n: &str, dir: &str| {
        let o = latstab(&["symbol", "--model", "lj", "--N", n, "--k-max", "3", "--steps", "6"], &d.path().join(dir));
        assert_eq!(code(&o), 0);
        csv(&read(&d.path().join(dir).join("symbol.csv")))
    };
    let (head, coarse) = run("16", "c");
    let (_, fine) = run("32", "f");
    let col = |name: &str| head.iter().position(|h| h == name).unwrap();
    assert!(coarse[0][col("h_at_00")..col("h_at_11") + 1].iter().all(|&v| v == 0.0));
    for (c, f) in coarse.iter().zip(&fine).skip(1) {
        let r = c[col("diff_at_cb")] / f[col("diff_at_cb")];
        assert!((3.5..=4.5).contains(&r), "ratio {r} at t {}", c[0]);
        assert!(c[col("hermitian_residual")] <= 1e-12);
    }
}
