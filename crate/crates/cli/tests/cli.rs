use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn pmset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmset")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Data rows of a CSV, split into fields, after checking the header.
fn rows(csv: &str, header: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(header));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `(2 p_A - 1)² + (2 p_B - 1)² = 1/2`.
fn circle(tau: f64) -> f64 {
    0.5 + 0.5 * (0.5 - (2.0 * tau - 1.0).powi(2)).max(0.0).sqrt()
}

#[test]
fn qrac_boundary_sweep() {
    let o = pmset(&["qrac", "--tau-grid", "0.5:0.85:9", "--level", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = rows(&stdout(&o), "tau,p_alice_max,status,gap");
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let (tau, p_a) = (num(&r[0]), num(&r[1]));
        assert_eq!(r[2], "optimal");
        assert!((p_a - circle(tau)).abs() < 1e-4, "tau {tau}: {p_a}");
        assert!(num(&r[3]).abs() < 1e-4);
    }
    assert!((num(&rows[0][1]) - 0.853553).abs() < 1e-4);
}

#[test]
fn phase_qkd_rate_falls_with_loss() {
    let o = pmset(&["phase-qkd", "--loss-db", "0,2,4", "--pdc", "1e-7", "--eopt", "0.02", "--level", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = rows(&stdout(&o), "loss_db,mu_opt,eps_ph,keyrate,status");
    assert_eq!(rows.len(), 3);
    let rates: Vec<f64> = rows.iter().map(|r| num(&r[3])).collect();
    assert!(rates[0] > rates[1] && rates[1] > rates[2] && rates[2] > 0.0, "{rates:?}");
    for r in &rows {
        assert_eq!(r[4], "optimal");
        assert!((0.0..=0.5).contains(&num(&r[2])));
    }
}

#[test]
fn export_matches_frozen_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("problem.dat-s");
    let o = pmset(&["export", "--scenario", "qrac", "--tau", "0.5", "--out", arg(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/qrac_level1_tau0.5.dat-s");
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(golden).unwrap());
}

#[test]
fn export_key_distribution_problems() {
    for scenario in ["phase-qkd", "cow"] {
        let o = pmset(&["export", "--scenario", scenario, "--mu", "0.1", "--loss-db", "3"]);
        assert_eq!(code(&o), 0, "{scenario}: {}", stderr(&o));
        assert!(pmset::sdp::parse_sdpa(&stdout(&o)).is_ok(), "{scenario}");
    }
}

#[test]
fn cow_rows_follow_grid_order() {
    let o = pmset(&["cow", "--loss-db", "0,10", "--ratios", "0.5,1", "--mu-grid", "0.01,0.03,0.1,0.2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = rows(&stdout(&o), "ratio,loss_db,keyrate,status");
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (num(&r[0]), num(&r[1]))).collect();
    assert_eq!(keys, vec![(0.5, 0.0), (1.0, 0.0), (0.5, 10.0), (1.0, 10.0)]);
    assert!(num(&rows[0][2]) > 0.0);
    assert!(num(&rows[2][2]) > 0.0);
    assert_eq!(num(&rows[3][2]), 0.0);
}

#[test]
fn validate_reports_bad_tau() {
    let o = pmset(&["validate", "qrac", "--tau", "1.2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("tau 1.2 out of [0.5,1]"), "{}", stdout(&o));
}

#[test]
fn validate_reports_empty_mu_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[phase-qkd]\nmu-grid = []\n");
    let o = pmset(&["validate", "--config", arg(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("mu grid is empty"), "{}", stdout(&o));
}

#[test]
fn validate_lists_every_violation() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[solver]\ntol = 1.0\n[qrac]\ntau-grid = [0.4, 1.3]\nlevel = 0\n[cow]\nratios = \"0:1:3\"\nbs-t = 1.0\n",
    );
    let o = pmset(&["validate", "--config", arg(&cfg)]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    for needle in ["tol 1", "tau 0.4", "tau 1.3", "level must", "ratio 0 ", "bs-t 1"] {
        assert!(lines.iter().any(|l| l.contains(needle)), "{needle} missing from {lines:?}");
    }
}

#[test]
fn validate_accepts_reference_parameters() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"
[solver]
tol = 1e-6
max-iters = 200
jobs = 2

[qrac]
tau-grid = "0.5:0.85:9"
level = 1

[phase-qkd]
loss-db = [0, 2, 4]
mu-grid = "0.001:1:20"
pdc = 1e-7
eopt = 0.02
level = 2
detection = "per-state"

[cow]
loss-db = "0:30:7"
ratios = "0.1:1:10"
delta = 0.0
bs-t = 0.5
pdc = 1e-7
level = 2
monitor = true

[export]
scenario = "qrac"
tau = 0.5

[states]
variant = "modes"
modes = [[[0.3, 0.0]], [[-0.3, 0.0]], [[0.0, 0.3]], [[0.0, -0.3]]]
"#,
    );
    let o = pmset(&["validate", "--config", arg(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o), "");
}

#[test]
fn validate_checks_state_families() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[states]\nvariant = \"gram\"\ngram = [[1, 0], [1.5, 0], [1.5, 0], [1, 0]]\n");
    let o = pmset(&["validate", "--config", arg(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("states"), "{}", stdout(&o));
}

#[test]
fn unknown_keys_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[qrac]\ntau = 0.5\ncolour = \"blue\"\n");
    let o = pmset(&["qrac", "--config", arg(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
    let o = pmset(&["validate", "--config", arg(&cfg)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn flags_override_the_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("from-file.csv");
    let cfg = write_config(&dir, &format!("[qrac]\ntau-grid = [0.6, 0.7]\nout = {:?}\n", arg(&out)));
    let o = pmset(&["qrac", "--config", arg(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(rows(&std::fs::read_to_string(&out).unwrap(), "tau,p_alice_max,status,gap").len(), 2);
    let o = pmset(&["qrac", "--config", arg(&cfg), "--tau", "0.75", "--out", "-"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = rows(&stdout(&o), "tau,p_alice_max,status,gap");
    assert_eq!(rows.len(), 1);
    assert!((num(&rows[0][1]) - 0.75).abs() < 1e-4);
}

#[test]
fn output_is_deterministic_across_job_counts() {
    let dir = TempDir::new().unwrap();
    let run = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        let o = pmset(&[
            "cow",
            "--loss-db",
            "0,5",
            "--ratios",
            "0.3,0.6,1",
            "--mu-grid",
            "0.02,0.1",
            "--jobs",
            jobs,
            "--out",
            arg(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let first = run("1", "a.csv");
    assert_eq!(first, run("3", "b.csv"));
    assert_eq!(first, run("1", "c.csv"));
}

#[test]
fn solver_failure_exits_two_with_rows_written() {
    let o = pmset(&["qrac", "--tau-grid", "0.6,1.0"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let rows = rows(&stdout(&o), "tau,p_alice_max,status,gap");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][2], "optimal");
    assert_ne!(rows[1][2], "optimal");
}

#[test]
fn usage_and_io_errors_exit_one() {
    assert_eq!(code(&pmset(&["qrac", "--no-such-flag"])), 1);
    assert_eq!(code(&pmset(&["qrac", "--config", "/nonexistent/run.toml"])), 1);
    assert_eq!(code(&pmset(&["qrac", "--tau", "0.6", "--out", "/nonexistent/dir/out.csv"])), 1);
    assert_eq!(code(&pmset(&["--help"])), 0);
}
