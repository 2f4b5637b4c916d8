use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qspeed(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qspeed"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("run qspeed")
}

/// Numeric columns of a sweep CSV by header name, rows in file order.
fn columns(csv: &str, names: &[&str]) -> Vec<Vec<f64>> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx: Vec<usize> = names.iter().map(|n| header.iter().position(|h| h == n).unwrap()).collect();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    idx.iter().map(|&i| rows.iter().map(|r| r[i].parse().unwrap()).collect()).collect()
}

#[test]
fn figure_9a_has_plateau_then_transition() {
    let dir = tempfile::tempdir().unwrap();
    let out = qspeed(dir.path(), &["figure", "9a"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("fig9a.csv")).unwrap();
    assert!(csv.starts_with("overlay,gamma,tau_qsl,n_blp,pop_tau,identity_residual,status\n"));
    let cols = columns(&csv, &["gamma", "tau_qsl", "n_blp"]);
    let (gamma, tau, n) = (&cols[0], &cols[1], &cols[2]);
    assert_eq!((tau[0], n[0]), (1.0, 0.0));
    let edge = n.iter().position(|&x| x > 1e-9).unwrap();
    assert!(gamma[edge] > 10.0 && gamma[edge] < 20.0, "{}", gamma[edge]);
    assert!(*n.last().unwrap() > 1e-3 && *tau.last().unwrap() < 0.99);
    let summary = fs::read_to_string(dir.path().join("fig9a_summary.txt")).unwrap();
    assert!(summary.contains("critical gamma"));
    let script = fs::read_to_string(dir.path().join("fig9a.gp")).unwrap();
    assert!(script.contains("fig9a.csv") && script.contains("set xlabel 'gamma'"));
}

#[test]
fn figure_8b_collapse_and_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let out = qspeed(dir.path(), &["figure", "8b", "--samples", "1024"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("fig8b.csv")).unwrap();
    let cols = columns(&csv, &["drive", "tau_qsl", "n_blp"]);
    let (tau, n) = (&cols[1], &cols[2]);
    let start = n.iter().position(|&x| x > 1e-4).unwrap();
    let (tau, n) = (&tau[start..], &n[start..]);
    // τ_qsl collapses and recovers repeatedly while N decays slowly with
    // small bumps; the bumps line up with the collapses, so the changes of
    // the two curves are anti-correlated.
    let minima = (1..tau.len() - 1).filter(|&i| tau[i] < tau[i - 1] && tau[i] < tau[i + 1] && tau[i] < 0.1).count();
    assert!(minima >= 3, "{minima} collapses");
    let dt: Vec<f64> = tau.windows(2).map(|w| w[1] - w[0]).collect();
    let dn: Vec<f64> = n.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mt, mn) = (mean(&dt), mean(&dn));
    let cov: f64 = dt.iter().zip(&dn).map(|(a, b)| (a - mt) * (b - mn)).sum();
    let var_t: f64 = dt.iter().map(|a| (a - mt).powi(2)).sum();
    let var_n: f64 = dn.iter().map(|b| (b - mn).powi(2)).sum();
    let corr = cov / (var_t * var_n).sqrt();
    assert!(corr < -0.5, "correlation {corr}");
}

#[test]
fn unknown_figure_lists_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = qspeed(dir.path(), &["figure", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["3a", "5c", "9b"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn simulate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = qspeed(dir.path(), &["simulate", "--set", "gamma=20"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let footer: Vec<&str> = csv.lines().filter(|l| l.starts_with('#')).collect();
    assert_eq!(footer[0], "# status,ok");
    let tau_qsl: f64 = footer.iter().find_map(|l| l.strip_prefix("# tau_qsl,")).unwrap().parse().unwrap();
    assert!(tau_qsl < 1.0);
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data.len() > 4096);
    assert!(data[1].split(',').all(|x| x.contains('e')));
}

#[test]
fn drive_five_at_lambda_ten_stays_on_plateau() {
    // Drive 5 with λ = 10 and γ = 10 is still Markovian: τ_qsl = τ.
    let dir = tempfile::tempdir().unwrap();
    let out = qspeed(dir.path(), &["simulate", "--set", "drive=5", "--set", "lambda=10", "--set", "gamma=10"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("metrics.txt")).unwrap();
    let tau_qsl: f64 = text.lines().find_map(|l| l.strip_prefix("tau_qsl = ")).unwrap().parse().unwrap();
    assert!((tau_qsl - 1.0).abs() < 1e-6, "{tau_qsl}");
}

#[test]
fn single_point_sweep_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let set = ["--set", "lambda=0.1", "--set", "drive=7", "--samples", "2048"];
    let mut args = vec!["sweep", "--set", "axis=gamma", "--set", "axis_min=10", "--set", "axis_max=10", "--set", "axis_count=1"];
    args.extend(set);
    assert!(qspeed(dir.path(), &args).status.success());
    let mut sim = vec!["simulate"];
    sim.extend(set);
    assert!(qspeed(dir.path(), &sim).status.success());
    let sweep = fs::read_to_string(dir.path().join("sweep_gamma.csv")).unwrap();
    let row: Vec<&str> = sweep.lines().nth(1).unwrap().split(',').collect();
    let metrics = fs::read_to_string(dir.path().join("metrics.txt")).unwrap();
    let get = |k: &str| metrics.lines().find_map(|l| l.strip_prefix(&format!("{k} = "))).unwrap().to_string();
    assert_eq!(row[2], get("tau_qsl"));
    assert_eq!(row[3], get("n_blp"));
}

#[test]
fn echo_output_is_a_valid_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = qspeed(dir.path(), &["sweep", "--set", "preset=5c", "--set", "beta=1e-10", "--eta", "plus", "--echo"]);
    assert!(out.status.success());
    let cfg = dir.path().join("echo.cfg");
    fs::write(&cfg, &out.stdout).unwrap();
    let again = qspeed(dir.path(), &["sweep", "--config", cfg.to_str().unwrap(), "--echo"]);
    assert_eq!(again.stdout, out.stdout);
}
