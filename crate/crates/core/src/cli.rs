//! `qspeed` command line: simulate, sweep, verify and figure.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 4
//! verification failure, 1 for I/O errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{Command, RunConfig};
use crate::dynamics::{decay_and_shift, AmplitudeTrace};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::model::EtaConvention;
use crate::presets::gnuplot_script;
use crate::sweep::{amplitude_trace, critical_points, densify, run_sweep, sci, summary, write_csv, SweepSpec, TraceSource};
use crate::verify::{verify_all, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qspeed", version, about = "Speed limit and non-Markovianity of a driven qubit in a leaky cavity")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
    /// key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    eta: Option<EtaConvention>,
    /// Initial samples per amplitude trace.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Print the effective config and exit.
    #[arg(long, global = true)]
    echo: bool,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Amplitude trace and metrics for one parameter set.
    Simulate,
    /// Parameter sweep from the config (axis, overlays, or a preset).
    Sweep,
    /// Oracle suite over every figure preset.
    Verify,
    /// Sweep of a named figure preset plus a gnuplot script.
    Figure { name: String },
}

/// Builds the run config: defaults, then the file, then `--set`, then the
/// dedicated flags.
fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.merge_file(path)?;
    }
    for item in &cli.set {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::Config {
            line: None,
            key: item.clone(),
            message: "--set expects key=value".into(),
        })?;
        cfg.set(k.trim(), v, None)?;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(eta) = cli.eta {
        cfg.eta = eta;
    }
    if let Some(n) = cli.samples {
        cfg.set("samples", &n.to_string(), None)?;
    }
    cfg.command = Some(match &cli.command {
        CliCommand::Simulate => Command::Simulate,
        CliCommand::Sweep => Command::Sweep,
        CliCommand::Verify => Command::Verify,
        CliCommand::Figure { name } => {
            cfg.set("preset", name, None)?;
            Command::Figure
        }
    });
    if cfg.command == Some(Command::Figure) && cfg.preset.is_none() {
        return Err(Error::Config { line: None, key: "preset".into(), message: "figure needs a preset".into() });
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn trace_csv(trace: &AmplitudeTrace) -> String {
    let mut s = String::from("t,re_c1,im_c1,pop,popdot,gamma_t,s_t\n");
    for i in 0..trace.len() {
        let (g, shift) = match decay_and_shift(trace, i) {
            Ok(r) => (r.gamma, r.shift),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let c = trace.c1[i];
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            sci(trace.grid[i]),
            sci(c.re),
            sci(c.im),
            sci(trace.pop[i]),
            sci(trace.popdot[i]),
            sci(g),
            sci(shift)
        )
        .unwrap();
    }
    s
}

/// `key = value` lines of the metrics block, or the error kind.
fn metrics_lines(metrics: &Result<MetricsReport>) -> Vec<(&'static str, String)> {
    match metrics {
        Ok(m) => vec![
            ("status", "ok".into()),
            ("tau", sci(m.tau)),
            ("tau_qsl", sci(m.tau_qsl)),
            ("n_blp", sci(m.n_blp)),
            ("pop_tau", sci(m.pop_tau)),
            ("identity_residual", sci(m.identity_residual)),
        ],
        Err(e) => vec![("status", e.kind().into()), ("message", e.to_string())],
    }
}

fn cmd_simulate(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let (source, trace) = amplitude_trace(&cfg.params(), cfg.eta, cfg.samples)?;
    let metrics = MetricsReport::compute(&trace);
    let lines = metrics_lines(&metrics);
    let mut csv = trace_csv(&trace);
    for (k, v) in &lines {
        writeln!(csv, "# {k},{v}").unwrap();
    }
    let mut text = format!("source = {}\nsamples = {}\n", source_name(source), trace.len());
    for (k, v) in &lines {
        writeln!(text, "{k} = {v}").unwrap();
    }
    write_file(&cfg.output_dir, "trace.csv", csv.as_bytes())?;
    write_file(&cfg.output_dir, "metrics.txt", text.as_bytes())?;
    stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
    Ok(match metrics {
        Ok(_) => EXIT_OK,
        Err(e) => exit_code(&e),
    })
}

fn source_name(s: TraceSource) -> &'static str {
    match s {
        TraceSource::Analytic => "analytic",
        TraceSource::OracleFallback => "oracle_fallback",
    }
}

/// Runs a sweep, densifies around the critical points and writes the CSV
/// and summary. Returns the summary text.
fn sweep_outputs(spec: &SweepSpec, dir: &Path, stem: &str) -> Result<String> {
    let coarse = run_sweep(spec)?;
    let table = densify(spec, &coarse);
    let critical = critical_points(spec, &table);
    let mut csv = Vec::new();
    write_csv(spec, &table, &mut csv).map_err(|e| Error::io(dir, e))?;
    let text = summary(spec, &table, &critical);
    write_file(dir, &format!("{stem}.csv"), &csv)?;
    write_file(dir, &format!("{stem}_summary.txt"), text.as_bytes())?;
    Ok(text)
}

fn cmd_sweep(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let spec = cfg.sweep_spec()?;
    let text = sweep_outputs(&spec, &cfg.output_dir, &spec.name)?;
    stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
    Ok(EXIT_OK)
}

fn cmd_figure(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let preset = cfg.preset()?.expect("figure config has a preset");
    let spec = cfg.sweep_spec()?;
    let stem = format!("fig{}", preset.name);
    let mut text = sweep_outputs(&spec, &cfg.output_dir, &stem)?;
    let script = gnuplot_script(&spec, preset.title, &format!("{stem}.csv"));
    write_file(&cfg.output_dir, &format!("{stem}.gp"), script.as_bytes())?;
    if !preset.note.is_empty() {
        text = format!("{}: {}\nnote: {}\n{text}", preset.name, preset.title, preset.note);
    }
    stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
    Ok(EXIT_OK)
}

fn cmd_verify(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let opts = VerifyOptions {
        convention: cfg.eta,
        tolerances: cfg.tolerances,
        samples: cfg.samples,
        ..Default::default()
    };
    let report = verify_all(&opts)?;
    let text = report.text();
    let mut csv = Vec::new();
    report.write_kernel_csv(&mut csv).map_err(|e| Error::io(&cfg.output_dir, e))?;
    write_file(&cfg.output_dir, "verify_report.txt", text.as_bytes())?;
    write_file(&cfg.output_dir, "kernel_agreement.csv", &csv)?;
    stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to `stderr`.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    if cli.echo {
        let _ = stdout.write_all(cfg.echo().as_bytes());
        return EXIT_OK;
    }
    let result = match cfg.command.expect("set by build_config") {
        Command::Simulate => cmd_simulate(&cfg, stdout),
        Command::Sweep => cmd_sweep(&cfg, stdout),
        Command::Verify => cmd_verify(&cfg, stdout),
        Command::Figure => cmd_figure(&cfg, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_in(dir: &Path, args: &[&str]) -> (i32, String, String) {
        let mut all = vec!["qspeed".to_string()];
        all.extend(args.iter().map(|s| s.to_string()));
        all.push("--out".into());
        all.push(dir.display().to_string());
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(all, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn simulate_default_starts_at_one() {
        let dir = tempfile::tempdir().unwrap();
        let (code, out, _) = run_in(dir.path(), &["simulate", "--samples", "256"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("status = ok"));
        let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,re_c1,im_c1,pop,popdot,gamma_t,s_t");
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first[3], 1.0);
        assert!(csv.lines().any(|l| l.starts_with("# tau_qsl,")));
        assert!(fs::read_to_string(dir.path().join("metrics.txt")).unwrap().contains("n_blp = "));
    }

    #[test]
    fn simulate_zero_gamma_reports_zero_evolution() {
        let dir = tempfile::tempdir().unwrap();
        let (code, out, _) = run_in(dir.path(), &["simulate", "--set", "gamma=0", "--samples", "64"]);
        assert_eq!(code, EXIT_NUMERICAL);
        assert!(out.contains("status = zero_evolution"), "{out}");
    }

    #[test]
    fn config_errors_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "gamma = 10\nlambda = abc\n").unwrap();
        let (code, _, err) = run_in(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("line 2") && err.contains("lambda"), "{err}");
        let (code, _, err) = run_in(dir.path(), &["figure", "nonsense"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("9b"), "{err}");
        let (code, _, _) = run_in(dir.path(), &["simulate", "--set", "preset=9a"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn flags_override_file_and_echo_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# test\ngamma = 12\neta = minus\nsamples = 100\n").unwrap();
        let (code, out, _) =
            run_in(dir.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--set", "drive=3", "--eta", "plus", "--echo"]);
        assert_eq!(code, EXIT_OK);
        let back = RunConfig::parse(&out).unwrap();
        assert_eq!(back.eta, EtaConvention::Plus);
        assert_eq!(back.samples, 100);
        assert_eq!(back.params().gamma, 12.0);
        assert_eq!(back.params().drive, 3.0);
        assert_eq!(back.command, Some(Command::Simulate));
        assert_eq!(back.output_dir, dir.path());
    }

    #[test]
    fn custom_sweep_writes_csv_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let args = ["sweep", "--set", "axis=gamma", "--set", "axis_min=1", "--set", "axis_max=20", "--set", "axis_count=5", "--samples", "256"];
        let (code, out, err) = run_in(dir.path(), &args);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.contains("sweep sweep_gamma over gamma"));
        let csv = fs::read_to_string(dir.path().join("sweep_gamma.csv")).unwrap();
        assert!(csv.starts_with("overlay,gamma,tau_qsl,n_blp,pop_tau,identity_residual,status\n"));
        assert!(dir.path().join("sweep_gamma_summary.txt").exists());
    }
}
