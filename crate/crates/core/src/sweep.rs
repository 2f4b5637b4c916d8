//! Parameter sweeps of τ_qsl and N, critical-point detection and the
//! velocity-compensation scan.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dynamics::{amplitude_analytic_refined, amplitude_oracle, uniform_grid, AmplitudeTrace, OracleMode};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::model::{derive_kernel_params, EtaConvention, ParamKey, PhysicalParams};

/// Plateau: |τ_qsl − τ| < PLATEAU_TAU·τ and N < PLATEAU_N.
pub const PLATEAU_TAU: f64 = 1e-6;
pub const PLATEAU_N: f64 = 1e-9;
/// Departure of every selected metric: N > DEPARTED, τ − τ_qsl > DEPARTED·τ.
pub const DEPARTED: f64 = 1e-4;
/// Relative axis resolution of the refined critical point.
pub const CRITICAL_RESOLUTION: f64 = 1e-3;
/// New points per interval when densifying around a critical point.
pub const DENSIFY_FACTOR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    TauQsl,
    NBlp,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::TauQsl => "tau_qsl",
            MetricKind::NBlp => "n_blp",
        }
    }

    pub fn of(self, m: &MetricsReport) -> f64 {
        match self {
            MetricKind::TauQsl => m.tau_qsl,
            MetricKind::NBlp => m.n_blp,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tau_qsl" => Ok(MetricKind::TauQsl),
            "n_blp" => Ok(MetricKind::NBlp),
            other => Err(format!("unknown metric `{other}` (expected tau_qsl or n_blp)")),
        }
    }
}

/// Parameter values applied on top of the base before the axis value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Overlay {
    pub settings: Vec<(ParamKey, f64)>,
}

impl Overlay {
    pub fn new(settings: &[(ParamKey, f64)]) -> Self {
        Overlay { settings: settings.to_vec() }
    }

    pub fn apply(&self, base: &PhysicalParams) -> PhysicalParams {
        self.settings.iter().fold(*base, |p, &(k, v)| p.with(k, v))
    }

    pub fn label(&self) -> String {
        if self.settings.is_empty() {
            return "base".into();
        }
        let parts: Vec<String> = self.settings.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
        parts.join(",")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub base: PhysicalParams,
    pub axis: ParamKey,
    pub values: Vec<f64>,
    /// Empty means a single overlay that changes nothing.
    pub overlays: Vec<Overlay>,
    pub outputs: Vec<MetricKind>,
    pub convention: EtaConvention,
    /// Initial samples of each amplitude trace.
    pub samples: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidGrid("sweep axis has no values".into()));
        }
        if self.values.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidGrid("sweep axis values must be strictly increasing".into()));
        }
        if self.samples < 2 {
            return Err(Error::InvalidGrid("need at least two samples per trace".into()));
        }
        for o in self.overlays() {
            for &v in &self.values {
                o.apply(&self.base).with(self.axis, v).validate()?;
            }
        }
        Ok(())
    }

    pub fn overlays(&self) -> Vec<Overlay> {
        if self.overlays.is_empty() {
            vec![Overlay::default()]
        } else {
            self.overlays.clone()
        }
    }

    /// Parameters overridden by any overlay, in canonical order.
    pub fn overlay_keys(&self) -> Vec<ParamKey> {
        let mut keys: Vec<ParamKey> = self.overlays.iter().flat_map(|o| o.settings.iter().map(|s| s.0)).collect();
        keys.sort();
        keys.dedup();
        keys
    }

    pub fn params_at(&self, overlay: usize, value: f64) -> PhysicalParams {
        self.overlays()[overlay].apply(&self.base).with(self.axis, value)
    }
}

/// How the amplitude behind a row was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSource {
    Analytic,
    /// Degenerate cubic roots; the time-integration oracle was used.
    OracleFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub overlay: usize,
    pub axis_value: f64,
    pub params: PhysicalParams,
    pub source: TraceSource,
    pub outcome: Result<MetricsReport>,
}

impl SweepRow {
    pub fn status(&self) -> &'static str {
        match (&self.outcome, self.source) {
            (Ok(_), TraceSource::Analytic) => "ok",
            (Ok(_), TraceSource::OracleFallback) => "oracle_fallback",
            (Err(e), _) => e.kind(),
        }
    }

    pub fn is_plateau(&self) -> bool {
        match &self.outcome {
            Ok(m) => (m.tau_qsl - m.tau).abs() < PLATEAU_TAU * m.tau && m.n_blp < PLATEAU_N,
            Err(_) => false,
        }
    }

    pub fn is_departed(&self, outputs: &[MetricKind]) -> bool {
        let Ok(m) = &self.outcome else { return false };
        !outputs.is_empty()
            && outputs.iter().all(|k| match k {
                MetricKind::TauQsl => m.tau - m.tau_qsl > DEPARTED * m.tau,
                MetricKind::NBlp => m.n_blp > DEPARTED,
            })
    }
}

/// Analytic trace of one parameter set, falling back to the closed-kernel
/// oracle on degenerate roots.
pub fn amplitude_trace(p: &PhysicalParams, convention: EtaConvention, samples: usize) -> Result<(TraceSource, AmplitudeTrace)> {
    let kp = derive_kernel_params(p, convention)?;
    match amplitude_analytic_refined(&kp, p.horizon, samples) {
        Ok(trace) => Ok((TraceSource::Analytic, trace)),
        Err(Error::DegenerateRoots { .. }) => {
            let grid = uniform_grid(p.horizon, samples)?;
            Ok((TraceSource::OracleFallback, amplitude_oracle(&kp, &grid, OracleMode::ClosedKernel)?.trace))
        }
        Err(e) => Err(e),
    }
}

/// Metrics of one parameter set, see [`amplitude_trace`].
pub fn evaluate(p: &PhysicalParams, convention: EtaConvention, samples: usize) -> (TraceSource, Result<MetricsReport>) {
    match amplitude_trace(p, convention, samples) {
        Ok((source, trace)) => (source, MetricsReport::compute(&trace)),
        Err(e) => (TraceSource::Analytic, Err(e)),
    }
}

fn evaluate_row(spec: &SweepSpec, overlay: usize, value: f64) -> SweepRow {
    let params = spec.params_at(overlay, value);
    let (source, outcome) = evaluate(&params, spec.convention, spec.samples);
    SweepRow { overlay, axis_value: value, params, source, outcome }
}

fn evaluate_all(spec: &SweepSpec, tasks: &[(usize, f64)]) -> Vec<SweepRow> {
    tasks.par_iter().map(|&(o, v)| evaluate_row(spec, o, v)).collect()
}

/// Rows ordered by overlay, then axis value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn overlay_rows(&self, overlay: usize) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.overlay == overlay)
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let tasks: Vec<(usize, f64)> = (0..spec.overlays().len())
        .flat_map(|o| spec.values.iter().map(move |&v| (o, v)))
        .collect();
    Ok(SweepTable { rows: evaluate_all(spec, &tasks) })
}

/// Departure of the metric from its Markovian plateau along the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub overlay: usize,
    /// Last sampled plateau value before the departure.
    pub low: f64,
    /// First sampled value where every selected metric has departed by
    /// more than [`DEPARTED`].
    pub high: f64,
    /// Plateau edge bisected to [`CRITICAL_RESOLUTION`] relative.
    pub refined: f64,
}

/// Brackets the departure from the plateau in one overlay's rows and
/// bisects the plateau predicate between the last plateau sample and the
/// next sample.
pub fn find_critical(spec: &SweepSpec, table: &SweepTable, overlay: usize) -> Result<CriticalPoint> {
    let rows: Vec<&SweepRow> = table.overlay_rows(overlay).filter(|r| r.outcome.is_ok()).collect();
    match rows.first() {
        Some(r) if r.is_plateau() => {}
        _ => return Err(Error::NoPlateau),
    }
    let hi_idx = rows.iter().position(|r| r.is_departed(&spec.outputs)).ok_or(Error::NoTransition)?;
    let lo_idx = rows[..hi_idx].iter().rposition(|r| r.is_plateau()).ok_or(Error::NoPlateau)?;
    let (low, high) = (rows[lo_idx].axis_value, rows[hi_idx].axis_value);
    let mut a = low;
    let mut b = rows[lo_idx + 1].axis_value;
    while b - a > CRITICAL_RESOLUTION * b.abs() {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if evaluate_row(spec, overlay, mid).is_plateau() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(CriticalPoint { overlay, low, high, refined: 0.5 * (a + b) })
}

pub fn critical_points(spec: &SweepSpec, table: &SweepTable) -> Vec<Result<CriticalPoint>> {
    (0..spec.overlays().len()).map(|o| find_critical(spec, table, o)).collect()
}

/// Adds [`DENSIFY_FACTOR`]−1 points inside each sample interval from one
/// below the plateau edge to one past the departure, for every overlay with
/// a detected critical point.
pub fn densify(spec: &SweepSpec, table: &SweepTable) -> SweepTable {
    let mut tasks = Vec::new();
    for (o, cp) in critical_points(spec, table).into_iter().enumerate() {
        let Ok(cp) = cp else { continue };
        let values: Vec<f64> = table.overlay_rows(o).map(|r| r.axis_value).collect();
        let lo = values.iter().position(|&v| v == cp.low).unwrap_or(0).saturating_sub(1);
        let hi = (values.iter().position(|&v| v == cp.high).unwrap_or(0) + 1).min(values.len() - 1);
        for w in values[lo..=hi].windows(2) {
            for k in 1..DENSIFY_FACTOR {
                tasks.push((o, w[0] + (w[1] - w[0]) * k as f64 / DENSIFY_FACTOR as f64));
            }
        }
    }
    let mut rows = table.rows.clone();
    rows.extend(evaluate_all(spec, &tasks));
    rows.sort_by(|a, b| a.overlay.cmp(&b.overlay).then(a.axis_value.total_cmp(&b.axis_value)));
    rows.dedup_by(|a, b| a.overlay == b.overlay && a.axis_value == b.axis_value);
    SweepTable { rows }
}

/// Outcome of [`compensation_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct Compensation {
    pub omega_star: f64,
    /// Mean |τ_qsl(β, Ω*, γ) − τ_qsl(0, 0, γ)| over the γ grid.
    pub residual: f64,
    /// The same mean at Ω = 0.
    pub residual_at_zero: f64,
    /// (Ω, residual) for every grid value.
    pub scan: Vec<(f64, f64)>,
}

/// Finds the drive that makes the τ_qsl(γ) curve of a moving qubit closest
/// to that of a static, undriven one. The claim being probed is closeness,
/// not equality, so a non-zero residual is expected.
pub fn compensation_scan(
    base: &PhysicalParams,
    beta_target: f64,
    omega_grid: &[f64],
    gamma_grid: &[f64],
    convention: EtaConvention,
    samples: usize,
) -> Result<Compensation> {
    if omega_grid.is_empty() || gamma_grid.is_empty() {
        return Err(Error::InvalidGrid("compensation grids must be non-empty".into()));
    }
    let tau_qsl = |beta: f64, drive: f64, gamma: f64| {
        let p = PhysicalParams { beta, drive, gamma, ..*base };
        evaluate(&p, convention, samples).1.ok().map(|m| m.tau_qsl)
    };
    let reference: Vec<Option<f64>> = gamma_grid.par_iter().map(|&g| tau_qsl(0.0, 0.0, g)).collect();
    let mismatch = |drive: f64| -> f64 {
        let values: Vec<Option<f64>> = gamma_grid.par_iter().map(|&g| tau_qsl(beta_target, drive, g)).collect();
        let (sum, n) = values
            .iter()
            .zip(&reference)
            .filter_map(|(v, r)| Some((v.as_ref()? - r.as_ref()?).abs()))
            .fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
        if n == 0 {
            f64::NAN
        } else {
            sum / n as f64
        }
    };
    let scan: Vec<(f64, f64)> = omega_grid.iter().map(|&w| (w, mismatch(w))).collect();
    let &(omega_star, residual) = scan
        .iter()
        .filter(|s| !s.1.is_nan())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::ZeroEvolution)?;
    let residual_at_zero = scan.iter().find(|s| s.0 == 0.0).map_or_else(|| mismatch(0.0), |s| s.1);
    Ok(Compensation { omega_star, residual, residual_at_zero, scan })
}

/// Fixed-width scientific formatting used by every CSV.
pub fn sci(x: f64) -> String {
    format!("{x:.14e}")
}

pub fn write_csv<W: Write>(spec: &SweepSpec, table: &SweepTable, mut out: W) -> std::io::Result<()> {
    let keys = spec.overlay_keys();
    let overlays = spec.overlays();
    let mut line = String::from("overlay");
    for k in &keys {
        write!(line, ",{k}").unwrap();
    }
    write!(line, ",{}", spec.axis).unwrap();
    for m in &spec.outputs {
        write!(line, ",{m}").unwrap();
    }
    line.push_str(",pop_tau,identity_residual,status\n");
    out.write_all(line.as_bytes())?;
    for row in &table.rows {
        line.clear();
        write!(line, "{}", row.overlay).unwrap();
        let applied = overlays[row.overlay].apply(&spec.base);
        for &k in &keys {
            write!(line, ",{}", sci(applied.get(k))).unwrap();
        }
        write!(line, ",{}", sci(row.axis_value)).unwrap();
        let m = row.outcome.as_ref().ok();
        for kind in &spec.outputs {
            write!(line, ",{}", sci(m.map_or(f64::NAN, |m| kind.of(m)))).unwrap();
        }
        writeln!(
            line,
            ",{},{},{}",
            sci(m.map_or(f64::NAN, |m| m.pop_tau)),
            sci(m.map_or(f64::NAN, |m| m.identity_residual)),
            row.status()
        )
        .unwrap();
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn summary(spec: &SweepSpec, table: &SweepTable, critical: &[Result<CriticalPoint>]) -> String {
    let mut s = String::new();
    writeln!(s, "sweep {} over {} ({} rows, eta {})", spec.name, spec.axis, table.rows.len(), spec.convention).unwrap();
    for (o, overlay) in spec.overlays().iter().enumerate() {
        let rows: Vec<&SweepRow> = table.overlay_rows(o).collect();
        let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
        let fallback = rows.iter().filter(|r| r.source == TraceSource::OracleFallback).count();
        let worst = rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok())
            .map(|m| m.identity_residual)
            .fold(0.0, f64::max);
        write!(s, "overlay {o} [{}]: ", overlay.label()).unwrap();
        match &critical[o] {
            Ok(cp) => write!(
                s,
                "critical {} = {} (bracket {} .. {})",
                spec.axis,
                sci(cp.refined),
                sci(cp.low),
                sci(cp.high)
            )
            .unwrap(),
            Err(e) => write!(s, "{e}").unwrap(),
        }
        writeln!(s, "; rows {}, failed {failed}, oracle fallback {fallback}, max identity residual {}", rows.len(), sci(worst))
            .unwrap();
    }
    s
}
