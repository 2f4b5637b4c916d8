//! Cross-checks of every figure preset against independent computations:
//! closed and full kernels against quadrature, analytic amplitude against
//! the ODE oracle, and the speed-limit identity on every sweep row.

use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::dynamics::{amplitude_analytic, amplitude_oracle, uniform_grid, OracleMode};
use crate::error::Result;
use crate::kernel::{kernel_closed_form, kernel_full_form, kernel_quadrature, QuadratureOptions};
use crate::model::{derive_kernel_params, EtaConvention, PhysicalParams};
use crate::presets::{all_presets, Preset};
use crate::sweep::{run_sweep, sci, SweepTable};

/// Points per side of the (t, t₁) kernel grid; only t₁ ≤ t is used.
pub const KERNEL_GRID: usize = 20;
/// Relative difference below which the two η conventions count as equal.
pub const ETA_TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub t: f64,
    pub t1: f64,
    pub closed: Complex64,
    pub full: Complex64,
    pub quadrature: Complex64,
    /// |closed − quadrature| / max |quadrature| over the grid.
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelAgreement {
    pub params: PhysicalParams,
    pub convention: EtaConvention,
    pub samples: Vec<KernelSample>,
    /// Largest `rel_err`.
    pub closed_err: f64,
    /// Same measure for the full kernel.
    pub full_err: f64,
    /// Largest quadrature error estimate, relative to max |quadrature|.
    pub quadrature_err: f64,
}

/// (t, t₁) pairs with t₁ ≤ t on an n×n grid over [0, horizon]².
pub fn kernel_grid(horizon: f64, n: usize) -> Vec<(f64, f64)> {
    let at = |i: usize| horizon * i as f64 / (n - 1) as f64;
    (0..n).flat_map(|i| (0..=i).map(move |j| (at(i), at(j)))).collect()
}

/// Quadrature values on the kernel grid with their error estimates. They do
/// not depend on the η convention and can be shared between both.
pub fn quadrature_grid(p: &PhysicalParams, opts: &QuadratureOptions) -> Result<Vec<(f64, f64, Complex64, f64)>> {
    kernel_grid(p.horizon, KERNEL_GRID)
        .into_iter()
        .map(|(t, t1)| kernel_quadrature(t, t1, p, opts).map(|e| (t, t1, e.kernel.value, e.error)))
        .collect()
}

pub fn compare_kernels(p: &PhysicalParams, convention: EtaConvention, quad: &[(f64, f64, Complex64, f64)]) -> Result<KernelAgreement> {
    let kp = derive_kernel_params(p, convention)?;
    let scale = quad.iter().map(|q| q.2.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let samples: Vec<KernelSample> = quad
        .iter()
        .map(|&(t, t1, quadrature, _)| {
            let closed = kernel_closed_form(t, t1, &kp).value;
            let full = kernel_full_form(t, t1, &kp).value;
            KernelSample { t, t1, closed, full, quadrature, rel_err: (closed - quadrature).norm() / scale }
        })
        .collect();
    let closed_err = samples.iter().map(|s| s.rel_err).fold(0.0, f64::max);
    let full_err = samples.iter().map(|s| (s.full - s.quadrature).norm() / scale).fold(0.0, f64::max);
    let quadrature_err = quad.iter().map(|q| q.3).fold(0.0, f64::max) / scale;
    Ok(KernelAgreement { params: *p, convention, samples, closed_err, full_err, quadrature_err })
}

pub fn kernel_agreement(p: &PhysicalParams, convention: EtaConvention, opts: &QuadratureOptions) -> Result<KernelAgreement> {
    compare_kernels(p, convention, &quadrature_grid(p, opts)?)
}

/// Convention preferred by one parameter set, judged on the full kernel
/// since the closed form is only exact at rest. `None` when both agree
/// equally well (e.g. no drive, where η is real).
pub fn preferred_convention(minus: &KernelAgreement, plus: &KernelAgreement) -> Option<EtaConvention> {
    let (m, p) = (minus.full_err, plus.full_err);
    if (m - p).abs() <= ETA_TIE * m.max(p).max(f64::MIN_POSITIVE) {
        None
    } else if m < p {
        Some(EtaConvention::Minus)
    } else {
        Some(EtaConvention::Plus)
    }
}

/// Parameter sets checked for a preset: every overlay at the first, middle
/// and last axis value, without repeats.
pub fn representative_params(preset: &Preset) -> Vec<PhysicalParams> {
    let spec = &preset.spec;
    let v = &spec.values;
    let picks = [v[0], v[v.len() / 2], v[v.len() - 1]];
    let mut out: Vec<PhysicalParams> = Vec::new();
    for o in 0..spec.overlays().len() {
        for &x in &picks {
            let p = spec.params_at(o, x);
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// sup |C₁ analytic − C₁ oracle| over a uniform grid.
pub fn oracle_deviation(p: &PhysicalParams, convention: EtaConvention, samples: usize, mode: OracleMode) -> Result<f64> {
    let kp = derive_kernel_params(p, convention)?;
    let grid = uniform_grid(p.horizon, samples)?;
    let analytic = amplitude_analytic(&kp, &grid)?;
    let oracle = amplitude_oracle(&kp, &grid, mode)?;
    Ok(analytic.c1.iter().zip(&oracle.trace.c1).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// Largest |τ_qsl direct − τ_qsl via identity| / τ over the rows; failed
/// rows are skipped and counted.
pub fn identity_deviation(table: &SweepTable) -> (f64, usize, usize) {
    let mut worst: f64 = 0.0;
    let (mut ok, mut failed) = (0, 0);
    for row in &table.rows {
        match &row.outcome {
            Ok(m) => {
                worst = worst.max(m.identity_residual / m.tau);
                ok += 1;
            }
            Err(_) => failed += 1,
        }
    }
    (worst, ok, failed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl PropertyResult {
    fn at_most(name: String, measured: f64, threshold: f64, detail: String) -> Self {
        PropertyResult { name, measured, threshold, pass: measured <= threshold, detail }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub convention: EtaConvention,
    /// Convention favoured by the presets, when they agree.
    pub selected: Option<EtaConvention>,
    pub properties: Vec<PropertyResult>,
    /// Closed-form vs quadrature samples of every checked parameter set.
    pub kernel_samples: Vec<(String, KernelSample)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.properties.iter().filter(|p| !p.pass)
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "eta convention under test: {}", self.convention).unwrap();
        match self.selected {
            Some(c) => writeln!(s, "eta convention selected by quadrature: {c} (stable across presets)").unwrap(),
            None => writeln!(s, "eta convention selected by quadrature: none (presets disagree)").unwrap(),
        }
        for p in &self.properties {
            let verdict = if p.pass { "PASS" } else { "FAIL" };
            writeln!(s, "{verdict} {} measured {:.3e} threshold {:.3e} {}", p.name, p.measured, p.threshold, p.detail).unwrap();
        }
        let failed = self.failures().count();
        writeln!(s, "{} properties, {failed} failed", self.properties.len()).unwrap();
        s
    }

    pub fn write_kernel_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "case,t,t1,closed_re,closed_im,quadrature_re,quadrature_im,rel_err")?;
        for (case, k) in &self.kernel_samples {
            writeln!(
                out,
                "{case},{},{},{},{},{},{},{}",
                sci(k.t),
                sci(k.t1),
                sci(k.closed.re),
                sci(k.closed.im),
                sci(k.quadrature.re),
                sci(k.quadrature.im),
                sci(k.rel_err)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub convention: EtaConvention,
    pub tolerances: Tolerances,
    /// Oracle grid points.
    pub samples: usize,
    pub quadrature: QuadratureOptions,
    /// Also run the identity check over the full preset sweeps.
    pub sweeps: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            convention: EtaConvention::Minus,
            tolerances: Tolerances::default(),
            samples: 4096,
            quadrature: QuadratureOptions::default(),
            sweeps: true,
        }
    }
}

/// Kernel, η, oracle and identity checks over `presets`.
pub fn verify_presets(presets: &[Preset], opts: &VerifyOptions) -> Result<VerifyReport> {
    let tol = opts.tolerances;
    let mut properties = Vec::new();
    let mut kernel_samples = Vec::new();
    let mut votes: Vec<EtaConvention> = Vec::new();
    for preset in presets {
        let mut closed: f64 = 0.0;
        let mut full: f64 = 0.0;
        let mut quad: f64 = 0.0;
        let mut oracle: f64 = 0.0;
        for (i, p) in representative_params(preset).iter().enumerate() {
            let q = quadrature_grid(p, &opts.quadrature)?;
            let under_test = compare_kernels(p, opts.convention, &q)?;
            let other = compare_kernels(p, opts.convention.flipped(), &q)?;
            let (minus, plus) = match opts.convention {
                EtaConvention::Minus => (&under_test, &other),
                EtaConvention::Plus => (&other, &under_test),
            };
            if let Some(c) = preferred_convention(minus, plus) {
                votes.push(c);
            }
            closed = closed.max(under_test.closed_err);
            full = full.max(under_test.full_err);
            quad = quad.max(under_test.quadrature_err);
            let case = format!("{}#{i}", preset.name);
            kernel_samples.extend(under_test.samples.into_iter().map(|s| (case.clone(), s)));
            oracle = oracle.max(oracle_deviation(p, opts.convention, opts.samples, OracleMode::ClosedKernel)?);
        }
        let quad_note = format!("(quadrature error estimate {quad:.1e})");
        properties.push(PropertyResult::at_most(format!("kernel_closed_vs_quadrature[{}]", preset.name), closed, tol.kernel, quad_note.clone()));
        properties.push(PropertyResult::at_most(format!("kernel_full_vs_quadrature[{}]", preset.name), full, tol.kernel, quad_note));
        properties.push(PropertyResult::at_most(
            format!("analytic_vs_oracle[{}]", preset.name),
            oracle,
            tol.oracle,
            format!("({} points, closed-kernel ODE)", opts.samples),
        ));
        if opts.sweeps {
            let mut spec = preset.spec.clone();
            spec.convention = opts.convention;
            let table = run_sweep(&spec)?;
            let (worst, ok, failed) = identity_deviation(&table);
            properties.push(PropertyResult::at_most(
                format!("qslt_identity[{}]", preset.name),
                worst,
                tol.identity,
                format!("({ok} rows, {failed} failed)"),
            ));
        }
    }
    let selected = match votes.first() {
        None => Some(EtaConvention::Minus),
        Some(&first) if votes.iter().all(|&v| v == first) => Some(first),
        Some(_) => None,
    };
    let stable = selected.is_some();
    properties.push(PropertyResult {
        name: "eta_selection_stable".into(),
        measured: votes.iter().filter(|&&v| Some(v) != selected).count() as f64,
        threshold: 0.0,
        pass: stable,
        detail: format!(
            "({} minus, {} plus, remaining sets tie)",
            votes.iter().filter(|&&v| v == EtaConvention::Minus).count(),
            votes.iter().filter(|&&v| v == EtaConvention::Plus).count()
        ),
    });
    properties.push(PropertyResult {
        name: "eta_under_test_is_selected".into(),
        measured: if selected == Some(opts.convention) { 0.0 } else { 1.0 },
        threshold: 0.0,
        pass: selected == Some(opts.convention),
        detail: format!("(under test {})", opts.convention),
    });
    Ok(VerifyReport { convention: opts.convention, selected, properties, kernel_samples })
}

pub fn verify_all(opts: &VerifyOptions) -> Result<VerifyReport> {
    verify_presets(&all_presets(), opts)
}
