//! Named sweeps of τ_qsl and N, one per reference figure.
//!
//! Fixed values: ω₀ = 5.1×10⁹, γ = 10, τ = 1, λ ∈ {3γ, 0.01γ, 10, 9},
//! β ∈ {0, 1×10⁻¹⁰, 2×10⁻¹⁰}, Ω ∈ {0, 5}. Axis ranges, and the λ sets of the
//! figures that only name a coupling regime, are not given numerically and
//! are estimates; the config can override them.

use std::fmt::Write as _;

use crate::dynamics::trace::DEFAULT_SAMPLES;
use crate::error::{Error, Result};
use crate::model::{EtaConvention, ParamKey, PhysicalParams};
use crate::sweep::{MetricKind, Overlay, SweepSpec};

pub const PRESET_NAMES: [&str; 15] = [
    "3a", "3b", "4a", "4b", "5a", "5b", "5c", "6a", "6b", "7a", "7b", "8a", "8b", "9a", "9b",
];

/// Points per axis.
pub const AXIS_POINTS: usize = 200;
pub const WEAK_DRIVE_MAX: f64 = 100.0;
pub const STRONG_DRIVE_MAX: f64 = 20.0;
pub const GAMMA_MAX: f64 = 25.0;
pub const BETAS: [f64; 3] = [0.0, 1e-10, 2e-10];

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub title: &'static str,
    /// Caveats about the transcription, empty when there are none.
    pub note: &'static str,
    pub spec: SweepSpec,
}

/// Ω from 0 to `max`, both included.
pub fn drive_axis(max: f64, points: usize) -> Vec<f64> {
    let n = points - 1;
    (0..=n).map(|i| max * i as f64 / n as f64).collect()
}

/// γ from max/points to max; γ = 0 is excluded since it freezes the
/// dynamics.
pub fn gamma_axis(max: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|i| max * i as f64 / points as f64).collect()
}

fn base() -> PhysicalParams {
    PhysicalParams { gamma: 10.0, horizon: 1.0, ..Default::default() }
}

fn overlays(key: ParamKey, values: &[f64]) -> Vec<Overlay> {
    values.iter().map(|&v| Overlay::new(&[(key, v)])).collect()
}

fn spec(name: &str, base: PhysicalParams, axis: ParamKey, values: Vec<f64>, overlays: Vec<Overlay>, outputs: &[MetricKind]) -> SweepSpec {
    SweepSpec {
        name: name.to_string(),
        base,
        axis,
        values,
        overlays,
        outputs: outputs.to_vec(),
        convention: EtaConvention::Minus,
        samples: DEFAULT_SAMPLES,
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    use MetricKind::{NBlp, TauQsl};
    use ParamKey::{Beta, Drive, Gamma, Lambda};
    let b = base();
    let weak = drive_axis(WEAK_DRIVE_MAX, AXIS_POINTS);
    let strong = drive_axis(STRONG_DRIVE_MAX, AXIS_POINTS);
    let gammas = gamma_axis(GAMMA_MAX, AXIS_POINTS);
    let with_lambda = |lambda: f64| PhysicalParams { lambda, ..b };
    let (title, note, s) = match name {
        "3a" => ("tau_qsl vs drive, weak coupling", "lambda set {3g, 4g} and drive range are estimates",
            spec(name, b, Drive, weak, overlays(Lambda, &[30.0, 40.0]), &[TauQsl])),
        "3b" => ("tau_qsl vs drive, strong coupling", "lambda set {0.01g, 0.1g} and drive range are estimates",
            spec(name, b, Drive, strong, overlays(Lambda, &[0.1, 1.0]), &[TauQsl])),
        "4a" => ("tau_qsl vs drive, weak coupling, moving qubit", "drive range is an estimate",
            spec(name, with_lambda(30.0), Drive, weak, overlays(Beta, &BETAS), &[TauQsl])),
        "4b" => ("tau_qsl vs drive, strong coupling, moving qubit", "drive range is an estimate",
            spec(name, with_lambda(0.1), Drive, strong, overlays(Beta, &BETAS), &[TauQsl])),
        "5a" => ("tau_qsl vs gamma, no drive", "gamma range is an estimate",
            spec(name, with_lambda(10.0), Gamma, gammas, overlays(Beta, &BETAS), &[TauQsl])),
        "5b" => ("tau_qsl vs gamma, drive 5", "gamma range is an estimate",
            spec(name, PhysicalParams { drive: 5.0, ..with_lambda(10.0) }, Gamma, gammas, overlays(Beta, &BETAS), &[TauQsl])),
        "5c" => ("tau_qsl vs gamma, drive and velocity combinations", "gamma range is an estimate",
            spec(name, with_lambda(10.0), Gamma, gammas,
                [(0.0, 0.0), (2e-10, 0.0), (0.0, 5.0), (2e-10, 5.0)]
                    .iter()
                    .map(|&(beta, drive)| Overlay::new(&[(Beta, beta), (Drive, drive)]))
                    .collect(),
                &[TauQsl])),
        "6a" => ("N vs drive, weak coupling", "lambda set {3g, 4g} and drive range are estimates",
            spec(name, b, Drive, drive_axis(WEAK_DRIVE_MAX, AXIS_POINTS), overlays(Lambda, &[30.0, 40.0]), &[NBlp])),
        "6b" => ("N vs drive, strong coupling", "lambda set {0.01g, 0.1g} and drive range are estimates",
            spec(name, b, Drive, drive_axis(STRONG_DRIVE_MAX, AXIS_POINTS), overlays(Lambda, &[0.1, 1.0]), &[NBlp])),
        "7a" | "7b" => {
            // These two figures state omega0 = 5.1e10, ten times every
            // other one. Kept as stated; omegaL follows to stay on resonance.
            let drive = if name == "7a" { 0.0 } else { 5.0 };
            let p = PhysicalParams { omega0: 5.1e10, omega_l: 5.1e10, lambda: 9.0, drive, ..b };
            let title = if name == "7a" { "N vs gamma, no drive" } else { "N vs gamma, drive 5" };
            let s = spec(name, p, Gamma, gamma_axis(GAMMA_MAX, AXIS_POINTS), overlays(Beta, &BETAS), &[NBlp]);
            (title, "omega0 = 5.1e10 as stated for this figure, unlike the 5.1e9 of all others; gamma range is an estimate", s)
        }
        "8a" => ("tau_qsl and N vs drive, weak coupling", "drive range is an estimate",
            spec(name, with_lambda(30.0), Drive, drive_axis(WEAK_DRIVE_MAX, AXIS_POINTS), vec![], &[TauQsl, NBlp])),
        "8b" => ("tau_qsl and N vs drive, strong coupling", "drive range is an estimate",
            spec(name, with_lambda(0.1), Drive, drive_axis(STRONG_DRIVE_MAX, AXIS_POINTS), vec![], &[TauQsl, NBlp])),
        "9a" => ("tau_qsl and N vs gamma, no drive", "gamma range is an estimate",
            spec(name, with_lambda(10.0), Gamma, gamma_axis(GAMMA_MAX, AXIS_POINTS), vec![], &[TauQsl, NBlp])),
        "9b" => ("tau_qsl and N vs gamma, drive 5", "gamma range is an estimate",
            spec(name, PhysicalParams { drive: 5.0, ..with_lambda(10.0) }, Gamma, gamma_axis(GAMMA_MAX, AXIS_POINTS), vec![], &[TauQsl, NBlp])),
        _ => {
            return Err(Error::UnknownPreset { name: name.to_string(), available: PRESET_NAMES.to_vec() });
        }
    };
    let name = PRESET_NAMES.iter().copied().find(|n| *n == name).expect("matched above");
    Ok(Preset { name, title, note, spec: s })
}

pub fn all_presets() -> Vec<Preset> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("built-in preset")).collect()
}

/// gnuplot script plotting every selected metric of `csv` against the axis,
/// one curve per overlay.
pub fn gnuplot_script(spec: &SweepSpec, title: &str, csv: &str) -> String {
    let keys = spec.overlay_keys();
    let axis_col = 2 + keys.len();
    let overlays = spec.overlays();
    let mut s = String::new();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set key autotitle columnhead").unwrap();
    writeln!(s, "set title '{title}'").unwrap();
    writeln!(s, "set xlabel '{}'", spec.axis).unwrap();
    writeln!(s, "set terminal pngcairo size 900,600").unwrap();
    for (i, metric) in spec.outputs.iter().enumerate() {
        let col = axis_col + 1 + i;
        writeln!(s, "set output '{}_{}.png'", spec.name, metric).unwrap();
        writeln!(s, "set ylabel '{metric}'").unwrap();
        let curves: Vec<String> = overlays
            .iter()
            .enumerate()
            .map(|(o, overlay)| {
                format!("'{csv}' using ($1=={o} ? ${axis_col} : 1/0):{col} with lines title '{}'", overlay.label())
            })
            .collect();
        writeln!(s, "plot {}", curves.join(", \\\n     ")).unwrap();
    }
    s
}
