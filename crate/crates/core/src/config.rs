//! Flat `key = value` run configuration with `#` comments.
//!
//! Physical keys are omega0, omegaL, drive, gamma, lambda, beta, tau0 and
//! horizon. An omegaL that is not given follows omega0. The remaining keys
//! select the command, output, tolerances and sweep layout.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dynamics::trace::{DEFAULT_SAMPLES, MAX_SAMPLES};
use crate::error::{Error, Result};
use crate::model::{EtaConvention, ParamKey, PhysicalParams};
use crate::presets::{preset, Preset};
use crate::sweep::{MetricKind, Overlay, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    Verify,
    Figure,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Figure => "figure",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [Command::Simulate, Command::Sweep, Command::Verify, Command::Figure]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// Pass thresholds used by `verify`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Closed-form kernel vs quadrature, relative.
    pub kernel: f64,
    /// Analytic vs oracle amplitude, sup-norm.
    pub oracle: f64,
    /// Speed-limit identity residual, relative to τ.
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { kernel: 1e-3, oracle: 1e-6, identity: 1e-8 }
    }
}

/// Axis overrides; anything left unset comes from the preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AxisConfig {
    pub key: Option<ParamKey>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    /// Physical parameters set explicitly, applied over the preset or the
    /// defaults.
    pub overrides: BTreeMap<ParamKey, f64>,
    pub preset: Option<String>,
    pub output_dir: PathBuf,
    pub tolerances: Tolerances,
    pub eta: EtaConvention,
    pub samples: usize,
    pub axis: AxisConfig,
    pub overlays: Vec<Overlay>,
    pub outputs: Option<Vec<MetricKind>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            overrides: BTreeMap::new(),
            preset: None,
            output_dir: PathBuf::from("out"),
            tolerances: Tolerances::default(),
            eta: EtaConvention::Minus,
            samples: DEFAULT_SAMPLES,
            axis: AxisConfig::default(),
            overlays: Vec::new(),
            outputs: None,
        }
    }
}

fn config_error(line: Option<usize>, key: &str, message: impl Into<String>) -> Error {
    Error::Config { line, key: key.to_string(), message: message.into() }
}

fn number<T: FromStr>(line: Option<usize>, key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| config_error(line, key, format!("cannot parse `{value}`: {e}")))
}

fn positive(line: Option<usize>, key: &str, value: &str) -> Result<f64> {
    let x: f64 = number(line, key, value)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(config_error(line, key, format!("must be positive and finite, got {value}")));
    }
    Ok(x)
}

/// Parses `beta:1e-10,drive:5`.
fn parse_overlay(line: Option<usize>, value: &str) -> Result<Overlay> {
    let mut settings = Vec::new();
    for item in value.split(',') {
        let (k, v) = item
            .split_once(':')
            .ok_or_else(|| config_error(line, "overlay", format!("expected key:value, got `{}`", item.trim())))?;
        let key: ParamKey = k.trim().parse().map_err(|e: String| config_error(line, "overlay", e))?;
        settings.push((key, number(line, "overlay", v.trim())?));
    }
    Ok(Overlay::new(&settings))
}

fn parse_outputs(line: Option<usize>, value: &str) -> Result<Vec<MetricKind>> {
    value
        .split(',')
        .map(|m| m.trim().parse().map_err(|e: String| config_error(line, "outputs", e)))
        .collect()
}

impl RunConfig {
    /// Sets one key. `line` is only used in error messages.
    pub fn set(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<()> {
        let value = value.trim();
        if value.is_empty() {
            return Err(config_error(line, key, "missing value"));
        }
        if let Ok(param) = key.parse::<ParamKey>() {
            let x: f64 = number(line, key, value)?;
            if !x.is_finite() {
                return Err(config_error(line, key, format!("must be finite, got {value}")));
            }
            self.overrides.insert(param, x);
            return Ok(());
        }
        match key {
            "command" => self.command = Some(value.parse().map_err(|e: String| config_error(line, key, e))?),
            "preset" => {
                preset(value).map_err(|e| config_error(line, key, e.to_string()))?;
                self.preset = Some(value.to_string());
            }
            "out" => self.output_dir = PathBuf::from(value),
            "eta" => self.eta = value.parse().map_err(|e: String| config_error(line, key, e))?,
            "samples" => {
                let n: usize = number(line, key, value)?;
                if !(2..=MAX_SAMPLES).contains(&n) {
                    return Err(config_error(line, key, format!("must lie in [2, {MAX_SAMPLES}], got {n}")));
                }
                self.samples = n;
            }
            "kernel_tol" => self.tolerances.kernel = positive(line, key, value)?,
            "oracle_tol" => self.tolerances.oracle = positive(line, key, value)?,
            "identity_tol" => self.tolerances.identity = positive(line, key, value)?,
            "axis" => self.axis.key = Some(value.parse().map_err(|e: String| config_error(line, key, e))?),
            "axis_min" => self.axis.min = Some(number(line, key, value)?),
            "axis_max" => self.axis.max = Some(number(line, key, value)?),
            "axis_count" => {
                let n: usize = number(line, key, value)?;
                if n == 0 {
                    return Err(config_error(line, key, "must be at least 1"));
                }
                self.axis.count = Some(n);
            }
            "overlay" => self.overlays.push(parse_overlay(line, value)?),
            "outputs" => self.outputs = Some(parse_outputs(line, value)?),
            _ => return Err(config_error(line, key, "unknown key")),
        }
        Ok(())
    }

    /// Applies the lines of a config file on top of `self`. Keys other than
    /// `overlay` may appear once.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = Some(i + 1);
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_error(line, content, "expected key = value"))?;
            let key = key.trim();
            if key != "overlay" {
                if seen.contains(&key) {
                    return Err(config_error(line, key, "given more than once"));
                }
                seen.push(key);
            }
            self.set(key, value, line)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.merge_text(&text)
    }

    /// Config text that parses back to `self`.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        if let Some(c) = self.command {
            writeln!(s, "command = {c}").unwrap();
        }
        if let Some(p) = &self.preset {
            writeln!(s, "preset = {p}").unwrap();
        }
        for (k, v) in &self.overrides {
            writeln!(s, "{k} = {v:e}").unwrap();
        }
        writeln!(s, "out = {}", self.output_dir.display()).unwrap();
        writeln!(s, "eta = {}", self.eta).unwrap();
        writeln!(s, "samples = {}", self.samples).unwrap();
        writeln!(s, "kernel_tol = {:e}", self.tolerances.kernel).unwrap();
        writeln!(s, "oracle_tol = {:e}", self.tolerances.oracle).unwrap();
        writeln!(s, "identity_tol = {:e}", self.tolerances.identity).unwrap();
        if let Some(k) = self.axis.key {
            writeln!(s, "axis = {k}").unwrap();
        }
        if let Some(x) = self.axis.min {
            writeln!(s, "axis_min = {x:e}").unwrap();
        }
        if let Some(x) = self.axis.max {
            writeln!(s, "axis_max = {x:e}").unwrap();
        }
        if let Some(n) = self.axis.count {
            writeln!(s, "axis_count = {n}").unwrap();
        }
        for o in &self.overlays {
            let items: Vec<String> = o.settings.iter().map(|(k, v)| format!("{k}:{v:e}")).collect();
            writeln!(s, "overlay = {}", items.join(",")).unwrap();
        }
        if let Some(outputs) = &self.outputs {
            let names: Vec<&str> = outputs.iter().map(|m| m.name()).collect();
            writeln!(s, "outputs = {}", names.join(",")).unwrap();
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.preset.is_some() && !matches!(self.command, Some(Command::Sweep | Command::Figure) | None) {
            return Err(config_error(None, "preset", format!("only valid with sweep or figure, not {}", self.command.unwrap())));
        }
        let t = self.tolerances;
        for (name, x) in [("kernel_tol", t.kernel), ("oracle_tol", t.oracle), ("identity_tol", t.identity)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(config_error(None, name, "must be positive and finite"));
            }
        }
        self.params_over(PhysicalParams::default()).validate()
    }

    /// `base` with the explicit overrides applied. omegaL follows omega0
    /// unless it is set itself.
    pub fn params_over(&self, base: PhysicalParams) -> PhysicalParams {
        let mut p = base;
        for (&k, &v) in &self.overrides {
            p.set(k, v);
        }
        if !self.overrides.contains_key(&ParamKey::OmegaL) {
            if let Some(&w) = self.overrides.get(&ParamKey::Omega0) {
                p.omega_l = w;
            }
        }
        p
    }

    pub fn params(&self) -> PhysicalParams {
        self.params_over(PhysicalParams::default())
    }

    pub fn preset(&self) -> Result<Option<Preset>> {
        self.preset.as_deref().map(preset).transpose()
    }

    /// The sweep described by the preset (if any) and the overrides.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let mut spec = match self.preset()? {
            Some(p) => p.spec,
            None => {
                let key = self.axis.key.ok_or_else(|| config_error(None, "axis", "required without a preset"))?;
                SweepSpec {
                    name: format!("sweep_{key}"),
                    base: PhysicalParams::default(),
                    axis: key,
                    values: Vec::new(),
                    overlays: Vec::new(),
                    outputs: vec![MetricKind::TauQsl, MetricKind::NBlp],
                    convention: self.eta,
                    samples: self.samples,
                }
            }
        };
        spec.base = self.params_over(spec.base);
        if let Some(key) = self.axis.key {
            if key != spec.axis {
                spec.axis = key;
                spec.values.clear();
            }
        }
        let a = &self.axis;
        if a.min.is_some() || a.max.is_some() || a.count.is_some() || spec.values.is_empty() {
            let first = spec.values.first().copied();
            let last = spec.values.last().copied();
            let min = a.min.or(first).ok_or_else(|| config_error(None, "axis_min", "required"))?;
            let max = a.max.or(last).ok_or_else(|| config_error(None, "axis_max", "required"))?;
            let count = a.count.unwrap_or(spec.values.len().max(1));
            spec.values = linspace(min, max, count);
        }
        if !self.overlays.is_empty() {
            spec.overlays = self.overlays.clone();
        }
        if let Some(outputs) = &self.outputs {
            spec.outputs = outputs.clone();
        }
        spec.convention = self.eta;
        spec.samples = self.samples;
        spec.validate()?;
        Ok(spec)
    }
}

fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let n = (count - 1) as f64;
    (0..count).map(|i| min + (max - min) * i as f64 / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_notation() {
        let cfg = RunConfig::parse("# resonance\nomega0 = 5.1e9\ngamma=10 # s^-1\n\nbeta = 0.0000000001\n").unwrap();
        let p = cfg.params();
        assert_eq!(p.omega0, 5.1e9);
        assert_eq!(p.omega_l, 5.1e9);
        assert_eq!(p.beta, 1e-10);
    }

    #[test]
    fn omega_l_follows_omega0_unless_given() {
        let p = RunConfig::parse("omega0 = 4e9").unwrap().params();
        assert_eq!(p.omega_l, 4e9);
        let p = RunConfig::parse("omega0 = 4e9\nomegaL = 3e9").unwrap().params();
        assert_eq!((p.omega0, p.omega_l), (4e9, 3e9));
    }

    #[test]
    fn errors_name_key_and_line() {
        let err = RunConfig::parse("gamma = 10\n\nlambda = ten\n").unwrap_err();
        assert!(matches!(&err, Error::Config { line: Some(3), key, .. } if key == "lambda"), "{err}");
        assert!(err.to_string().contains("line 3"));
        let err = RunConfig::parse("colour = red").unwrap_err();
        assert!(matches!(&err, Error::Config { line: Some(1), key, .. } if key == "colour"));
        let err = RunConfig::parse("gamma = 1\ngamma = 2").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(2), .. }));
        assert!(RunConfig::parse("gamma").is_err());
        assert!(RunConfig::parse("kernel_tol = 0").is_err());
        assert!(RunConfig::parse("preset = 10z").is_err());
    }

    #[test]
    fn preset_requires_sweep_or_figure() {
        let cfg = RunConfig::parse("command = simulate\npreset = 9a").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::parse("command = figure\npreset = 9a").unwrap();
        cfg.validate().unwrap();
    }

    #[test]
    fn preset_with_overrides() {
        let cfg = RunConfig::parse("preset = 3a\naxis_max = 50\naxis_count = 11\nlambda = 35\neta = plus").unwrap();
        let spec = cfg.sweep_spec().unwrap();
        assert_eq!(spec.values.len(), 11);
        assert_eq!(spec.values[10], 50.0);
        assert_eq!(spec.values[0], 0.0);
        assert_eq!(spec.base.lambda, 35.0);
        assert_eq!(spec.convention, EtaConvention::Plus);
        // The preset's λ overlays still take precedence per curve.
        assert_eq!(spec.overlays.len(), 2);
    }

    #[test]
    fn custom_sweep() {
        let text = "axis = gamma\naxis_min = 1\naxis_max = 3\naxis_count = 3\noverlay = beta:0\noverlay = beta:2e-10,drive:5\noutputs = n_blp";
        let spec = RunConfig::parse(text).unwrap().sweep_spec().unwrap();
        assert_eq!(spec.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(spec.overlays[1].settings, vec![(ParamKey::Beta, 2e-10), (ParamKey::Drive, 5.0)]);
        assert_eq!(spec.outputs, vec![MetricKind::NBlp]);
        assert!(RunConfig::parse("gamma = 1").unwrap().sweep_spec().is_err());
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        let params = prop::collection::btree_map(prop::sample::select(ParamKey::ALL.to_vec()), -1e12f64..1e12, 0..8);
        let overlay = prop::collection::vec((prop::sample::select(ParamKey::ALL.to_vec()), any::<f64>().prop_filter("finite", |x| x.is_finite())), 1..3)
            .prop_map(|s| Overlay::new(&s));
        (
            params,
            prop::option::of(prop::sample::select(vec![Command::Simulate, Command::Sweep, Command::Verify, Command::Figure])),
            prop::option::of(prop::sample::select(crate::presets::PRESET_NAMES.to_vec())),
            (1e-15f64..1.0, 1e-15f64..1.0, 1e-15f64..1.0),
            any::<bool>(),
            2usize..100_000,
            (prop::option::of(prop::sample::select(ParamKey::ALL.to_vec())), prop::option::of(-1e3f64..1e3), prop::option::of(1usize..500)),
            prop::collection::vec(overlay, 0..3),
            prop::option::of(prop::sample::subsequence(vec![MetricKind::TauQsl, MetricKind::NBlp], 1..=2)),
        )
            .prop_map(|(overrides, command, preset, tol, plus, samples, axis, overlays, outputs)| RunConfig {
                command,
                overrides,
                preset: preset.map(str::to_string),
                output_dir: PathBuf::from("results/run 1"),
                tolerances: Tolerances { kernel: tol.0, oracle: tol.1, identity: tol.2 },
                eta: if plus { EtaConvention::Plus } else { EtaConvention::Minus },
                samples,
                axis: AxisConfig { key: axis.0, min: axis.1, max: axis.1.map(|x| x + 1.0), count: axis.2 },
                overlays,
                outputs,
            })
    }

    proptest! {
        #[test]
        fn echo_round_trip(cfg in arb_config()) {
            let text = cfg.echo();
            let back = RunConfig::parse(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
