//! Physical parameters of the driven, moving qubit and the constants of the
//! dressed-frame effective model derived from them.
//!
//! Units: every frequency or rate is in rad/s (equivalently s⁻¹) and every
//! time is in seconds. The driving strength is a non-negative magnitude; its
//! phase never enters the dressed splitting.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Distance from the qubit's reference position to the perfect mirror, m.
pub const DEFAULT_CAVITY_LENGTH: f64 = 0.23;

/// Qubit transition frequency used by every figure but one, rad/s.
pub const DEFAULT_OMEGA0: f64 = 5.1e9;

/// Light travel time `l / c` to the mirror.
pub fn boundary_delay(length_m: f64) -> f64 {
    length_m / SPEED_OF_LIGHT
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Qubit transition frequency ω₀.
    pub omega0: f64,
    /// Classical field frequency ω_L.
    pub omega_l: f64,
    /// Driving strength Ω (magnitude).
    pub drive: f64,
    /// Dissipative rate γ.
    pub gamma: f64,
    /// Spectral width λ of the reservoir.
    pub lambda: f64,
    /// Velocity ratio v/c.
    pub beta: f64,
    /// Boundary delay τ₀ = l/c.
    pub tau0: f64,
    /// Evolution time τ over which the metrics are evaluated.
    pub horizon: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            omega0: DEFAULT_OMEGA0,
            omega_l: DEFAULT_OMEGA0,
            drive: 0.0,
            gamma: 10.0,
            lambda: 10.0,
            beta: 0.0,
            tau0: boundary_delay(DEFAULT_CAVITY_LENGTH),
            horizon: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        for key in ParamKey::ALL {
            if !self.get(key).is_finite() {
                return Err(Error::invalid(key.name(), "must be finite"));
            }
        }
        if self.omega0 <= 0.0 {
            return Err(Error::invalid("omega0", "must be > 0"));
        }
        if self.gamma < 0.0 {
            return Err(Error::invalid("gamma", "must be >= 0"));
        }
        if self.lambda <= 0.0 {
            return Err(Error::invalid("lambda", "must be > 0"));
        }
        if self.horizon <= 0.0 {
            return Err(Error::invalid("horizon", "must be > 0"));
        }
        if self.tau0 < 0.0 {
            return Err(Error::invalid("tau0", "must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::invalid("beta", "must satisfy 0 <= beta < 1"));
        }
        if self.drive < 0.0 {
            return Err(Error::invalid("drive", "must be >= 0"));
        }
        Ok(())
    }

    pub fn get(&self, key: ParamKey) -> f64 {
        match key {
            ParamKey::Omega0 => self.omega0,
            ParamKey::OmegaL => self.omega_l,
            ParamKey::Drive => self.drive,
            ParamKey::Gamma => self.gamma,
            ParamKey::Lambda => self.lambda,
            ParamKey::Beta => self.beta,
            ParamKey::Tau0 => self.tau0,
            ParamKey::Horizon => self.horizon,
        }
    }

    pub fn set(&mut self, key: ParamKey, value: f64) {
        match key {
            ParamKey::Omega0 => self.omega0 = value,
            ParamKey::OmegaL => self.omega_l = value,
            ParamKey::Drive => self.drive = value,
            ParamKey::Gamma => self.gamma = value,
            ParamKey::Lambda => self.lambda = value,
            ParamKey::Beta => self.beta = value,
            ParamKey::Tau0 => self.tau0 = value,
            ParamKey::Horizon => self.horizon = value,
        }
    }

    pub fn with(mut self, key: ParamKey, value: f64) -> Self {
        self.set(key, value);
        self
    }

    /// Detuning Δ = ω₀ − ω_L.
    pub fn detuning(&self) -> f64 {
        self.omega0 - self.omega_l
    }

    /// Dressed splitting ω_D = √(Δ² + 4Ω²).
    pub fn dressed_splitting(&self) -> f64 {
        self.detuning().hypot(2.0 * self.drive)
    }
}

/// Names of the configurable physical parameters, spelled as in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamKey {
    Omega0,
    OmegaL,
    Drive,
    Gamma,
    Lambda,
    Beta,
    Tau0,
    Horizon,
}

impl ParamKey {
    pub const ALL: [ParamKey; 8] = [
        ParamKey::Omega0,
        ParamKey::OmegaL,
        ParamKey::Drive,
        ParamKey::Gamma,
        ParamKey::Lambda,
        ParamKey::Beta,
        ParamKey::Tau0,
        ParamKey::Horizon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamKey::Omega0 => "omega0",
            ParamKey::OmegaL => "omegaL",
            ParamKey::Drive => "drive",
            ParamKey::Gamma => "gamma",
            ParamKey::Lambda => "lambda",
            ParamKey::Beta => "beta",
            ParamKey::Tau0 => "tau0",
            ParamKey::Horizon => "horizon",
        }
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ParamKey::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown parameter `{s}`"))
    }
}

/// Sign of the imaginary part of the complex decay constant η.
///
/// `Minus` gives η = λ − i(ω_D + ω_L − ω₀), which is what the Lorentzian
/// pole of the memory integral produces. `Plus` flips the sign and is kept
/// so the choice can be checked against the quadrature oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EtaConvention {
    #[default]
    Minus,
    Plus,
}

impl EtaConvention {
    pub fn name(self) -> &'static str {
        match self {
            EtaConvention::Minus => "minus",
            EtaConvention::Plus => "plus",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            EtaConvention::Minus => EtaConvention::Plus,
            EtaConvention::Plus => EtaConvention::Minus,
        }
    }
}

impl fmt::Display for EtaConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EtaConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "minus" => Ok(EtaConvention::Minus),
            "plus" => Ok(EtaConvention::Plus),
            other => Err(format!("expected `minus` or `plus`, got `{other}`")),
        }
    }
}

/// Complex constants of the closed-form kernel and the Laplace-domain cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    /// Δ = ω₀ − ω_L.
    pub delta: f64,
    /// ω_D = √(Δ² + 4Ω²).
    pub omega_d: f64,
    /// ξ = γλ/8.
    pub xi: f64,
    /// μ = λ + iω₀.
    pub mu: Complex64,
    pub eta: Complex64,
    /// b = exp(2τ₀μ).
    pub b: Complex64,
    /// ε₀ = η − μβ.
    pub eps0: Complex64,
    /// ε₁ = η + μβ.
    pub eps1: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub beta: f64,
    pub tau0: f64,
    pub convention: EtaConvention,
}

pub fn derive_kernel_params(p: &PhysicalParams, convention: EtaConvention) -> Result<KernelParams> {
    p.validate()?;
    let delta = p.detuning();
    let omega_d = p.dressed_splitting();
    let xi = p.gamma * p.lambda / 8.0;
    let mu = Complex64::new(p.lambda, p.omega0);
    // ω_D + ω_L − ω₀ written without the large cancelling terms.
    let shift = omega_d - delta;
    let eta = match convention {
        EtaConvention::Minus => Complex64::new(p.lambda, -shift),
        EtaConvention::Plus => Complex64::new(p.lambda, shift),
    };
    let b = (2.0 * p.tau0 * mu).exp();
    let mu_beta = mu * p.beta;
    let eps0 = eta - mu_beta;
    let eps1 = eta + mu_beta;
    let one = Complex64::new(1.0, 0.0);
    let d1 = b * eps0 * eps1 - xi * (one - b) * (one - b);
    let d2 = xi * (b - one) * (eps1 - b * eps0);
    Ok(KernelParams {
        delta,
        omega_d,
        xi,
        mu,
        eta,
        b,
        eps0,
        eps1,
        d1,
        d2,
        beta: p.beta,
        tau0: p.tau0,
        convention,
    })
}

/// Lorentzian reservoir spectral density J(ω_k), in s⁻¹.
pub fn spectral_density(omega_k: f64, p: &PhysicalParams) -> f64 {
    let detune = p.omega0 - omega_k;
    p.gamma * p.lambda * p.lambda / (2.0 * PI * (detune * detune + p.lambda * p.lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingRegime {
    Weak,
    Strong,
    Boundary,
}

impl CouplingRegime {
    pub fn name(self) -> &'static str {
        match self {
            CouplingRegime::Weak => "weak",
            CouplingRegime::Strong => "strong",
            CouplingRegime::Boundary => "boundary",
        }
    }
}

/// λ > 2γ is weak coupling, λ < 2γ strong; exact comparison.
pub fn coupling_regime(p: &PhysicalParams) -> CouplingRegime {
    let threshold = 2.0 * p.gamma;
    if p.lambda > threshold {
        CouplingRegime::Weak
    } else if p.lambda < threshold {
        CouplingRegime::Strong
    } else {
        CouplingRegime::Boundary
    }
}
