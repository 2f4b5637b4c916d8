//! The reservoir memory kernel F(t, t₁).
//!
//! Three evaluations are provided: the stationary closed form (valid when
//! the velocity-dependent factors exp(±2μβt₁) are set to one), the full
//! four-term residue form that keeps those factors, and a direct numerical
//! quadrature of the defining frequency integral which serves as the oracle
//! for both.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::model::{KernelParams, PhysicalParams};
use crate::quadrature::{lorentz_fourier, FourierOptions};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    /// Kernel value, s⁻².
    pub value: Complex64,
    pub t: f64,
    pub t1: f64,
}

/// Shared evaluation of ξ(1 − g₀/b)e^{−ε₀u} + ξ(1 − g₁b)e^{−ε₁u}. The closed
/// form passes g₀ = g₁ = 1, so at β = 0 both forms run the same arithmetic.
fn two_exponentials(kp: &KernelParams, lag: f64, g0: Complex64, g1: Complex64) -> Complex64 {
    let inv_b = ONE / kp.b;
    let lead0 = kp.xi * (ONE - inv_b * g0);
    let lead1 = kp.xi * (ONE - kp.b * g1);
    lead0 * (-kp.eps0 * lag).exp() + lead1 * (-kp.eps1 * lag).exp()
}

/// Kernel prefactors of the two exponentials e^{−ε₀u} and e^{−ε₁u} in the
/// closed form: ξ(1 − 1/b) and ξ(1 − b).
pub fn closed_form_amplitudes(kp: &KernelParams) -> [Complex64; 2] {
    let inv_b = ONE / kp.b;
    [kp.xi * (ONE - inv_b * ONE), kp.xi * (ONE - kp.b * ONE)]
}

/// Stationary kernel: depends on t and t₁ only through t − t₁.
pub fn kernel_closed_form(t: f64, t1: f64, kp: &KernelParams) -> KernelValue {
    let value = two_exponentials(kp, t - t1, ONE, ONE);
    KernelValue { value, t, t1 }
}

/// Four-term residue kernel retaining exp(±2μβt₁).
pub fn kernel_full_form(t: f64, t1: f64, kp: &KernelParams) -> KernelValue {
    let drift = 2.0 * kp.mu * kp.beta * t1;
    let value = two_exponentials(kp, t - t1, drift.exp(), (-drift).exp());
    KernelValue { value, t, t1 }
}

/// Options for [`kernel_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Lower limit of the frequency integral, rad/s.
    pub lower: f64,
    /// Upper limit, rad/s; `None` integrates to infinity.
    pub cutoff: Option<f64>,
    pub fourier: FourierOptions,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { lower: 0.0, cutoff: None, fourier: FourierOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEstimate {
    pub kernel: KernelValue,
    /// Absolute error estimate, s⁻².
    pub error: f64,
}

/// Numerical quadrature of
///
/// ```text
/// F(t, t₁) = ∫ J(ω) sin[ω(βt − τ₀)] sin[ω(βt₁ − τ₀)] e^{i(ω_D + ω_L − ω)(t − t₁)} dω
/// ```
///
/// over [lower, cutoff]. The sine product is expanded into four complex
/// exponentials, each reducing to a Lorentzian Fourier integral in the
/// scaled variable x = (ω − ω₀)/λ.
pub fn kernel_quadrature(t: f64, t1: f64, p: &PhysicalParams, opts: &QuadratureOptions) -> Result<KernelEstimate> {
    p.validate()?;
    let lag = t - t1;
    let sum_arg = p.beta * (t + t1) - 2.0 * p.tau0;
    // ω_D + ω_L − ω₀ without the cancelling large terms.
    let shift = p.dressed_splitting() - p.detuning();
    // Coefficient of ω in each exponent, with the ω₀ part split off:
    // exponent = i[shift·u + ω₀·m] + iλ k x.
    let terms: [(f64, f64, f64); 4] = [
        (1.0, p.beta * lag - lag, p.beta * lag),
        (1.0, -p.beta * lag - lag, -p.beta * lag),
        (-1.0, sum_arg - lag, sum_arg),
        (-1.0, -sum_arg - lag, -sum_arg),
    ];
    let a = (opts.lower - p.omega0) / p.lambda;
    let b = match opts.cutoff {
        Some(c) => (c - p.omega0) / p.lambda,
        None => f64::INFINITY,
    };
    let prefactor = p.gamma * p.lambda / (8.0 * PI);
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    if prefactor != 0.0 {
        for (sign, k, m) in terms {
            let est = lorentz_fourier(p.lambda * k, a, b, opts.fourier)?;
            let phase = Complex64::from_polar(1.0, shift * lag + p.omega0 * m);
            value += sign * phase * est.value;
            error += est.error;
        }
    }
    Ok(KernelEstimate {
        kernel: KernelValue { value: prefactor * value, t, t1 },
        error: prefactor * error,
    })
}
