//! Quantum speed limit time, BLP non-Markovianity and the identity that
//! links them, all computed from an amplitude trace with |E⟩ as the initial
//! state and {|E⟩⟨E|, |G⟩⟨G|} as the optimal pair.

use crate::dynamics::{AmplitudeTrace, QubitState};
use crate::error::{Error, Result};

/// Width in t to which popdot zeros are bisected.
pub const EXTREMUM_TOL: f64 = 1e-12;
/// Total variation below this (times the unit-scale population) counts as
/// no evolution.
const ZERO_EVOLUTION: f64 = 16.0 * f64::EPSILON;
const RATIO_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub tau: f64,
    pub tau_qsl: f64,
    pub n_blp: f64,
    pub pop_tau: f64,
    /// ∫₀^τ |∂ₜ|C₁|²| dt.
    pub integral_abs: f64,
    /// Sum of the positive increments of |C₁|², computed independently of
    /// `integral_abs`.
    pub positive_increments: f64,
    /// |τ_qsl(direct) − τ_qsl(via N)|.
    pub identity_residual: f64,
}

impl MetricsReport {
    pub fn compute(trace: &AmplitudeTrace) -> Result<Self> {
        let v = variation(trace);
        let tau = trace.horizon();
        let tau_qsl = qslt_from(tau, v.pop_tau, v.total)?;
        let n_blp = blp_from(v.pop_tau, v.total);
        let via_identity = qslt_identity_from(tau, v.pop_tau, n_blp)?;
        Ok(MetricsReport {
            tau,
            tau_qsl,
            n_blp,
            pop_tau: v.pop_tau,
            integral_abs: v.total,
            positive_increments: v.rise,
            identity_residual: (tau_qsl - via_identity).abs(),
        })
    }
}

/// Bures angle arccos √(Tr[ρ₀ρₜ]/Tr[ρ₀²]) in [0, π/2].
pub fn bures_angle(rho0: &QubitState, rhot: &QubitState) -> Result<f64> {
    rho0.validate()?;
    rhot.validate()?;
    let purity = rho0.purity();
    if purity <= 0.0 {
        return Err(Error::invalid("rho0", "zero purity"));
    }
    let mut ratio = rho0.overlap(rhot).re / purity;
    if (-RATIO_CLAMP..0.0).contains(&ratio) {
        ratio = 0.0;
    }
    if (1.0..1.0 + RATIO_CLAMP).contains(&ratio) {
        ratio = 1.0;
    }
    Ok(ratio.sqrt().acos())
}

/// Population at the horizon, total variation and total rise of |C₁|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variation {
    pub pop_tau: f64,
    pub total: f64,
    pub rise: f64,
}

/// Splits [0, τ] at the zeros of popdot (bracketed by sign changes between
/// samples and bisected to [`EXTREMUM_TOL`]) and telescopes |Δpop| over the
/// monotone pieces.
pub fn variation(trace: &AmplitudeTrace) -> Variation {
    let mut total = 0.0;
    let mut rise = 0.0;
    let mut last_pop = trace.pop[0];
    let mut accumulate = |p: f64| {
        let d = p - last_pop;
        total += d.abs();
        if d > 0.0 {
            rise += d;
        }
        last_pop = p;
    };
    let mut sign = 0.0f64;
    let mut sign_t = trace.grid[0];
    for i in 0..trace.len() {
        let d = trace.popdot[i];
        if d != 0.0 {
            if sign != 0.0 && (d > 0.0) != (sign > 0.0) {
                let t = bisect_zero(trace, sign_t, trace.grid[i], sign);
                accumulate(trace.pop_at(t));
            }
            sign = d.signum();
            sign_t = trace.grid[i];
        }
    }
    accumulate(*trace.pop.last().expect("grid is never empty"));
    Variation { pop_tau: last_pop, total, rise }
}

fn bisect_zero(trace: &AmplitudeTrace, mut lo: f64, mut hi: f64, lo_sign: f64) -> f64 {
    while hi - lo > EXTREMUM_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = trace.popdot_at(mid);
        if d == 0.0 {
            return mid;
        }
        if (d > 0.0) == (lo_sign > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn qslt_from(tau: f64, pop_tau: f64, total: f64) -> Result<f64> {
    if total <= ZERO_EVOLUTION {
        return Err(Error::ZeroEvolution);
    }
    Ok((1.0 - pop_tau) / (total / tau))
}

fn blp_from(pop_tau: f64, total: f64) -> f64 {
    0.5 * (total + pop_tau - 1.0)
}

fn qslt_identity_from(tau: f64, pop_tau: f64, n: f64) -> Result<f64> {
    let den = 1.0 - pop_tau + 2.0 * n;
    if den <= ZERO_EVOLUTION {
        return Err(Error::ZeroEvolution);
    }
    Ok(tau * (1.0 - pop_tau) / den)
}

/// τ_qsl = (1 − |C₁(τ)|²) / ((1/τ)∫₀^τ|∂ₜ|C₁|²|dt).
pub fn qslt_direct(trace: &AmplitudeTrace) -> Result<f64> {
    let v = variation(trace);
    qslt_from(trace.horizon(), v.pop_tau, v.total)
}

/// N = ½[∫₀^τ|∂ₜ|C₁|²|dt + |C₁(τ)|² − 1].
pub fn non_markovianity(trace: &AmplitudeTrace) -> f64 {
    let v = variation(trace);
    blp_from(v.pop_tau, v.total)
}

/// τ(1 − |C₁(τ)|²) / (1 − |C₁(τ)|² + 2N).
pub fn qslt_via_identity(trace: &AmplitudeTrace) -> Result<f64> {
    let v = variation(trace);
    qslt_identity_from(trace.horizon(), v.pop_tau, blp_from(v.pop_tau, v.total))
}

/// Trace distance of the evolved optimal pair, equal to |C₁(t)|².
pub fn trace_distance(trace: &AmplitudeTrace, index: usize) -> Result<f64> {
    trace.check_index(index)?;
    Ok(trace.pop[index])
}
