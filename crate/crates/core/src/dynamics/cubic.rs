//! Roots and residues of the Laplace-domain denominator
//! b s³ + b(ε₀+ε₁) s² + d₁ s + d₂.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::KernelParams;

/// Separation below which roots are flagged, relative to the root scale.
pub const NEAR_DEGENERATE: f64 = 1e-6;
/// Separation below which the simple-pole expansion is refused.
pub const DEGENERATE: f64 = 1e-7;

const NEWTON_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub roots: [Complex64; 3],
    /// Residue weights w_k of the amplitude at each root.
    pub residues: [Complex64; 3],
    /// Smallest pairwise root separation, s⁻¹.
    pub condition: f64,
    /// Root scale max(|a₂|, |a₁|^½, |a₀|^⅓) of the monic polynomial.
    pub scale: f64,
    pub near_degenerate: bool,
}

/// Roots of the monic cubic z³ + a₂z² + a₁z + a₀, polished by Newton.
///
/// The polynomial is first rescaled by its root scale so the Cardano step
/// works on coefficients of order one.
pub fn solve_monic_cubic(a2: Complex64, a1: Complex64, a0: Complex64) -> ([Complex64; 3], f64) {
    let scale = root_scale(a2, a1, a0);
    if scale == 0.0 {
        return ([Complex64::new(0.0, 0.0); 3], 0.0);
    }
    let (c2, c1, c0) = (a2 / scale, a1 / scale.powi(2), a0 / scale.powi(3));
    let mut roots = cardano(c2, c1, c0);
    for z in &mut roots {
        for _ in 0..NEWTON_STEPS {
            let p = ((*z + c2) * *z + c1) * *z + c0;
            let dp = (3.0 * *z + 2.0 * c2) * *z + c1;
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            *z -= step;
        }
    }
    (roots.map(|z| z * scale), scale)
}

fn root_scale(a2: Complex64, a1: Complex64, a0: Complex64) -> f64 {
    a2.norm().max(a1.norm().sqrt()).max(a0.norm().cbrt())
}

fn cardano(a2: Complex64, a1: Complex64, a0: Complex64) -> [Complex64; 3] {
    // z = y − a₂/3 gives y³ + p y + q = 0.
    let shift = a2 / 3.0;
    let p = a1 - a2 * shift;
    let q = 2.0 * shift * shift * shift - shift * a1 + a0;
    let disc = (q * 0.5).powi(2) + (p / 3.0).powi(3);
    let sq = disc.sqrt();
    // Take the larger branch to avoid cancellation.
    let plus = -q * 0.5 + sq;
    let minus = -q * 0.5 - sq;
    let u3 = if plus.norm() >= minus.norm() { plus } else { minus };
    let omega = Complex64::new(-0.5, 3f64.sqrt() * 0.5);
    let omega2 = omega.conj();
    if u3.norm() == 0.0 {
        return [-shift; 3];
    }
    let u = u3.powf(1.0 / 3.0);
    let v = -p / (3.0 * u);
    [u + v - shift, omega * u + omega2 * v - shift, omega2 * u + omega * v - shift]
}

/// Solves the amplitude denominator and attaches the residue weights
/// w_k = b(s_k+ε₀)(s_k+ε₁) / (3b s_k² + 2b(ε₀+ε₁)s_k + d₁).
pub fn solve_cubic(kp: &KernelParams) -> Result<CubicRoots> {
    let sum = kp.eps0 + kp.eps1;
    let (roots, scale) = solve_monic_cubic(sum, kp.d1 / kp.b, kp.d2 / kp.b);
    let mut condition = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            condition = condition.min((roots[i] - roots[j]).norm());
        }
    }
    if condition < DEGENERATE * scale || scale == 0.0 {
        return Err(Error::DegenerateRoots { separation: condition, scale });
    }
    let residues = roots.map(|s| {
        let num = kp.b * (s + kp.eps0) * (s + kp.eps1);
        let den = (3.0 * kp.b * s + 2.0 * kp.b * sum) * s + kp.d1;
        num / den
    });
    Ok(CubicRoots {
        roots,
        residues,
        condition,
        scale,
        near_degenerate: condition < NEAR_DEGENERATE * scale,
    })
}
