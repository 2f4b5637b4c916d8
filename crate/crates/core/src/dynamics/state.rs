//! Reduced qubit state in the dressed basis {|E⟩, |G⟩} and the time-local
//! rates of its master equation.

use num_complex::Complex64;

use super::trace::AmplitudeTrace;
use crate::error::{Error, Result};

const TRACE_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-9;
/// |C₁| below this makes Ċ₁/C₁ meaningless.
pub const NODE_THRESHOLD: f64 = 1e-12;

/// 2×2 density matrix, row/column 0 is |E⟩ and 1 is |G⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub rho: [[Complex64; 2]; 2],
}

impl QubitState {
    pub fn new(rho: [[Complex64; 2]; 2]) -> Result<Self> {
        let s = QubitState { rho };
        s.validate()?;
        Ok(s)
    }

    pub fn excited() -> Self {
        Self::diagonal(1.0)
    }

    pub fn ground() -> Self {
        Self::diagonal(0.0)
    }

    /// diag(p, 1 − p).
    pub fn diagonal(p_excited: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        QubitState { rho: [[Complex64::new(p_excited, 0.0), z], [z, Complex64::new(1.0 - p_excited, 0.0)]] }
    }

    pub fn trace(&self) -> Complex64 {
        self.rho[0][0] + self.rho[1][1]
    }

    /// Tr[ρσ].
    pub fn overlap(&self, other: &QubitState) -> Complex64 {
        let (a, b) = (&self.rho, &other.rho);
        a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1]
    }

    pub fn purity(&self) -> f64 {
        self.overlap(self).re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(self.rho[0][0].re, self.rho[1][1].re, self.rho[0][1])
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.rho;
        if r.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::invalid("rho", "entries must be finite"));
        }
        if (self.trace() - 1.0).norm() > TRACE_TOL {
            return Err(Error::invalid("rho", format!("trace {} differs from 1", self.trace())));
        }
        let skew = (r[0][1] - r[1][0].conj()).norm().max(r[0][0].im.abs()).max(r[1][1].im.abs());
        if skew > HERMITIAN_TOL {
            return Err(Error::invalid("rho", "not Hermitian"));
        }
        if self.eigenvalues()[0] < -POSITIVITY_TOL {
            return Err(Error::invalid("rho", "not positive semidefinite"));
        }
        Ok(())
    }
}

fn hermitian_eigenvalues(a: f64, d: f64, off: Complex64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(off.norm());
    [mean - radius, mean + radius]
}

/// ρ(t) from ρ(0): ρ_EE|C₁|², ρ_EG C₁, and the ground population 1 − ρ_EE(t).
pub fn density_matrix(trace: &AmplitudeTrace, rho0: &QubitState, index: usize) -> Result<QubitState> {
    trace.check_index(index)?;
    rho0.validate()?;
    let c = trace.c1[index];
    let ee = rho0.rho[0][0] * trace.pop[index];
    let eg = rho0.rho[0][1] * c;
    Ok(QubitState { rho: [[ee, eg], [eg.conj(), Complex64::new(1.0, 0.0) - ee]] })
}

/// ½ Tr|ρ₁ − ρ₂| from the eigenvalues of the difference.
pub fn trace_distance_between(a: &QubitState, b: &QubitState) -> f64 {
    let d00 = (a.rho[0][0] - b.rho[0][0]).re;
    let d11 = (a.rho[1][1] - b.rho[1][1]).re;
    let off = a.rho[0][1] - b.rho[0][1];
    let [l0, l1] = hermitian_eigenvalues(d00, d11, off);
    0.5 * (l0.abs() + l1.abs())
}

/// Decay rate Γ(t) and Lamb shift S(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    /// Γ(t) = −2 Re[Ċ₁/C₁], s⁻¹.
    pub gamma: f64,
    /// S(t) = −2 Im[Ċ₁/C₁], rad/s.
    pub shift: f64,
}

pub fn decay_and_shift(trace: &AmplitudeTrace, index: usize) -> Result<Rates> {
    trace.check_index(index)?;
    let c = trace.c1[index];
    if c.norm() < NODE_THRESHOLD {
        return Err(Error::AmplitudeNode { t: trace.grid[index], modulus: c.norm() });
    }
    let q = trace.c1dot[index] / c;
    Ok(Rates { gamma: -2.0 * q.re, shift: -2.0 * q.im })
}
