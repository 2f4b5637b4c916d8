//! Direct time integration of Ċ₁(t) = −∫₀ᵗ F(t, t₁) C₁(t₁) dt₁, independent
//! of the Laplace-domain solution.
//!
//! With the stationary two-exponential kernel the memory integral is carried
//! by two auxiliary variables yᵢ(t) = ∫₀ᵗ e^{−εᵢ(t−t₁)} C₁(t₁) dt₁, giving the
//! linear system Ċ = −a₀y₀ − a₁y₁, ẏᵢ = C − εᵢyᵢ, integrated with classical
//! RK4. The full kernel depends on t₁ separately and is integrated as a
//! Volterra equation with the trapezoidal rule.

use num_complex::Complex64;

use super::trace::AmplitudeTrace;
use crate::error::{Error, Result};
use crate::kernel::{closed_form_amplitudes, kernel_full_form};
use crate::model::KernelParams;

/// Per-step local error above which the integrator gives up.
pub const STEP_TOLERANCE: f64 = 1e-8;
/// RK4 substeps satisfy h·ρ ≤ this, with ρ the fastest rate of the system.
const RK4_STEP_SCALE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Stationary kernel, RK4 on the augmented ODE.
    #[default]
    ClosedKernel,
    /// Kernel with the exp(±2μβt₁) factors, trapezoidal Volterra scheme.
    FullKernel,
}

impl OracleMode {
    pub fn name(self) -> &'static str {
        match self {
            OracleMode::ClosedKernel => "closed_kernel",
            OracleMode::FullKernel => "full_kernel",
        }
    }
}

/// Oracle trace plus the largest per-step error estimate encountered.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrace {
    pub trace: AmplitudeTrace,
    pub step_error: f64,
}

pub fn amplitude_oracle(kp: &KernelParams, grid: &[f64], mode: OracleMode) -> Result<OracleTrace> {
    match mode {
        OracleMode::ClosedKernel => ode_oracle(kp, grid),
        OracleMode::FullKernel => volterra_oracle(kp, grid),
    }
}

type State = [Complex64; 3];

struct Augmented {
    amp: [Complex64; 2],
    eps: [Complex64; 2],
}

impl Augmented {
    fn rhs(&self, y: &State) -> State {
        [
            -self.amp[0] * y[1] - self.amp[1] * y[2],
            y[0] - self.eps[0] * y[1],
            y[0] - self.eps[1] * y[2],
        ]
    }

    fn rk4(&self, y: &State, h: f64) -> State {
        let add = |a: &State, k: &State, s: f64| [a[0] + k[0] * s, a[1] + k[1] * s, a[2] + k[2] * s];
        let k1 = self.rhs(y);
        let k2 = self.rhs(&add(y, &k1, h / 2.0));
        let k3 = self.rhs(&add(y, &k2, h / 2.0));
        let k4 = self.rhs(&add(y, &k3, h));
        let mut out = *y;
        for i in 0..3 {
            out[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
        out
    }

    fn advance(&self, y: &State, dt: f64, steps: usize) -> State {
        let h = dt / steps as f64;
        (0..steps).fold(*y, |acc, _| self.rk4(&acc, h))
    }

    fn derivative(&self, y: &State) -> Complex64 {
        self.rhs(y)[0]
    }
}

fn ode_oracle(kp: &KernelParams, grid: &[f64]) -> Result<OracleTrace> {
    check_grid(grid)?;
    let sys = Augmented { amp: closed_form_amplitudes(kp), eps: [kp.eps0, kp.eps1] };
    let rate = kp.eps0.norm().max(kp.eps1.norm()) + (sys.amp[0].norm() + sys.amp[1].norm()).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // Start at t = 0 with C = 1 and empty memory.
    let mut state: State = [one, zero, zero];
    let mut t = 0.0;
    let mut c1 = Vec::with_capacity(grid.len());
    let mut c1dot = Vec::with_capacity(grid.len());
    let mut worst = 0.0f64;
    for &target in grid {
        let dt = target - t;
        if dt > 0.0 {
            let steps = ((dt * rate / RK4_STEP_SCALE).ceil() as usize).max(1);
            let coarse = sys.advance(&state, dt, steps);
            let fine = sys.advance(&state, dt, 2 * steps);
            // RK4 step doubling: error of the fine result ≈ |fine − coarse|/15.
            let diff = (0..3).map(|i| (fine[i] - coarse[i]).norm()).fold(0.0, f64::max) / 15.0;
            let per_step = diff / (2 * steps) as f64;
            if per_step > STEP_TOLERANCE || !per_step.is_finite() {
                return Err(Error::StepTooCoarse { t: target, estimate: per_step });
            }
            worst = worst.max(per_step);
            state = fine;
            t = target;
        }
        c1.push(state[0]);
        c1dot.push(sys.derivative(&state));
    }
    Ok(OracleTrace { trace: AmplitudeTrace::from_samples(grid.to_vec(), c1, c1dot)?, step_error: worst })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.first() {
        Some(&t) if t >= 0.0 => Ok(()),
        _ => Err(Error::InvalidGrid("oracle grid must start at t >= 0".into())),
    }
}

/// Trapezoidal solution on a uniform grid starting at 0. Returns C and Ċ.
fn trapezoid(kp: &KernelParams, h: f64, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let kernel = |i: usize, j: usize| kernel_full_form(i as f64 * h, j as f64 * h, kp).value;
    let mut c = vec![Complex64::new(1.0, 0.0)];
    let mut g = vec![Complex64::new(0.0, 0.0)];
    for m in 1..=n {
        // Memory integral at t_m, all terms but the unknown endpoint.
        let mut s = 0.5 * kernel(m, 0) * c[0];
        for (j, &cj) in c.iter().enumerate().take(m).skip(1) {
            s += kernel(m, j) * cj;
        }
        s *= -h;
        let diag = kernel(m, m);
        let next = (c[m - 1] + 0.5 * h * (g[m - 1] + s)) / (1.0 + 0.25 * h * h * diag);
        g.push(s - 0.5 * h * diag * next);
        c.push(next);
    }
    (c, g)
}

fn volterra_oracle(kp: &KernelParams, grid: &[f64]) -> Result<OracleTrace> {
    check_grid(grid)?;
    if grid[0] != 0.0 {
        return Err(Error::InvalidGrid("Volterra oracle grid must start at 0".into()));
    }
    let n = grid.len() - 1;
    let h = grid[n] / n as f64;
    if grid.iter().enumerate().any(|(i, &t)| (t - i as f64 * h).abs() > 1e-9 * h) {
        return Err(Error::InvalidGrid("Volterra oracle needs a uniform grid".into()));
    }
    let (coarse, _) = trapezoid(kp, h, n);
    let (fine, fine_dot) = trapezoid(kp, h / 2.0, 2 * n);
    // Second-order scheme: Richardson extrapolation on the shared nodes,
    // error of the fine solution ≈ |fine − coarse|/3.
    let mut worst = 0.0f64;
    let mut c1 = Vec::with_capacity(n + 1);
    let mut c1dot = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let (f, cse) = (fine[2 * i], coarse[i]);
        worst = worst.max((f - cse).norm() / 3.0);
        c1.push((4.0 * f - cse) / 3.0);
        c1dot.push(fine_dot[2 * i]);
    }
    let per_step = worst / (2 * n) as f64;
    if per_step > STEP_TOLERANCE || !per_step.is_finite() {
        return Err(Error::StepTooCoarse { t: grid[n], estimate: per_step });
    }
    Ok(OracleTrace { trace: AmplitudeTrace::from_samples(grid.to_vec(), c1, c1dot)?, step_error: per_step })
}
