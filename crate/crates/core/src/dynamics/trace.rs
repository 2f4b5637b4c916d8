//! Sampled excited-state amplitude C₁(t) and its closed-form model.

use num_complex::Complex64;

use super::cubic::solve_cubic;
use crate::error::{Error, Result};
use crate::kernel::closed_form_amplitudes;
use crate::model::KernelParams;

/// Default number of uniform samples over [0, horizon].
pub const DEFAULT_SAMPLES: usize = 4096;
/// Refinement stops once the sample count would exceed this.
pub const MAX_SAMPLES: usize = 1 << 20;
const REFINE_FACTOR: usize = 4;
const ANCHOR_STRIDE: usize = 64;

/// C(t) = Σ w_k e^{s_k t}.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSum {
    pub weights: Vec<Complex64>,
    pub rates: Vec<Complex64>,
}

impl ExponentialSum {
    pub fn new(weights: Vec<Complex64>, rates: Vec<Complex64>) -> Self {
        assert_eq!(weights.len(), rates.len());
        ExponentialSum { weights, rates }
    }

    /// The constant amplitude C ≡ 1.
    pub fn frozen() -> Self {
        ExponentialSum::new(vec![Complex64::new(1.0, 0.0)], vec![Complex64::new(0.0, 0.0)])
    }

    pub fn value(&self, t: f64) -> Complex64 {
        self.weights.iter().zip(&self.rates).map(|(w, s)| w * (s * t).exp()).sum()
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        self.weights.iter().zip(&self.rates).map(|(w, s)| w * s * (s * t).exp()).sum()
    }

    /// C and Ċ at once, sharing the exponentials.
    pub fn value_and_derivative(&self, t: f64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut slope = Complex64::new(0.0, 0.0);
        for (w, s) in self.weights.iter().zip(&self.rates) {
            let term = w * (s * t).exp();
            value += term;
            slope += term * s;
        }
        (value, slope)
    }

    /// C and Ċ on a uniform grid. Successive exponentials come from
    /// multiplying by e^{s h}, re-anchored with a direct evaluation
    /// every [`ANCHOR_STRIDE`] samples to bound the accumulated rounding.
    pub fn sample_uniform(&self, grid: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = grid.len();
        let h = if n > 1 { grid[1] - grid[0] } else { 0.0 };
        let steps: Vec<Complex64> = self.rates.iter().map(|s| (s * h).exp()).collect();
        let mut terms: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); self.rates.len()];
        let mut c = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for (k, &t) in grid.iter().enumerate() {
            let mut value = Complex64::new(0.0, 0.0);
            let mut slope = Complex64::new(0.0, 0.0);
            for j in 0..self.rates.len() {
                terms[j] = if k % ANCHOR_STRIDE == 0 {
                    self.weights[j] * (self.rates[j] * t).exp()
                } else {
                    terms[j] * steps[j]
                };
                value += terms[j];
                slope += terms[j] * self.rates[j];
            }
            c.push(value);
            d.push(slope);
        }
        (c, d)
    }

    pub fn pop(&self, t: f64) -> f64 {
        self.value(t).norm_sqr()
    }

    pub fn popdot(&self, t: f64) -> f64 {
        2.0 * (self.value(t).conj() * self.derivative(t)).re
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    pub grid: Vec<f64>,
    pub c1: Vec<Complex64>,
    pub c1dot: Vec<Complex64>,
    pub pop: Vec<f64>,
    pub popdot: Vec<f64>,
    /// Closed-form model the samples came from, if any. Metrics use it to
    /// locate extrema between samples; without it they interpolate.
    pub model: Option<ExponentialSum>,
}

impl AmplitudeTrace {
    /// Samples `model` on `grid`. C₁(0) is set to exactly one.
    pub fn from_model(model: ExponentialSum, grid: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        let (mut c1, c1dot): (Vec<Complex64>, Vec<Complex64>) = grid.iter().map(|&t| model.value_and_derivative(t)).unzip();
        if grid[0] == 0.0 {
            c1[0] = Complex64::new(1.0, 0.0);
        }
        Ok(Self::assemble(grid, c1, c1dot, Some(model)))
    }

    /// As [`from_model`](Self::from_model) for a grid from [`uniform_grid`].
    pub fn from_model_uniform(model: ExponentialSum, horizon: f64, samples: usize) -> Result<Self> {
        let grid = uniform_grid(horizon, samples)?;
        let (mut c1, c1dot) = model.sample_uniform(&grid);
        if grid[0] == 0.0 {
            c1[0] = Complex64::new(1.0, 0.0);
        }
        Ok(Self::assemble(grid, c1, c1dot, Some(model)))
    }

    pub fn from_samples(grid: Vec<f64>, c1: Vec<Complex64>, c1dot: Vec<Complex64>) -> Result<Self> {
        check_grid(&grid)?;
        if c1.len() != grid.len() || c1dot.len() != grid.len() {
            return Err(Error::InvalidGrid("sample count differs from grid length".into()));
        }
        Ok(Self::assemble(grid, c1, c1dot, None))
    }

    fn assemble(grid: Vec<f64>, c1: Vec<Complex64>, c1dot: Vec<Complex64>, model: Option<ExponentialSum>) -> Self {
        let pop = c1.iter().map(|c| c.norm_sqr()).collect();
        let popdot = c1.iter().zip(&c1dot).map(|(c, d)| 2.0 * (c.conj() * d).re).collect();
        AmplitudeTrace { grid, c1, c1dot, pop, popdot, model }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().expect("grid is never empty")
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, len: self.len() })
        }
    }

    /// C₁ and Ċ₁ at any t in the grid span: exact from the model, otherwise
    /// cubic Hermite interpolation of the samples.
    pub fn amplitude_at(&self, t: f64) -> (Complex64, Complex64) {
        if let Some(m) = &self.model {
            return m.value_and_derivative(t);
        }
        let i = match self.grid.binary_search_by(|g| g.total_cmp(&t)) {
            Ok(i) => return (self.c1[i], self.c1dot[i]),
            Err(i) => i.clamp(1, self.len() - 1) - 1,
        };
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let h = t1 - t0;
        let x = (t - t0) / h;
        let (p0, p1) = (self.c1[i], self.c1[i + 1]);
        let (m0, m1) = (self.c1dot[i] * h, self.c1dot[i + 1] * h);
        let x2 = x * x;
        let x3 = x2 * x;
        let value = p0 * (2.0 * x3 - 3.0 * x2 + 1.0)
            + m0 * (x3 - 2.0 * x2 + x)
            + p1 * (-2.0 * x3 + 3.0 * x2)
            + m1 * (x3 - x2);
        let slope = (p0 * (6.0 * x2 - 6.0 * x) + m0 * (3.0 * x2 - 4.0 * x + 1.0) + p1 * (6.0 * x - 6.0 * x2) + m1 * (3.0 * x2 - 2.0 * x)) / h;
        (value, slope)
    }

    pub fn pop_at(&self, t: f64) -> f64 {
        if let Ok(i) = self.grid.binary_search_by(|g| g.total_cmp(&t)) {
            return self.pop[i];
        }
        self.amplitude_at(t).0.norm_sqr()
    }

    pub fn popdot_at(&self, t: f64) -> f64 {
        let (c, d) = self.amplitude_at(t);
        2.0 * (c.conj() * d).re
    }

    /// Number of strict sign changes of the sampled popdot.
    pub fn sign_changes(&self) -> usize {
        count_sign_changes(&self.popdot)
    }
}

fn count_sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in values {
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = v;
        }
    }
    count
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("need at least two samples".into()));
    }
    if grid[0] < 0.0 || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("samples must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("samples must be strictly increasing".into()));
    }
    Ok(())
}

/// `samples` points from 0 to `horizon` inclusive.
pub fn uniform_grid(horizon: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 || !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidGrid(format!("{samples} samples over horizon {horizon}")));
    }
    let n = samples - 1;
    let mut grid: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
    grid[n] = horizon;
    Ok(grid)
}

/// Closed-form model Σ w_k e^{s_k t}. A kernel with both amplitudes zero
/// (γ = 0 or τ₀ = 0) freezes the amplitude at one.
pub fn analytic_model(kp: &KernelParams) -> Result<ExponentialSum> {
    let [a0, a1] = closed_form_amplitudes(kp);
    if a0.norm() == 0.0 && a1.norm() == 0.0 {
        return Ok(ExponentialSum::frozen());
    }
    let roots = solve_cubic(kp)?;
    Ok(ExponentialSum::new(roots.residues.to_vec(), roots.roots.to_vec()))
}

/// C₁(t) = Σ w_k e^{s_k t} and Ċ₁(t) = Σ w_k s_k e^{s_k t} on `grid`.
pub fn amplitude_analytic(kp: &KernelParams, grid: &[f64]) -> Result<AmplitudeTrace> {
    AmplitudeTrace::from_model(analytic_model(kp)?, grid.to_vec())
}

/// Uniform analytic trace, refined ×4 until the popdot sign-change count
/// stops changing.
pub fn amplitude_analytic_refined(kp: &KernelParams, horizon: f64, samples: usize) -> Result<AmplitudeTrace> {
    let model = analytic_model(kp)?;
    let mut n = samples;
    let mut trace = AmplitudeTrace::from_model_uniform(model.clone(), horizon, n)?;
    while (n - 1) * REFINE_FACTOR < MAX_SAMPLES {
        let finer_n = (n - 1) * REFINE_FACTOR + 1;
        let finer = AmplitudeTrace::from_model_uniform(model.clone(), horizon, finer_n)?;
        let stable = finer.sign_changes() == trace.sign_changes();
        trace = finer;
        n = finer_n;
        if stable {
            break;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_kernel_params, EtaConvention, PhysicalParams};

    fn trace_for(p: PhysicalParams, n: usize) -> AmplitudeTrace {
        let kp = derive_kernel_params(&p, EtaConvention::Minus).unwrap();
        amplitude_analytic(&kp, &uniform_grid(p.horizon, n).unwrap()).unwrap()
    }

    #[test]
    fn starts_at_one() {
        let t = trace_for(PhysicalParams { drive: 5.0, ..Default::default() }, 512);
        assert_eq!(t.c1[0], Complex64::new(1.0, 0.0));
        assert_eq!(t.pop[0], 1.0);
        assert!(t.pop.iter().all(|&p| (0.0..=1.0 + 1e-6).contains(&p)));
    }

    #[test]
    fn zero_coupling_freezes_the_amplitude() {
        for p in [PhysicalParams { gamma: 0.0, ..Default::default() }, PhysicalParams { tau0: 0.0, ..Default::default() }] {
            let t = trace_for(p, 64);
            assert!(t.c1.iter().all(|&c| c == Complex64::new(1.0, 0.0)));
            assert!(t.popdot.iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn popdot_matches_finite_differences_to_second_order() {
        let p = PhysicalParams { lambda: 0.1, drive: 20.0, ..Default::default() };
        let kp = derive_kernel_params(&p, EtaConvention::Minus).unwrap();
        let model = analytic_model(&kp).unwrap();
        let t0 = 0.37;
        let err = |h: f64| ((model.pop(t0 + h) - model.pop(t0 - h)) / (2.0 * h) - model.popdot(t0)).abs();
        let (e1, e2) = (err(1e-3), err(1e-4));
        let order = (e1 / e2).log10();
        assert!(order > 1.9, "observed order {order}");
    }

    #[test]
    fn hermite_interpolation_reproduces_model() {
        let p = PhysicalParams { drive: 5.0, ..Default::default() };
        let full = trace_for(p, 2049);
        let mut bare = full.clone();
        bare.model = None;
        for k in 0..200 {
            let t = 0.0013 + k as f64 * 0.0049;
            let exact = full.amplitude_at(t);
            let interp = bare.amplitude_at(t);
            assert!((exact.0 - interp.0).norm() < 1e-10);
            assert!((exact.1 - interp.1).norm() < 1e-5);
        }
    }

    #[test]
    fn refinement_stabilises_sign_changes() {
        let p = PhysicalParams { lambda: 0.1, drive: 20.0, ..Default::default() };
        let kp = derive_kernel_params(&p, EtaConvention::Minus).unwrap();
        let t = amplitude_analytic_refined(&kp, 1.0, 256).unwrap();
        assert!(t.len() > 256);
        let coarser = amplitude_analytic(&kp, &uniform_grid(1.0, (t.len() - 1) / 4 + 1).unwrap()).unwrap();
        assert_eq!(t.sign_changes(), coarser.sign_changes());
        assert!(t.sign_changes() > 10);
    }

    #[test]
    fn uniform_sampling_matches_direct_evaluation() {
        let p = PhysicalParams { lambda: 0.1, drive: 20.0, beta: 2e-10, ..Default::default() };
        let kp = derive_kernel_params(&p, EtaConvention::Minus).unwrap();
        let model = analytic_model(&kp).unwrap();
        let fast = AmplitudeTrace::from_model_uniform(model.clone(), 1.0, 20001).unwrap();
        let direct = AmplitudeTrace::from_model(model, uniform_grid(1.0, 20001).unwrap()).unwrap();
        for i in 0..fast.len() {
            assert!((fast.c1[i] - direct.c1[i]).norm() < 1e-13);
            assert!((fast.c1dot[i] - direct.c1dot[i]).norm() < 1e-13 * direct.c1dot[i].norm().max(1.0) * 100.0);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let model = ExponentialSum::frozen();
        assert!(AmplitudeTrace::from_model(model.clone(), vec![0.0]).is_err());
        assert!(AmplitudeTrace::from_model(model.clone(), vec![0.0, 0.5, 0.5]).is_err());
        assert!(AmplitudeTrace::from_model(model, vec![-1.0, 0.5]).is_err());
        assert!(uniform_grid(0.0, 10).is_err());
        assert!(uniform_grid(1.0, 1).is_err());
    }

    #[test]
    fn sign_change_counting_skips_zeros() {
        assert_eq!(count_sign_changes(&[0.0, 1.0, 0.0, -1.0, -2.0, 3.0]), 2);
        assert_eq!(count_sign_changes(&[0.0, 0.0]), 0);
    }
}
