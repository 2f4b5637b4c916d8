//! Adaptive Gauss-Kronrod quadrature of complex integrands and the
//! truncated Lorentzian Fourier integral
//!
//! ```text
//! Φ(κ; a, b) = ∫ₐᵇ e^{iκx} / (1 + x²) dx
//! ```
//!
//! which is the building block of the memory-kernel oracle. The core of the
//! range is integrated in θ = atan x (the Lorentzian becomes flat), split
//! into panels whose phase advance κΔx is at most π/4. Beyond |x| = X with
//! |κ|X ≥ 100 the remaining oscillatory tails are summed by repeated
//! integration by parts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Value and absolute error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

/// One 21-point Kronrod panel; the error is |K21 − G10|.
pub fn gauss_kronrod21<F>(f: &F, a: f64, b: f64) -> Estimate
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Estimate { value: kronrod * half, error: ((kronrod - gauss) * half).norm() }
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive integration over consecutive `breakpoints`, bisecting
/// the panel with the largest error until the summed estimate is below
/// `abs_tol` or `max_panels` is exhausted.
pub fn integrate_adaptive<F>(f: &F, breakpoints: &[f64], abs_tol: f64, max_panels: usize) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    let mut heap = BinaryHeap::with_capacity(breakpoints.len() * 2);
    let mut total = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let est = gauss_kronrod21(f, w[0], w[1]);
        total += est.value;
        error += est.error;
        heap.push(Panel { a: w[0], b: w[1], est });
    }
    while error > abs_tol {
        if heap.len() >= max_panels {
            return Err(Error::QuadratureNotConverged { requested: abs_tol, estimate: error, panels: heap.len() });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in binary64.
            heap.push(worst);
            return Err(Error::QuadratureNotConverged { requested: abs_tol, estimate: error, panels: heap.len() });
        }
        let left = gauss_kronrod21(f, worst.a, mid);
        let right = gauss_kronrod21(f, mid, worst.b);
        total += left.value + right.value - worst.est.value;
        error += left.error + right.error - worst.est.error;
        heap.push(Panel { a: worst.a, b: mid, est: left });
        heap.push(Panel { a: mid, b: worst.b, est: right });
    }
    // Re-sum to shed the drift of the incremental updates.
    let (value, error) = heap
        .iter()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), p| (v + p.est.value, e + p.est.error));
    Ok(Estimate { value, error })
}

/// Options for [`lorentz_fourier`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierOptions {
    /// Absolute tolerance in units of ∫|integrand| ≤ π.
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions { rel_tol: 1e-11, max_panels: 200_000 }
    }
}

/// |κ|·X at which the tails switch to the asymptotic series.
const TAIL_PHASE: f64 = 100.0;
const TAIL_TERMS: usize = 8;
const MAX_PANEL_THETA: f64 = 0.1;

/// Φ(κ; a, b) = ∫ₐᵇ e^{iκx}/(1+x²) dx for −∞ ≤ a < b ≤ ∞.
pub fn lorentz_fourier(kappa: f64, a: f64, b: f64, opts: FourierOptions) -> Result<Estimate> {
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) || kappa.is_nan() {
        return Err(Error::InvalidGrid(format!("bad integration range [{a}, {b}] or kappa {kappa}")));
    }
    let reach = if kappa == 0.0 { f64::INFINITY } else { TAIL_PHASE / kappa.abs() };
    let lo = a.max(-reach);
    let hi = b.min(reach);

    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    if lo < hi {
        let core = integrate_core(kappa, lo, hi, opts)?;
        value += core.value;
        error += core.error;
    }
    if a < -reach {
        let tail = oscillatory_tail(kappa, a, b.min(-reach));
        value += tail.value;
        error += tail.error;
    }
    if b > reach {
        let tail = oscillatory_tail(kappa, a.max(reach), b);
        value += tail.value;
        error += tail.error;
    }
    Ok(Estimate { value, error })
}

fn integrate_core(kappa: f64, lo: f64, hi: f64, opts: FourierOptions) -> Result<Estimate> {
    let th_lo = lo.atan();
    let th_hi = hi.atan();
    // Panel edges: Δθ ≤ 0.1 and phase advance |κ|Δx ≤ π/4.
    let step_x = if kappa == 0.0 { f64::INFINITY } else { FRAC_PI_4 / kappa.abs() };
    let mut edges = vec![th_lo];
    let mut th = th_lo;
    while th < th_hi {
        let by_theta = th + MAX_PANEL_THETA;
        let by_phase = (th.tan() + step_x).atan();
        let next = by_theta.min(by_phase).min(th_hi);
        if next <= th {
            break;
        }
        edges.push(next);
        th = next;
    }
    if *edges.last().unwrap() < th_hi {
        edges.push(th_hi);
    }
    let integrand = |theta: f64| {
        let x = theta.tan();
        let (s, c) = (kappa * x).sin_cos();
        Complex64::new(c, s)
    };
    let span = (th_hi - th_lo).max(f64::MIN_POSITIVE);
    integrate_adaptive(&integrand, &edges, opts.rel_tol * span.max(1.0), opts.max_panels)
}

/// f⁽ⁿ⁾(x) for f = 1/(1+x²) = Im[1/(x − i)].
fn lorentz_derivative(n: usize, x: f64) -> f64 {
    let z = Complex64::new(x, -1.0);
    let mut factorial = 1.0;
    for k in 2..=n {
        factorial *= k as f64;
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    (sign * factorial / z.powi(n as i32 + 1)).im
}

/// ∫ₐᵇ e^{iκx}/(1+x²) dx for |κ|·min(|a|,|b|) ≥ 100 on one side of the
/// origin, by repeated integration by parts. Infinite limits contribute 0.
fn oscillatory_tail(kappa: f64, a: f64, b: f64) -> Estimate {
    let ik = Complex64::new(0.0, kappa);
    let boundary = |x: f64, n: usize| -> Complex64 {
        if x.is_infinite() {
            return Complex64::new(0.0, 0.0);
        }
        let (s, c) = (kappa * x).sin_cos();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(c, s) * sign * lorentz_derivative(n, x) / ik.powi(n as i32 + 1)
    };
    let mut value = Complex64::new(0.0, 0.0);
    for n in 0..TAIL_TERMS {
        value += boundary(b, n) - boundary(a, n);
    }
    let next = (boundary(b, TAIL_TERMS) - boundary(a, TAIL_TERMS)).norm();
    Estimate { value, error: next }
}

/// ∫_{−∞}^{∞} e^{iκx}/(1+x²) dx, the residue value π e^{−|κ|}.
pub fn lorentz_fourier_full_line(kappa: f64) -> f64 {
    std::f64::consts::PI * (-kappa.abs()).exp()
}
