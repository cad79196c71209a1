//! Adaptive Gauss–Kronrod integration of log-domain integrands.
//!
//! Integrands are given as `LogComplex` values so that factors such as
//! `(1 − i·erfi(t/√2))^p` never overflow. Each panel is exponentiated after
//! subtracting its own largest log-magnitude.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_complex::Complex64;

use crate::minimize::golden_section;
use crate::specialfn::LogComplex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Absolute tolerance in units of the integrand's peak magnitude.
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Relative size of the neglected tails of an infinite range.
    pub tail_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-10, abs_tol: 1e-14, max_subdivisions: 2000, tail_tol: 1e-16 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.tail_tol > 0.0
            && self.tail_tol < 1.0
            && self.max_subdivisions >= 1;
        if ok {
            Ok(())
        } else {
            Err(QuadratureError::InvalidConfig)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    /// Includes the absolute imaginary residual for complex integrands.
    pub error_bound: f64,
    pub evaluations: usize,
    /// `|Im ∫ f|` for complex integrands whose integral is known to be real.
    pub imag_residual: f64,
    /// `∫|f|`, the scale against which cancellation is judged.
    pub abs_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("no convergence after {subdivisions} subdivisions (value {value:e}, error {error:e})")]
    NonConvergence { subdivisions: usize, value: f64, error: f64 },
    #[error("integrand does not decay as promised: log|f({t})| = {log_magnitude}")]
    BadDecay { t: f64, log_magnitude: f64 },
    #[error("probability {value:e} outside [0, 1]")]
    RangeViolation { value: f64 },
    #[error("integrand returned a non-finite value at {t}")]
    NonFinite { t: f64 },
    #[error("invalid quadrature configuration")]
    InvalidConfig,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    re: f64,
    im: f64,
    err: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Largest error first; ties resolved by position so the order of
    // refinement is fully deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F>(f: &F, a: f64, b: f64) -> Result<Panel, QuadratureError>
where
    F: Fn(f64) -> LogComplex + ?Sized,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut vals = [LogComplex::ZERO; 15];
    for (j, &x) in XGK.iter().enumerate() {
        vals[j] = f(c - h * x);
        if j < 7 {
            vals[14 - j] = f(c + h * x);
        }
    }
    let mut shift = f64::NEG_INFINITY;
    for (j, v) in vals.iter().enumerate() {
        if v.log_magnitude.is_nan() || v.log_magnitude == f64::INFINITY || !v.phase.is_finite() {
            let x = if j < 8 { c - h * XGK[j] } else { c + h * XGK[14 - j] };
            return Err(QuadratureError::NonFinite { t: x });
        }
        shift = shift.max(v.log_magnitude);
    }
    if shift == f64::NEG_INFINITY {
        return Ok(Panel { a, b, re: 0.0, im: 0.0, err: 0.0, abs: 0.0 });
    }
    let pts: Vec<(f64, f64)> = vals.iter().map(|v| v.to_cartesian_shifted(shift)).collect();
    let at = |j: usize| -> [(f64, f64); 2] { [pts[j], pts[14 - j]] };

    let (mut kr, mut ki, mut gr, mut gi, mut kabs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..7 {
        let [p, q] = at(j);
        kr += WGK[j] * (p.0 + q.0);
        ki += WGK[j] * (p.1 + q.1);
        kabs += WGK[j] * (p.0.hypot(p.1) + q.0.hypot(q.1));
        if j % 2 == 1 {
            gr += WG[j / 2] * (p.0 + q.0);
            gi += WG[j / 2] * (p.1 + q.1);
        }
    }
    let mid = pts[7];
    kr += WGK[7] * mid.0;
    ki += WGK[7] * mid.1;
    kabs += WGK[7] * mid.0.hypot(mid.1);
    gr += WG[3] * mid.0;
    gi += WG[3] * mid.1;

    let scale = shift.exp() * h;
    let kabs = kabs * scale;
    // The Kronrod–Gauss difference is used unscaled; the usual smoothness
    // rescaling badly underestimates errors at kinks. Roundoff is accounted
    // for globally in `adaptive`.
    let err = (kr - gr).hypot(ki - gi) * scale;
    Ok(Panel { a, b, re: kr * scale, im: ki * scale, err, abs: kabs })
}

struct Raw {
    re: f64,
    im: f64,
    err: f64,
    abs: f64,
    evaluations: usize,
}

/// Globally adaptive integration of `e^{f}` over `[a, b]`, starting from
/// `initial_panels` equal panels.
fn adaptive<F>(
    f: &F,
    a: f64,
    b: f64,
    initial_panels: usize,
    log_scale: f64,
    cfg: &QuadratureConfig,
) -> Result<Raw, QuadratureError>
where
    F: Fn(f64) -> LogComplex + ?Sized,
{
    let n0 = initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(n0 + cfg.max_subdivisions);
    let width = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { a + width * (i + 1) as f64 };
        heap.push(gk15(f, lo, hi)?);
    }
    let mut evaluations = 15 * n0;
    let mut subdivisions = 0;
    loop {
        // Sum in a fixed order for reproducibility.
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let (mut re, mut im, mut err, mut abs) = (0.0, 0.0, 0.0, 0.0);
        for p in &panels {
            re += p.re;
            im += p.im;
            err += p.err;
            abs += p.abs;
        }
        let tol = (cfg.rel_tol * re.abs()).max(cfg.abs_tol * log_scale.exp());
        // Once the error is at the level of accumulated roundoff in Σ|f|
        // further bisection cannot help; the floor is then the error.
        let floor = 50.0 * f64::EPSILON * abs;
        if err <= tol.max(floor) {
            return Ok(Raw { re, im, err: err.max(floor), abs, evaluations });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(QuadratureError::NonConvergence { subdivisions, value: re, error: err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            return Err(QuadratureError::NonConvergence { subdivisions, value: re, error: err });
        }
        heap.push(gk15(f, worst.a, m)?);
        heap.push(gk15(f, m, worst.b)?);
        evaluations += 30;
        subdivisions += 1;
    }
}

/// Truncation point `T` for an integrand bounded by `e^{-decay·t²/2}`.
pub fn truncation_point(decay_rate: f64, log_inv_tol: f64) -> f64 {
    let mut t = (2.0 * log_inv_tol / decay_rate).sqrt();
    for _ in 0..2 {
        t = (2.0 * (log_inv_tol + t.max(1.0).ln()) / decay_rate).sqrt();
    }
    t
}

fn check_decay<F>(f: &F, t: f64, reference: f64, decay_rate: f64) -> Result<(), QuadratureError>
where
    F: Fn(f64) -> LogComplex + ?Sized,
{
    let v = f(t).log_magnitude;
    // Allow a generous polynomial prefactor on top of the Gaussian envelope.
    let envelope = reference.max(0.0) - 0.5 * decay_rate * t * t + 3.0 * t.abs().max(1.0).ln() + 5.0;
    if v.is_nan() || v > envelope {
        return Err(QuadratureError::BadDecay { t, log_magnitude: v });
    }
    Ok(())
}

/// Largest log-magnitude on a coarse grid of `[a, b]`.
fn sample_peak<F>(f: &F, a: f64, b: f64) -> f64
where
    F: Fn(f64) -> LogComplex + ?Sized,
{
    (0..=32)
        .map(|i| f(a + (b - a) * i as f64 / 32.0).log_magnitude)
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn integrate_truncated<F>(
    f: &F,
    decay_rate: f64,
    cfg: &QuadratureConfig,
    symmetric: bool,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> LogComplex + ?Sized,
{
    cfg.validate()?;
    if !(decay_rate > 0.0 && decay_rate.is_finite()) {
        return Err(QuadratureError::InvalidConfig);
    }
    let base = -cfg.tail_tol.ln();
    let mut t = truncation_point(decay_rate, base);
    let lo = |t: f64| if symmetric { -t } else { 0.0 };
    let peak = sample_peak(f, lo(t), t);
    check_decay(f, t, peak, decay_rate)?;
    if symmetric {
        check_decay(f, -t, peak, decay_rate)?;
    }
    let panels = if symmetric { 16 } else { 8 };
    let mut raw = adaptive(f, lo(t), t, panels, peak, cfg)?;
    let mut evaluations = raw.evaluations + 33;
    // The tail bound is relative to the envelope `e^{max(peak,0)}`; if the
    // integral is much smaller than that, widen the range.
    for _ in 0..3 {
        if raw.re == 0.0 {
            break;
        }
        let deficit = peak.max(0.0) - raw.re.abs().ln();
        if deficit <= 1.0 {
            break;
        }
        let wider = truncation_point(decay_rate, base + deficit);
        if wider <= t * (1.0 + 1e-9) {
            break;
        }
        t = wider;
        check_decay(f, t, peak, decay_rate)?;
        if symmetric {
            check_decay(f, -t, peak, decay_rate)?;
        }
        raw = adaptive(f, lo(t), t, panels, peak, cfg)?;
        evaluations += raw.evaluations;
    }
    Ok(IntegralResult {
        value: raw.re,
        error_bound: raw.err + raw.im.abs(),
        evaluations,
        imag_residual: raw.im.abs(),
        abs_integral: raw.abs,
    })
}

/// `Re ∫ℝ e^{f(t)} dt`, where `|e^{f(t)}|` decays like `e^{-decay_rate·t²/2}`.
///
/// The imaginary part of the integral is returned as `imag_residual` and is
/// also added to `error_bound`.
pub fn integrate_line<F>(
    integrand: F,
    decay_rate: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> LogComplex,
{
    integrate_truncated(&integrand, decay_rate, cfg, true)
}

/// `∫₀^∞ e^{f(g)} dg` for a real log-integrand `f`.
pub fn integrate_halfline<F>(
    integrand: F,
    decay_rate: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let g = |x: f64| LogComplex::from_log(integrand(x));
    integrate_truncated(&g, decay_rate, cfg, false)
}

/// `Re ∫₀^∞ e^{f(g)} dg` for a complex (or sign-changing) log-integrand.
pub fn integrate_halfline_complex<F>(
    integrand: F,
    decay_rate: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> LogComplex,
{
    integrate_truncated(&integrand, decay_rate, cfg, false)
}

/// `Re ∫_a^b e^{f(t)} dt` over a finite interval.
pub fn integrate_range<F>(
    integrand: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> LogComplex,
{
    cfg.validate()?;
    let peak = sample_peak(&integrand, a, b);
    let raw = adaptive(&integrand, a, b, 4, peak, cfg)?;
    Ok(IntegralResult {
        value: raw.re,
        error_bound: raw.err + raw.im.abs(),
        evaluations: raw.evaluations,
        imag_residual: raw.im.abs(),
        abs_integral: raw.abs,
    })
}

const CF_SMALL_T: f64 = 1e-6;
const CLAMP_SLACK: f64 = 1e-12;

/// Clamps a probability computed with small numerical slack into `[0, 1]`.
pub fn clamp_probability(value: f64) -> Result<f64, QuadratureError> {
    if !value.is_finite() || !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&value) {
        return Err(QuadratureError::RangeViolation { value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// `P(X ≥ 0)` for a continuous `X` with characteristic function
/// `exp(log_cf(t))` and mean `mean`, by Gil-Pelaez inversion
/// `1/2 + (1/π)∫₀^∞ Im[φ(t)]/t dt`.
///
/// `decay_rate` bounds `|φ(t)|` by `e^{-decay_rate·t²/2}`.
pub fn prob_nonneg_from_cf<F>(
    log_cf: F,
    mean: f64,
    decay_rate: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult, QuadratureError>
where
    F: Fn(f64) -> LogComplex,
{
    let h = |t: f64| {
        if t < CF_SMALL_T {
            LogComplex::from_real(mean)
        } else {
            LogComplex::from_real(log_cf(t).im() / t)
        }
    };
    let r = integrate_truncated(&h, decay_rate, cfg, false)?;
    let value = clamp_probability(0.5 + r.value / PI)?;
    Ok(IntegralResult { value, error_bound: r.error_bound / PI, abs_integral: r.abs_integral / PI, ..r })
}

/// A probability together with its logarithm, which keeps full relative
/// precision when the value itself would underflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProbability {
    pub value: f64,
    pub log_value: f64,
    pub error_bound: f64,
    pub evaluations: usize,
}

/// `P(X > 0)` for a continuous `X` whose moment generating function
/// `M(s) = exp(log_mgf(s))` is finite for `Re s > 0`.
///
/// Inverts along the vertical line `Re s = c`,
/// `P = (1/2π) ∫ Re[M(c+iy)/(c+iy)] dy`, with `c` at the minimum of
/// `ln M(c) − ln c` so the integrand has no cancellation to speak of even
/// when `P` is tiny. `decay_rate` bounds `|M(c+iy)|` by `e^{-decay_rate·y²/2}`.
pub fn prob_nonneg_from_mgf<F>(
    log_mgf: F,
    decay_rate: f64,
    cfg: &QuadratureConfig,
) -> Result<LogProbability, QuadratureError>
where
    F: Fn(Complex64) -> LogComplex,
{
    let phi = |x: f64| {
        let c = x.exp();
        log_mgf(Complex64::new(c, 0.0)).log_magnitude - x
    };
    let (x, phi_min) = golden_section(phi, -12.0, 8.0, 1e-10, 200);
    if !phi_min.is_finite() {
        return Err(QuadratureError::NonFinite { t: 0.0 });
    }
    let c = x.exp();
    let f = |y: f64| {
        let s = Complex64::new(c, y);
        let m = log_mgf(s);
        LogComplex::new(m.log_magnitude - s.norm().ln() - phi_min, m.phase - s.arg())
    };
    let r = integrate_truncated(&f, decay_rate, cfg, true)?;
    if !(r.value > 0.0) {
        return Err(QuadratureError::RangeViolation { value: r.value });
    }
    let log_scale = phi_min - (2.0 * PI).ln();
    let log_value = log_scale + r.value.ln();
    let value = clamp_probability(log_value.exp())?;
    Ok(LogProbability {
        value,
        log_value: log_value.min(0.0),
        error_bound: (log_scale.exp()) * r.error_bound,
        evaluations: r.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::log_one_minus_i_erfi;
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn gauss(a: f64) -> impl Fn(f64) -> LogComplex {
        move |t| LogComplex::from_log(-a * t * t)
    }

    #[test]
    fn gaussian_normalisation() {
        let r = integrate_line(gauss(0.5), 1.0, &cfg()).unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-10);
        let r = integrate_line(gauss(2.0), 4.0, &cfg()).unwrap();
        assert!((r.value - (PI / 2.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn half_gaussian() {
        let r = integrate_halfline(|g| -0.5 * g * g, 1.0, &cfg()).unwrap();
        assert!((r.value - (2.0 * PI).sqrt() / 2.0).abs() < 1e-10);
        let r = integrate_halfline(|g| -0.5 * g * g - 3.0 * 2f64.ln(), 1.0, &cfg()).unwrap();
        assert!((r.value - (2.0 * PI).sqrt() / 16.0).abs() < 1e-11);
    }

    #[test]
    fn ray_internal_angle_integral() {
        // (1 − i·erfi(t/√2))·e^{−t²}: the odd imaginary part integrates to 0.
        let f = |t: f64| log_one_minus_i_erfi(t) * LogComplex::from_log(-t * t);
        let r = integrate_line(f, 1.0, &cfg()).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-10);
        assert!(r.imag_residual < 1e-10);
    }

    #[test]
    fn bad_decay_is_reported() {
        let f = |t: f64| LogComplex::from_log(-0.01 * t * t);
        assert!(matches!(integrate_line(f, 1.0, &cfg()), Err(QuadratureError::BadDecay { .. })));
    }

    #[test]
    fn subdivision_budget_is_enforced() {
        let tight = QuadratureConfig { max_subdivisions: 1, rel_tol: 1e-15, ..cfg() };
        let f = |t: f64| LogComplex::from_real((40.0 * t).cos()) * LogComplex::from_log(-0.5 * t * t);
        assert!(matches!(
            integrate_line(f, 1.0, &tight),
            Err(QuadratureError::NonConvergence { .. })
        ));
    }

    #[test]
    fn gil_pelaez_normal() {
        let r = prob_nonneg_from_cf(|t| LogComplex::from_log(-0.5 * t * t), 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        // Z − 1: P(Z ≥ 1) = erfc(1/√2)/2
        let cf = |t: f64| LogComplex::new(-0.5 * t * t, -t);
        let r = prob_nonneg_from_cf(cf, -1.0, 1.0, &cfg()).unwrap();
        let want = 0.5 * libm::erfc(std::f64::consts::FRAC_1_SQRT_2);
        assert!((want - 0.158_655_253_9).abs() < 1e-10);
        assert!((r.value - want).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn gil_pelaez_half_normal_plus_normal() {
        // X = |Z₁| + Z₂: X < 0 is the 90° wedge Z₂ < −|Z₁|, so P(X ≥ 0) = 3/4.
        let cf = |t: f64| log_one_minus_i_erfi(t).conj() * LogComplex::from_log(-t * t);
        let r = prob_nonneg_from_cf(cf, (2.0 / PI).sqrt(), 1.0, &cfg()).unwrap();
        assert!((r.value - 0.75).abs() < 1e-10, "{}", r.value);
    }

    fn normal_mgf(mu: f64, sigma: f64) -> impl Fn(Complex64) -> LogComplex {
        move |s: Complex64| {
            let e = s * mu + s * s * (0.5 * sigma * sigma);
            LogComplex::new(e.re, e.im)
        }
    }

    #[test]
    fn mgf_inversion_normal_tails() {
        for &mu in &[1.0, 0.0, -1.0, -8.0, -30.0] {
            let r = prob_nonneg_from_mgf(normal_mgf(mu, 1.0), 1.0, &cfg()).unwrap();
            let want = crate::specialfn::half_erfc_neg_log(mu / std::f64::consts::SQRT_2);
            assert!((r.log_value - want).abs() < 1e-10, "mu={mu}: {} vs {want}", r.log_value);
        }
    }

    #[test]
    fn clamping() {
        assert_eq!(clamp_probability(-1e-13).unwrap(), 0.0);
        assert_eq!(clamp_probability(1.0 + 1e-13).unwrap(), 1.0);
        assert!(clamp_probability(-1e-9).is_err());
        assert!(clamp_probability(f64::NAN).is_err());
    }

    #[test]
    fn finite_range() {
        let r = integrate_range(|x| LogComplex::from_real(x * x), 0.0, 3.0, &cfg()).unwrap();
        assert!((r.value - 9.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_subdivisions_is_stable() {
        let f = |t: f64| log_one_minus_i_erfi(t).powf(7.0) * LogComplex::from_log(-4.5 * t * t);
        let a = integrate_line(f, 2.0, &cfg()).unwrap();
        let big = QuadratureConfig { max_subdivisions: 4000, ..cfg() };
        let b = integrate_line(f, 2.0, &big).unwrap();
        assert!((a.value - b.value).abs() <= a.error_bound.max(1e-15));
    }

    proptest! {
        #[test]
        fn even_line_is_twice_halfline(a in 0.1f64..5.0, c in -3.0f64..3.0) {
            let f = move |t: f64| c * t * t / (1.0 + t * t) + t.cos() - a * t * t;
            let line = integrate_line(move |t| LogComplex::from_log(f(t)), 2.0 * a, &cfg()).unwrap();
            let half = integrate_halfline(f, 2.0 * a, &cfg()).unwrap();
            let tol = line.error_bound + 2.0 * half.error_bound + 1e-12 * line.value;
            prop_assert!((line.value - 2.0 * half.value).abs() <= tol);
        }

        #[test]
        fn mgf_inversion_matches_normal_cdf(mu in -20.0f64..5.0, sigma in 0.3f64..3.0) {
            let r = prob_nonneg_from_mgf(normal_mgf(mu, sigma), sigma * sigma, &cfg()).unwrap();
            let want = crate::specialfn::half_erfc_neg_log(mu / (sigma * std::f64::consts::SQRT_2));
            prop_assert!((r.log_value - want).abs() < 1e-9 * want.abs().max(1.0));
        }

        #[test]
        fn symmetric_cf_gives_one_half(s in 0.2f64..4.0) {
            let cf = move |t: f64| LogComplex::from_log(-0.5 * s * s * t * t);
            let r = prob_nonneg_from_cf(cf, 0.0, s * s, &cfg()).unwrap();
            prop_assert!((r.value - 0.5).abs() < 1e-10);
        }
    }
}
