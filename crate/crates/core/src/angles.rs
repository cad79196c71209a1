//! Internal and external angles of the cones and polytopes whose faces
//! enter the failure probabilities.
//!
//! Every angle is a one-dimensional integral. Internal angles of the
//! `F₁`-type faces integrate `(1 − i·erfi(t/√2))^{l−k+1}` against a Gaussian,
//! the `F₂`-type and full-cone angles are nonnegativity probabilities of a sum
//! of normals and half-normals, and external angles are Gaussian integrals of
//! powers of `erf`/`erfc`.
//!
//! On the real line the internal-angle integrands oscillate and cancel down
//! to roughly `2^{-l}` of their size, so [`internal_type1`],
//! [`internal_type2`] and [`internal_full_cone`] integrate along contours
//! through the real saddle point instead, where the integrand is essentially
//! positive. [`internal_simplex`] and [`internal_type2_cf`] keep the
//! real-line forms and serve as cross-checks for moderate `l`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::sync::RwLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minimize::bisect;
use crate::quadrature::{
    integrate_halfline, integrate_halfline_complex, integrate_line, prob_nonneg_from_cf,
    prob_nonneg_from_mgf, QuadratureConfig, QuadratureError,
};
use crate::specialfn::{
    erf_log, erfcx, erfcx_complex, erfi_log, half_erfc_neg_log, log_one_minus_i_erfi, LogComplex,
};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_PI: f64 = 1.144_729_885_849_400_2;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const CLAMP_SLACK: f64 = 1e-12;
// Relative error of one evaluation of the error-function kernels. Raising
// to the power p multiplies it by p.
const KERNEL_REL_ERR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AngleKind {
    InternalType1,
    InternalType2,
    InternalFullCone,
    InternalSimplex,
    ExternalPosType1,
    ExternalPosType2,
    ExternalStdType1,
    ExternalSimplex,
    ExternalCrosspolytope,
}

impl AngleKind {
    pub const ALL: [AngleKind; 9] = [
        AngleKind::InternalType1,
        AngleKind::InternalType2,
        AngleKind::InternalFullCone,
        AngleKind::InternalSimplex,
        AngleKind::ExternalPosType1,
        AngleKind::ExternalPosType2,
        AngleKind::ExternalStdType1,
        AngleKind::ExternalSimplex,
        AngleKind::ExternalCrosspolytope,
    ];

    /// Whether the angle is indexed by `(k, l)` rather than `(l, n)`.
    pub fn is_internal(self) -> bool {
        matches!(
            self,
            AngleKind::InternalType1
                | AngleKind::InternalType2
                | AngleKind::InternalFullCone
                | AngleKind::InternalSimplex
        )
    }
}

/// Face families of the cones `C⁺_w`, `C_w` and of the simplex and
/// crosspolytope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaceFamily {
    PosType1,
    PosType2,
    StdType1,
    FullCone,
    SimplexFace,
    CrosspolytopeFace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceIndex {
    pub k: u32,
    pub l: u32,
    pub n: u32,
    pub family: FaceFamily,
}

impl FaceIndex {
    pub fn new(family: FaceFamily, k: u32, l: u32, n: u32) -> Result<Self, AngleError> {
        let idx = FaceIndex { k, l, n, family };
        let base = k >= 1 && k <= n && l + 1 >= k && l <= n;
        let ok = base
            && match family {
                FaceFamily::PosType1 | FaceFamily::StdType1 => l < n,
                FaceFamily::PosType2 => l >= k,
                FaceFamily::FullCone => l == n,
                FaceFamily::SimplexFace => l < n,
                FaceFamily::CrosspolytopeFace => true,
            };
        if ok {
            Ok(idx)
        } else {
            Err(AngleError::InvalidIndex { what: "face index", k, l, n })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleValue {
    pub value: f64,
    /// `ln value`, accurate even where `value` underflows.
    pub log_value: f64,
    pub error_bound: f64,
}

impl AngleValue {
    pub fn exact(value: f64) -> Self {
        AngleValue { value, log_value: value.ln(), error_bound: 0.0 }
    }

    /// `error_bound / value`, infinite for a zero value.
    pub fn rel_error(&self) -> f64 {
        if self.error_bound == 0.0 {
            0.0
        } else {
            self.error_bound / self.value
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AngleError {
    #[error("invalid {what} (k={k}, l={l}, n={n})")]
    InvalidIndex { what: &'static str, k: u32, l: u32, n: u32 },
    #[error("angle {value:e} outside [0, 1]")]
    OutOfRange { value: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Normalisation used for the one-dimensional external-angle integrals of
/// the positive and standard cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ExternalPrefactor {
    /// `1/√(2π)`, the density of one Gaussian coordinate.
    #[default]
    Gaussian,
    /// `1/(2π)^{l/2}`. Dimensionally wrong; kept so tests can check that the
    /// tables detect it.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AngleConfig {
    pub quadrature: QuadratureConfig,
    pub external_prefactor: ExternalPrefactor,
}

fn checked(value: f64, error_bound: f64) -> Result<AngleValue, AngleError> {
    if !value.is_finite() || !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&value) {
        return Err(AngleError::OutOfRange { value });
    }
    let value = value.clamp(0.0, 1.0);
    Ok(AngleValue { value, log_value: value.ln(), error_bound })
}

fn checked_log(log_value: f64, rel_error: f64) -> Result<AngleValue, AngleError> {
    if log_value.is_nan() || log_value > CLAMP_SLACK {
        return Err(AngleError::OutOfRange { value: log_value.exp() });
    }
    let log_value = log_value.min(0.0);
    let value = log_value.exp();
    Ok(AngleValue { value, log_value, error_bound: value * rel_error })
}

fn invalid(what: &'static str, k: u32, l: u32, n: u32) -> AngleError {
    AngleError::InvalidIndex { what, k, l, n }
}

/// Real saddle `u*` of `p·ln erfc(u) + (l+1)·u²`, the root of
/// `(l+1)·u·erfcx(u) = p/√π`.
fn type1_saddle(p: f64, lp1: f64) -> f64 {
    let g = |u: f64| lp1 * u * erfcx(u) - p * FRAC_1_SQRT_PI;
    let mut hi = 1.0;
    while g(hi) < 0.0 && hi < 1e6 {
        hi *= 2.0;
    }
    bisect(g, 0.0, hi, 200)
}

/// Internal angle of `F₁` (equivalently of `T^{(k−1)}` in `T^{(l)}`).
///
/// With `1 − i·erfi(t/√2) = erfc(it/√2)` the integrand is analytic, and the
/// line `t = √2·(s − i·u*)` runs through the saddle. There the angle is
/// `√(l+1)/(2^p·√π) · ∫ erfcx(u*+is)^p · e^{k(u*+is)²} ds`.
pub fn internal_type1(k: u32, l: u32, q: &QuadratureConfig) -> Result<AngleValue, AngleError> {
    if k == 0 || l + 1 < k {
        return Err(invalid("internal type-1 angle", k, l, 0));
    }
    let p = (l + 1 - k) as f64;
    if p == 0.0 {
        return Ok(AngleValue::exact(1.0));
    }
    let lp1 = (l + 1) as f64;
    let kf = k as f64;
    let u = type1_saddle(p, lp1);
    let peak = p * erfcx(u).ln() + kf * u * u;
    let f = |s: f64| {
        let w = erfcx_complex(Complex64::new(u, s));
        LogComplex::new(
            p * w.norm().ln() + kf * (u * u - s * s) - peak,
            p * w.arg() + 2.0 * kf * u * s,
        )
    };
    let r = integrate_line(f, 2.0 * kf, q)?;
    if !(r.value > 0.0) {
        return Err(AngleError::OutOfRange { value: r.value });
    }
    let log_value = 0.5 * lp1.ln() - p * LN_2 - 0.5 * LN_PI + peak + r.value.ln();
    let rel = (r.error_bound + p * KERNEL_REL_ERR * r.abs_integral) / r.value;
    checked_log(log_value, rel)
}

/// `ln(1 + i·erfi(λ/√2))`, built from `ln|erfi|` without going through
/// [`log_one_minus_i_erfi`].
fn log_one_plus_i_erfi(lambda: f64) -> LogComplex {
    let (la, sign) = erfi_log(lambda * std::f64::consts::FRAC_1_SQRT_2);
    if sign == 0.0 {
        return LogComplex::ONE;
    }
    let (mag, phase) = if la < 0.0 {
        let e = la.exp();
        (0.5 * (e * e).ln_1p(), e.atan())
    } else {
        let inv = (-la).exp();
        (la + 0.5 * (inv * inv).ln_1p(), std::f64::consts::FRAC_PI_2 - inv.atan())
    };
    LogComplex::new(mag, sign * phase)
}

/// Internal angle `φint(T^{(k−1)}, T^{(l)})` of the regular simplex.
///
/// Same value as [`internal_type1`], computed from the conjugate integrand on
/// the real half-line: the real part `|1+i·erfi|^p·cos(p·arg)` is even. The
/// cancellation in this form grows like `2^l`, which the error bound
/// reflects; it is accurate to about `1e-13` absolute up to `l ≈ 40`.
pub fn internal_simplex(k: u32, l: u32, q: &QuadratureConfig) -> Result<AngleValue, AngleError> {
    if k == 0 || l + 1 < k {
        return Err(invalid("simplex internal angle", k, l, 0));
    }
    let p = (l + 1 - k) as f64;
    if p == 0.0 {
        return Ok(AngleValue::exact(1.0));
    }
    let lp1 = (l + 1) as f64;
    let f = |x: f64| {
        let z = log_one_plus_i_erfi(x);
        let c = (p * z.phase).cos();
        LogComplex::from_real(c).scale_log(p * z.log_magnitude - 0.5 * lp1 * x * x)
    };
    let r = integrate_halfline_complex(f, k as f64, q)?;
    let pre = 2.0 * (0.5 * lp1.ln() - p * LN_2 - 0.5 * LN_2PI).exp();
    let err = r.error_bound + p * KERNEL_REL_ERR * r.abs_integral;
    checked(pre * r.value, pre * err)
}

/// `ln P(X ≥ 0)` and its relative error for
/// `X = −(Z₁+…+Z_k) − (|Z_{k+1}|+…+|Z_l|)`.
///
/// `E e^{sX} = e^{k s²/2}·erfcx(s/√2)^{l−k}`, inverted along a vertical line.
fn prob_halfnormal_sum(k: u32, l: u32, q: &QuadratureConfig) -> Result<(f64, f64), AngleError> {
    if k == l {
        return Ok((-LN_2, 0.0));
    }
    let h = (l - k) as f64;
    let half_k = 0.5 * k as f64;
    let log_mgf = |s: Complex64| {
        let w = erfcx_complex(s * FRAC_1_SQRT_2);
        let e = s * s * half_k;
        LogComplex::new(e.re + h * w.norm().ln(), e.im + h * w.arg())
    };
    let r = prob_nonneg_from_mgf(log_mgf, k as f64, q)?;
    Ok((r.log_value, (r.error_bound / r.value) + h * KERNEL_REL_ERR))
}

/// Internal angle of `F₂`: `2^{−(l−k)}·P(X ≥ 0)`.
pub fn internal_type2(k: u32, l: u32, q: &QuadratureConfig) -> Result<AngleValue, AngleError> {
    if k == 0 || l < k {
        return Err(invalid("internal type-2 angle", k, l, 0));
    }
    let (lp, rel) = prob_halfnormal_sum(k, l, q)?;
    checked_log(lp - (l - k) as f64 * LN_2, rel)
}

/// [`internal_type2`] by Gil-Pelaez inversion of the characteristic function
/// on the real line. Absolute accuracy is about `1e-13`, so this loses
/// relative accuracy once the angle is small.
pub fn internal_type2_cf(k: u32, l: u32, q: &QuadratureConfig) -> Result<AngleValue, AngleError> {
    if k == 0 || l < k {
        return Err(invalid("internal type-2 angle", k, l, 0));
    }
    if k == l {
        return Ok(AngleValue::exact(0.5));
    }
    let h = (l - k) as f64;
    let lf = l as f64;
    let cf = |t: f64| log_one_minus_i_erfi(t).powf(h).scale_log(-0.5 * lf * t * t);
    let mean = -h * (2.0 / PI).sqrt();
    let r = prob_nonneg_from_cf(cf, mean, k as f64, q)?;
    let s = (-h * LN_2).exp();
    checked(s * r.value, s * (r.error_bound + h * KERNEL_REL_ERR * r.abs_integral))
}

/// Internal angle at the apex of the full cone `C_w`, which is
/// `P(X ≥ 0)` with `n` in place of `l`. No `2^{−(n−k)}` factor: the `2^{n−k}`
/// sign patterns of the half-normal coordinates fill the cone.
pub fn internal_full_cone(k: u32, n: u32, q: &QuadratureConfig) -> Result<AngleValue, AngleError> {
    if k == 0 || n < k {
        return Err(invalid("full-cone internal angle", k, n, n));
    }
    let (lp, rel) = prob_halfnormal_sum(k, n, q)?;
    checked_log(lp, rel)
}

fn external_prefactor_log(l: u32, kind: ExternalPrefactor) -> f64 {
    match kind {
        ExternalPrefactor::Gaussian => -0.5 * LN_2PI,
        ExternalPrefactor::Printed => -0.5 * l as f64 * LN_2PI,
    }
}

/// External angle of `F₁` in `C⁺_w`.
pub fn external_pos_type1(l: u32, n: u32, cfg: &AngleConfig) -> Result<AngleValue, AngleError> {
    if l >= n {
        return Err(invalid("positive type-1 external angle", 0, l, n));
    }
    let e = (n - l - 1) as f64;
    let s = 1.0 / (2.0 * (l + 1) as f64).sqrt();
    let f = |g: f64| -0.5 * g * g + if e == 0.0 { 0.0 } else { e * half_erfc_neg_log(g * s) };
    let r = integrate_halfline(f, 1.0, &cfg.quadrature)?;
    let pre = external_prefactor_log(l, cfg.external_prefactor).exp();
    checked(pre * r.value, pre * r.error_bound)
}

/// External angle of `F₂` in `C⁺_w`, exactly `2^{−(n−l)}`.
pub fn external_pos_type2(l: u32, n: u32) -> Result<AngleValue, AngleError> {
    if l > n {
        return Err(invalid("positive type-2 external angle", 0, l, n));
    }
    Ok(AngleValue::exact((-((n - l) as f64) * LN_2).exp()))
}

/// External angle of `F₁` in `C_w`.
pub fn external_std_type1(l: u32, n: u32, cfg: &AngleConfig) -> Result<AngleValue, AngleError> {
    if l >= n {
        return Err(invalid("standard type-1 external angle", 0, l, n));
    }
    let e = (n - l - 1) as f64;
    let s = 1.0 / (2.0 * (l + 1) as f64).sqrt();
    let f = |g: f64| -0.5 * g * g + if e == 0.0 { 0.0 } else { e * erf_log(g * s) };
    let r = integrate_halfline(f, 1.0, &cfg.quadrature)?;
    let pre = external_prefactor_log(l, cfg.external_prefactor).exp();
    checked(pre * r.value, pre * r.error_bound)
}

/// External angle `φext(T^{(l)}, C^{(n)})` of the crosspolytope.
pub fn external_crosspolytope(l: u32, n: u32, q: &QuadratureConfig) -> Result<AngleValue, AngleError> {
    if l >= n {
        return Err(invalid("crosspolytope external angle", 0, l, n));
    }
    let e = (n - l - 1) as f64;
    let lp1 = (l + 1) as f64;
    let f = |x: f64| -lp1 * x * x + if e == 0.0 { 0.0 } else { e * erf_log(x) };
    let r = integrate_halfline(f, 2.0 * lp1, q)?;
    let pre = (lp1 / PI).sqrt();
    checked(pre * r.value, pre * r.error_bound)
}

/// External angle `φext(T^{(l)}, T^{(n−1)})` of the regular simplex.
pub fn external_simplex(l: u32, n: u32, q: &QuadratureConfig) -> Result<AngleValue, AngleError> {
    if l >= n {
        return Err(invalid("simplex external angle", 0, l, n));
    }
    let e = (n - l - 1) as f64;
    let lp1 = (l + 1) as f64;
    let f = |x: f64| {
        LogComplex::from_log(-lp1 * x * x + if e == 0.0 { 0.0 } else { e * half_erfc_neg_log(x) })
    };
    let r = integrate_line(f, 2.0 * lp1, q)?;
    let pre = (lp1 / PI).sqrt();
    checked(pre * r.value, pre * r.error_bound)
}

type CacheKey = (AngleKind, u32, u32);

/// Memoising angle evaluator.
///
/// Internal angles are keyed by `(k, l)` and external ones by `(l, n)`, so a
/// single engine can be shared across problem sizes.
#[derive(Debug, Default)]
pub struct Angles {
    cfg: AngleConfig,
    cache: RwLock<HashMap<CacheKey, AngleValue>>,
}

impl Angles {
    pub fn new(cfg: AngleConfig) -> Self {
        Angles { cfg, cache: RwLock::new(HashMap::new()) }
    }

    pub fn config(&self) -> &AngleConfig {
        &self.cfg
    }

    /// Evaluates `kind` at `(a, b)`: `(k, l)` for internal angles (`(k, n)`
    /// for the full cone) and `(l, n)` for external ones.
    pub fn get(&self, kind: AngleKind, a: u32, b: u32) -> Result<AngleValue, AngleError> {
        let key = (kind, a, b);
        if let Some(v) = self.cache.read().expect("angle cache poisoned").get(&key) {
            return Ok(*v);
        }
        let q = &self.cfg.quadrature;
        let v = match kind {
            AngleKind::InternalType1 => internal_type1(a, b, q),
            AngleKind::InternalType2 => internal_type2(a, b, q),
            AngleKind::InternalFullCone => internal_full_cone(a, b, q),
            AngleKind::InternalSimplex => internal_simplex(a, b, q),
            AngleKind::ExternalPosType1 => external_pos_type1(a, b, &self.cfg),
            AngleKind::ExternalPosType2 => external_pos_type2(a, b),
            AngleKind::ExternalStdType1 => external_std_type1(a, b, &self.cfg),
            AngleKind::ExternalSimplex => external_simplex(a, b, q),
            AngleKind::ExternalCrosspolytope => external_crosspolytope(a, b, q),
        }?;
        self.cache.write().expect("angle cache poisoned").insert(key, v);
        Ok(v)
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().expect("angle cache poisoned").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn close(a: AngleValue, want: f64, tol: f64) {
        assert!((a.value - want).abs() <= tol, "{} vs {want}", a.value);
    }

    #[test]
    fn trivial_internal_angles() {
        for k in 1..6 {
            assert_eq!(internal_type1(k, k - 1, &q()).unwrap().value, 1.0);
            assert_eq!(internal_simplex(k, k - 1, &q()).unwrap().value, 1.0);
            assert_eq!(internal_type2(k, k, &q()).unwrap().value, 0.5);
            assert_eq!(internal_full_cone(k, k, &q()).unwrap().value, 0.5);
        }
        close(internal_type1(1, 1, &q()).unwrap(), 0.5, 1e-12);
    }

    #[test]
    fn regular_simplex_solid_angles() {
        // Vertex of an equilateral triangle: 60° of 360°.
        close(internal_type1(1, 2, &q()).unwrap(), 1.0 / 6.0, 1e-11);
        // Edge of a regular tetrahedron: dihedral angle arccos(1/3).
        close(internal_type1(2, 3, &q()).unwrap(), (1.0f64 / 3.0).acos() / (2.0 * PI), 1e-11);
        // Vertex of a regular tetrahedron: solid angle arccos(23/27) of 4π.
        close(internal_simplex(1, 3, &q()).unwrap(), (23.0f64 / 27.0).acos() / (4.0 * PI), 1e-11);
    }

    #[test]
    fn wedge_angles() {
        // {w₂ ≥ 0, −w₁ ≥ w₂} is a 45° wedge; the full cone {−w₁ ≥ |w₂|} is 90°.
        close(internal_type2(1, 2, &q()).unwrap(), 0.125, 1e-11);
        close(internal_full_cone(1, 2, &q()).unwrap(), 0.25, 1e-11);
    }

    #[test]
    fn trivial_external_angles() {
        let c = AngleConfig::default();
        for n in 2..10 {
            close(external_pos_type1(n - 1, n, &c).unwrap(), 0.5, 1e-12);
            close(external_std_type1(n - 1, n, &c).unwrap(), 0.5, 1e-12);
            close(external_crosspolytope(n - 1, n, &q()).unwrap(), 0.5, 1e-12);
            close(external_simplex(n - 1, n, &q()).unwrap(), 1.0, 1e-12);
            assert_eq!(external_pos_type2(n, n).unwrap().value, 1.0);
            assert_eq!(external_pos_type2(n - 1, n).unwrap().value, 0.5);
        }
        assert_eq!(external_pos_type2(3, 8).unwrap().value, 1.0 / 32.0);
    }

    #[test]
    fn polytope_external_angles_from_dihedral_angles() {
        // External angle at a ridge is (π − dihedral)/(2π).
        close(external_simplex(0, 2, &q()).unwrap(), 0.5, 1e-12);
        close(external_simplex(0, 3, &q()).unwrap(), 1.0 / 3.0, 1e-11);
        let tet = (PI - (1.0f64 / 3.0).acos()) / (2.0 * PI);
        close(external_simplex(1, 4, &q()).unwrap(), tet, 1e-11);
        close(external_crosspolytope(0, 2, &q()).unwrap(), 0.25, 1e-12);
        let oct = (PI - (-1.0f64 / 3.0).acos()) / (2.0 * PI);
        close(external_crosspolytope(1, 3, &q()).unwrap(), oct, 1e-11);
    }

    #[test]
    fn std_external_substitution_identity() {
        // g = x·√(2(l+1)) maps the Gaussian half-line integral onto the
        // crosspolytope form. Oracle: composite Simpson on a fine grid.
        let (l, n) = (2u32, 6u32);
        let lp1 = (l + 1) as f64;
        let steps = 200_000;
        let b = 8.0;
        let h = b / steps as f64;
        let g = |x: f64| (-lp1 * x * x).exp() * libm::erf(x).powi((n - l - 1) as i32);
        let mut s = g(0.0) + g(b);
        for i in 1..steps {
            s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = (lp1 / PI).sqrt() * s * h / 3.0;
        close(external_std_type1(l, n, &AngleConfig::default()).unwrap(), oracle, 1e-11);
    }

    #[test]
    fn printed_prefactor_changes_values() {
        let c = AngleConfig { external_prefactor: ExternalPrefactor::Printed, ..Default::default() };
        let good = external_pos_type1(3, 8, &AngleConfig::default()).unwrap().value;
        let bad = external_pos_type1(3, 8, &c).unwrap().value;
        assert!((bad / good - (2.0 * PI).powf(-1.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_indices_rejected() {
        assert!(internal_type1(0, 3, &q()).is_err());
        assert!(internal_type1(5, 3, &q()).is_err());
        assert!(internal_type2(3, 2, &q()).is_err());
        assert!(external_pos_type1(5, 5, &AngleConfig::default()).is_err());
        assert!(external_pos_type2(6, 5).is_err());
        assert!(FaceIndex::new(FaceFamily::PosType2, 3, 2, 5).is_err());
        assert!(FaceIndex::new(FaceFamily::PosType1, 3, 5, 5).is_err());
        assert!(FaceIndex::new(FaceFamily::FullCone, 3, 5, 5).is_ok());
    }

    #[test]
    fn cache_returns_identical_values() {
        let a = Angles::default();
        let x = a.get(AngleKind::InternalType1, 3, 7).unwrap();
        let y = a.get(AngleKind::InternalType1, 3, 7).unwrap();
        assert_eq!(x, y);
        assert_eq!(a.cached_len(), 1);
    }

    #[test]
    fn type1_matches_simplex_path() {
        for l in 1..=30u32 {
            for k in 1..=l {
                let a = internal_type1(k, l, &q()).unwrap();
                let b = internal_simplex(k, l, &q()).unwrap();
                let tol = 2.0 * (a.error_bound + b.error_bound) + 1e-15;
                assert!((a.value - b.value).abs() <= tol, "k={k} l={l}: {a:?} {b:?}");
            }
        }
    }

    #[test]
    fn type2_matches_characteristic_function_path() {
        for l in 2..=30u32 {
            for k in 1..l {
                let a = internal_type2(k, l, &q()).unwrap();
                let b = internal_type2_cf(k, l, &q()).unwrap();
                let tol = 2.0 * (a.error_bound + b.error_bound) + 1e-15;
                assert!((a.value - b.value).abs() <= tol, "k={k} l={l}: {a:?} {b:?}");
            }
        }
    }

    // References computed independently with 80-digit arithmetic on the
    // real line.
    #[test]
    fn tiny_internal_angles_keep_relative_accuracy() {
        let a = internal_type1(12, 79, &q()).unwrap();
        assert!((a.value / 1.116_416_638_097_136_6e-42 - 1.0).abs() < 1e-11, "{a:?}");
        let b = internal_full_cone(12, 80, &q()).unwrap();
        assert!((b.value / 7.033_522_972_563_383e-24 - 1.0).abs() < 1e-11, "{b:?}");
        let c = internal_type2(3, 20, &q()).unwrap();
        assert!((c.value / 2.300_231_690_032_011_3e-12 - 1.0).abs() < 1e-11, "{c:?}");
        for v in [a, b, c] {
            assert!((v.log_value - v.value.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn small_external_angles_are_not_truncated() {
        let c = AngleConfig::default();
        for l in [17u32, 33, 51] {
            let a = external_std_type1(l, 80, &c).unwrap();
            let b = external_crosspolytope(l, 80, &q()).unwrap();
            assert!((a.value / b.value - 1.0).abs() < 1e-10, "l={l}: {a:?} {b:?}");
            assert!(a.rel_error() < 1e-9);
        }
    }

    #[test]
    fn std_external_matches_crosspolytope() {
        let c = AngleConfig::default();
        for n in 2..=40u32 {
            for l in 0..n {
                let a = external_std_type1(l, n, &c).unwrap();
                let b = external_crosspolytope(l, n, &q()).unwrap();
                let tol = a.error_bound + b.error_bound + 1e-15;
                assert!((a.value - b.value).abs() <= tol, "l={l} n={n}: {a:?} {b:?}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pos_external_below_simplex_external(n in 3u32..40, frac in 0.0f64..1.0) {
            let l = ((n - 2) as f64 * frac) as u32;
            let a = external_pos_type1(l, n, &AngleConfig::default()).unwrap().value;
            let b = external_simplex(l, n, &q()).unwrap().value;
            prop_assert!(a < b);
        }

        #[test]
        fn type2_not_above_type1(l in 1u32..30, frac in 0.0f64..1.0) {
            let k = 1 + ((l - 1) as f64 * frac) as u32;
            let a = internal_type2(k, l, &q()).unwrap();
            let b = internal_type1(k, l, &q()).unwrap();
            prop_assert!(a.value <= b.value + a.error_bound + b.error_bound);
        }

        #[test]
        fn angles_lie_in_unit_interval(k in 1u32..20, dl in 0u32..20, dn in 1u32..20) {
            let l = k + dl;
            let n = l + dn;
            let c = AngleConfig::default();
            for v in [
                internal_type1(k, l, &q()).unwrap(),
                internal_type2(k, l, &q()).unwrap(),
                internal_full_cone(k, n, &q()).unwrap(),
                external_pos_type1(l, n, &c).unwrap(),
                external_std_type1(l, n, &c).unwrap(),
                external_simplex(l, n, &q()).unwrap(),
            ] {
                prop_assert!((0.0..=1.0).contains(&v.value));
            }
        }
    }
}
