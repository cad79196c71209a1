//! Scalar special functions used by the angle integrands.
//!
//! Everything that can overflow is carried in log scale. In particular the
//! imaginary error function is never formed directly: `erfi(x)` is
//! `(2/√π)·e^{x²}·D(x)` with `D` the Dawson function, and the `e^{x²}` factor
//! stays in the exponent.

use std::f64::consts::{FRAC_2_SQRT_PI, LN_2, PI};
use std::fmt;
use std::ops::Mul;

use errorfunctions::{ComplexErrorFunctions, RealErrorFunctions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("entropy argument {0} outside [0, 1]")]
    EntropyArg(f64),
}

/// A nonzero complex number `exp(log_magnitude + i·phase)`.
///
/// `log_magnitude` may be `-inf` to represent zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_magnitude: f64,
    /// Principal branch, in (-π, π].
    pub phase: f64,
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex { log_magnitude: 0.0, phase: 0.0 };
    pub const ZERO: LogComplex = LogComplex { log_magnitude: f64::NEG_INFINITY, phase: 0.0 };

    pub fn new(log_magnitude: f64, phase: f64) -> Self {
        LogComplex { log_magnitude, phase: wrap_phase(phase) }
    }

    /// Log-representation of a real number (phase 0 or π).
    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            LogComplex { log_magnitude: x.ln(), phase: 0.0 }
        } else {
            LogComplex { log_magnitude: (-x).ln(), phase: PI }
        }
    }

    /// A positive real given by its logarithm.
    pub fn from_log(log_value: f64) -> Self {
        LogComplex { log_magnitude: log_value, phase: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    /// Integer (or real) power on the principal branch of the log.
    pub fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return Self::ONE;
        }
        Self::new(p * self.log_magnitude, p * self.phase)
    }

    pub fn conj(self) -> Self {
        Self::new(self.log_magnitude, -self.phase)
    }

    /// Multiplies by the positive real `e^{log_factor}`.
    pub fn scale_log(self, log_factor: f64) -> Self {
        LogComplex { log_magnitude: self.log_magnitude + log_factor, phase: self.phase }
    }

    /// `(re, im)` after multiplying by `e^{-shift}`; used for log-sum-exp.
    pub fn to_cartesian_shifted(self, shift: f64) -> (f64, f64) {
        if self.is_zero() {
            return (0.0, 0.0);
        }
        let m = (self.log_magnitude - shift).exp();
        let (s, c) = self.phase.sin_cos();
        (m * c, m * s)
    }

    pub fn to_cartesian(self) -> (f64, f64) {
        self.to_cartesian_shifted(0.0)
    }

    pub fn re(self) -> f64 {
        self.to_cartesian().0
    }

    pub fn im(self) -> f64 {
        self.to_cartesian().1
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;

    fn mul(self, rhs: LogComplex) -> LogComplex {
        LogComplex::new(self.log_magnitude + rhs.log_magnitude, self.phase + rhs.phase)
    }
}

impl fmt::Display for LogComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({} + {}i)", self.log_magnitude, self.phase)
    }
}

fn wrap_phase(phase: f64) -> f64 {
    if phase > -PI && phase <= PI {
        return phase;
    }
    let r = (phase + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `ln erfc(x)`, finite for every finite `x`.
///
/// Past x = 10 the asymptotic series for `e^{x²}·erfc(x)` is used; its terms
/// shrink by `(2j-1)/(2x²) ≤ 1/5` at that point so a handful suffice.
pub fn erfc_log(x: f64) -> f64 {
    if x < 10.0 {
        return erfc(x).ln();
    }
    let inv2x2 = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..40 {
        term *= -((2 * j - 1) as f64) * inv2x2;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -x * x - x.ln() - LN_SQRT_PI + sum.ln()
}

/// `ln erf(x)` for `x > 0`; `-inf` at 0.
pub fn erf_log(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x < 0.5 {
        erf(x).ln()
    } else {
        (-erfc(x)).ln_1p()
    }
}

/// `ln((1/2)·erfc(-x))`, i.e. `ln Φ(√2·x)`.
pub fn half_erfc_neg_log(x: f64) -> f64 {
    if x >= 0.0 {
        (-0.5 * erfc(x)).ln_1p()
    } else {
        erfc_log(-x) - LN_2
    }
}

/// Scaled complementary error function `e^{x²}·erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    RealErrorFunctions::erfcx(x)
}

/// Complex `e^{z²}·erfc(z)`.
pub fn erfcx_complex(z: Complex64) -> Complex64 {
    ComplexErrorFunctions::erfcx(z)
}

/// Principal log of `erfc(z)` for `Re z ≥ 0`, as `ln erfcx(z) − z²`.
///
/// The phase is only defined modulo 2π, which is enough for integer powers.
pub fn log_erfc_complex(z: Complex64) -> LogComplex {
    debug_assert!(z.re >= 0.0, "log_erfc_complex needs Re z >= 0, got {z}");
    let w = erfcx_complex(z);
    let z2 = z * z;
    LogComplex::new(w.norm().ln() - z2.re, w.arg() - z2.im)
}

// Rybicki's sampling formula, D(x) ≈ π^{-1/2} Σ_{n odd} e^{-(x-nh)²}/n. The
// discretisation error is O(exp(-(π/2h)²)) ≈ 1e-17 at h = 1/4; 18 pairs of
// terms reach |x - nh| ≈ 8.75 where the Gaussian weight is below 1e-33.
const RYBICKI_H: f64 = 0.25;
const RYBICKI_TERMS: usize = 18;

/// Dawson's integral `D(x) = e^{-x²} ∫₀ˣ e^{t²} dt`.
pub fn dawson(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.2 {
        // D(x) = Σ (-1)^j 2^j x^{2j+1} / (2j+1)!!
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut j = 0;
        while term.abs() > 1e-18 * sum.abs() {
            j += 1;
            term *= -2.0 * x2 / (2 * j + 1) as f64;
            sum += term;
        }
        return sum;
    }
    let n0 = 2.0 * (0.5 * ax / RYBICKI_H).round();
    let xp = ax - n0 * RYBICKI_H;
    let mut e1 = (2.0 * xp * RYBICKI_H).exp();
    let e2 = e1 * e1;
    let mut d1 = n0 + 1.0;
    let mut d2 = d1 - 2.0;
    let mut sum = 0.0;
    for i in 1..=RYBICKI_TERMS {
        let c = (-(((2 * i - 1) as f64) * RYBICKI_H).powi(2)).exp();
        sum += c * (e1 / d1 + 1.0 / (d2 * e1));
        d1 += 2.0;
        d2 -= 2.0;
        e1 *= e2;
    }
    let v = FRAC_1_SQRT_PI * (-xp * xp).exp() * sum;
    v.copysign(x)
}

/// `erfi(x)` as `(ln|erfi(x)|, sign)`; `(−inf, 0.0)` at zero.
pub fn erfi_log(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    let d = dawson(x);
    (x * x + (FRAC_2_SQRT_PI * d.abs()).ln(), x.signum())
}

/// Principal log of `1 − i·erfi(t/√2)`.
pub fn log_one_minus_i_erfi(t: f64) -> LogComplex {
    let s = t * std::f64::consts::FRAC_1_SQRT_2;
    if s == 0.0 {
        return LogComplex::ONE;
    }
    if s.abs() < 1.0 {
        let e = FRAC_2_SQRT_PI * (s * s).exp() * dawson(s);
        return LogComplex::new(0.5 * (e * e).ln_1p(), -e.atan());
    }
    let (la, sign) = erfi_log(s);
    // |1 - i e| = |e|·sqrt(1 + e^{-2 ln|e|}),  arg = -sign·(π/2 − atan(1/|e|))
    let inv = (-la).exp();
    LogComplex::new(
        la + 0.5 * (inv * inv).ln_1p(),
        -sign * (std::f64::consts::FRAC_PI_2 - inv.atan()),
    )
}

/// Exact `C(n, k)` when it fits in a `u128`; `Some(0)` for `k` out of range.
pub fn binomial_exact(n: u64, k: i64) -> Option<u128> {
    if k < 0 || k as u64 > n {
        return Some(0);
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n-i) is divisible by (i+1) after the multiplication.
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

/// `ln C(n, k)`, with `-inf` when `k < 0` or `k > n`.
pub fn log_binomial(n: u64, k: i64) -> f64 {
    if k < 0 || k as u64 > n {
        return f64::NEG_INFINITY;
    }
    if n <= 60 {
        if let Some(c) = binomial_exact(n, k) {
            return (c as f64).ln();
        }
    }
    let k = k as u64;
    let ln_fact = |m: u64| libm::lgamma(m as f64 + 1.0);
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

/// An entropy argument in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyArg(f64);

impl EntropyArg {
    pub fn new(x: f64) -> Result<Self, DomainError> {
        if (0.0..=1.0).contains(&x) {
            Ok(EntropyArg(x))
        } else {
            Err(DomainError::EntropyArg(x))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `H(x) = x ln x + (1−x) ln(1−x)` with `0·ln 0 = 0`. Range `[−ln 2, 0]`.
pub fn entropy_h(x: EntropyArg) -> f64 {
    let xlogx = |v: f64| if v == 0.0 { 0.0 } else { v * v.ln() };
    let x = x.0;
    xlogx(x) + xlogx(1.0 - x)
}

/// Convenience wrapper validating the argument.
pub fn entropy(x: f64) -> Result<f64, DomainError> {
    EntropyArg::new(x).map(entropy_h)
}
