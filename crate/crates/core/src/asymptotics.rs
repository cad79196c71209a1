//! Large-deviation rates `lim ln(p_err)/n` along `k = βn`, `m = αn`, and the
//! weak threshold `α_w(β)` where the rate reaches zero.
//!
//! The rate is a sum of three one-dimensional pieces: the face-count entropy,
//! a minimum over `μ` coming from the internal angles and a maximum over `γ`
//! coming from the external angles. The dominant face dimension is `ρ = α`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minimize::golden_section;
use crate::specialfn::{entropy, erf_log, erfc_log, half_erfc_neg_log};

const ARG_TOL: f64 = 1e-10;
const BRACKET_LIMIT: f64 = 50.0;
const PT_TOL: f64 = 1e-8;
const EDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymParams {
    /// `m/n`
    pub alpha: f64,
    /// `k/n`
    pub beta: f64,
}

impl AsymParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, AsymError> {
        if !(beta > 0.0 && beta < alpha && alpha < 1.0) {
            return Err(AsymError::InvalidParams { alpha, beta });
        }
        Ok(AsymParams { alpha, beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AsymVariant {
    Positive,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub rate: f64,
    pub rho: f64,
    pub mu_star: f64,
    pub gamma_star: f64,
    pub combinatorial_term: f64,
    /// Includes the `−(ρ−β)·ln 2` of the internal angle.
    pub internal_term: f64,
    pub external_term: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymError {
    #[error("need 0 < beta < alpha < 1, got alpha={alpha}, beta={beta}")]
    InvalidParams { alpha: f64, beta: f64 },
    #[error("no bracket for the {what} optimum below {limit}")]
    BracketFailure { what: &'static str, limit: f64 },
    #[error("rate does not reach zero for beta={beta} (max {max_rate:e} at alpha={alpha})")]
    NoSignChange { beta: f64, alpha: f64, max_rate: f64 },
}

/// Minimises `f` over `[0, ∞)` assuming it first decreases and then
/// increases: grows `[0, c]` from `c = 1` until `f(c/2) ≤ f(c)`.
fn min_halfline<F: Fn(f64) -> f64>(f: F, what: &'static str) -> Result<(f64, f64), AsymError> {
    let mut c = 1.0;
    loop {
        if f(0.5 * c) <= f(c) {
            break;
        }
        if c >= BRACKET_LIMIT {
            return Err(AsymError::BracketFailure { what, limit: BRACKET_LIMIT });
        }
        c = (2.0 * c).min(BRACKET_LIMIT);
    }
    Ok(golden_section(f, 0.0, c, ARG_TOL, 200))
}

fn mu_objective(rho: f64, beta: f64) -> impl Fn(f64) -> f64 {
    move |mu: f64| (rho - beta) * erfc_log(mu) + rho * mu * mu
}

fn gamma_objective(rho: f64, variant: AsymVariant) -> impl Fn(f64) -> f64 {
    move |g: f64| {
        let tail = match variant {
            AsymVariant::Positive => half_erfc_neg_log(g),
            // ½erfc(−γ) − ½erfc(γ) = erf(γ); ln erf → −∞ at 0.
            AsymVariant::Standard => erf_log(g),
        };
        -rho * g * g + (1.0 - rho) * tail
    }
}

/// Rate with the dominant face dimension `ρ ≥ α` given explicitly.
pub fn rate_at_rho(p: AsymParams, rho: f64, variant: AsymVariant) -> Result<RateResult, AsymError> {
    let AsymParams { beta, .. } = p;
    if !(rho >= beta && rho < 1.0) {
        return Err(AsymError::InvalidParams { alpha: rho, beta });
    }
    let h = entropy((1.0 - rho) / (1.0 - beta)).expect("argument lies in [0, 1]");
    let combinatorial_term = -(1.0 - beta) * h
        + match variant {
            AsymVariant::Positive => 0.0,
            AsymVariant::Standard => (rho - beta) * LN_2,
        };
    let (mu_star, mu_min) = min_halfline(mu_objective(rho, beta), "mu")?;
    let internal_term = mu_min - (rho - beta) * LN_2;
    let g = gamma_objective(rho, variant);
    let (gamma_star, neg_max) = min_halfline(|x| -g(x), "gamma")?;
    let external_term = -neg_max;
    Ok(RateResult {
        rate: combinatorial_term + internal_term + external_term,
        rho,
        mu_star,
        gamma_star,
        combinatorial_term,
        internal_term,
        external_term,
    })
}

pub fn rate(p: AsymParams, variant: AsymVariant) -> Result<RateResult, AsymError> {
    rate_at_rho(p, p.alpha, variant)
}

pub fn rate_positive(p: AsymParams) -> Result<RateResult, AsymError> {
    rate(p, AsymVariant::Positive)
}

pub fn rate_standard(p: AsymParams) -> Result<RateResult, AsymError> {
    rate(p, AsymVariant::Standard)
}

/// Diagnostic: the `ρ ∈ [α, 1)` maximising [`rate_at_rho`]. Pinning `ρ = α`
/// is justified when this returns `α`.
pub fn rho_argmax(p: AsymParams, variant: AsymVariant) -> Result<f64, AsymError> {
    let f = |rho: f64| rate_at_rho(p, rho, variant).map(|r| -r.rate).unwrap_or(f64::INFINITY);
    let (rho, v) = golden_section(f, p.alpha, 1.0 - EDGE, ARG_TOL, 200);
    // Golden section never evaluates the endpoint itself.
    if f(p.alpha) <= v {
        Ok(p.alpha)
    } else {
        Ok(rho)
    }
}

/// Weak threshold `α_w(β)`: the `α` at which the rate reaches zero.
///
/// The rate as a function of `α` rises to its maximum and falls after it.
/// If that maximum is within `1e-8` of zero it is the threshold; if it is
/// positive, the threshold is the zero crossing to its right, found by
/// bisection. A maximum below `−1e-8` means there is no threshold.
pub fn pt_alpha(beta: f64, variant: AsymVariant) -> Result<f64, AsymError> {
    if !(beta > 0.0 && beta < 1.0 - 2.0 * EDGE) {
        return Err(AsymError::InvalidParams { alpha: f64::NAN, beta });
    }
    let r = |alpha: f64| -> Result<f64, AsymError> {
        rate(AsymParams::new(alpha, beta)?, variant).map(|x| x.rate)
    };
    let lo = beta + EDGE;
    let hi = 1.0 - EDGE;
    let (a_max, neg) = golden_section(|a| r(a).map(|v| -v).unwrap_or(f64::INFINITY), lo, hi, PT_TOL * 0.1, 300);
    let max_rate = -neg;
    if max_rate.abs() <= PT_TOL {
        return Ok(a_max);
    }
    if max_rate < 0.0 || r(hi)? >= 0.0 {
        return Err(AsymError::NoSignChange { beta, alpha: a_max, max_rate });
    }
    let (mut a, mut b) = (a_max, hi);
    while b - a > PT_TOL {
        let mid = 0.5 * (a + b);
        if r(mid)? >= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::{erf, erfc, erfcx};
    use std::f64::consts::{FRAC_2_SQRT_PI, PI};

    fn params(a: f64, b: f64) -> AsymParams {
        AsymParams::new(a, b).unwrap()
    }

    fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if (f(m) < 0.0) == (f(lo) < 0.0) {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    }

    // Oracle from the stationarity equations instead of direct minimisation.
    fn oracle(a: f64, b: f64, variant: AsymVariant) -> f64 {
        let mu = bisect_root(|m| a * m * erfcx(m) - (a - b) / PI.sqrt(), 0.0, 50.0);
        let dg = |g: f64| match variant {
            AsymVariant::Positive => -2.0 * a * g + (1.0 - a) * FRAC_2_SQRT_PI * (-g * g).exp() / erfc(-g),
            AsymVariant::Standard => -2.0 * a * g + (1.0 - a) * FRAC_2_SQRT_PI * (-g * g).exp() / erf(g),
        };
        let g = bisect_root(dg, 1e-12, 50.0);
        let x = (1.0 - a) / (1.0 - b);
        let h = x * x.ln() + (1.0 - x) * (1.0 - x).ln();
        let ext = match variant {
            AsymVariant::Positive => (0.5 * erfc(-g)).ln(),
            AsymVariant::Standard => erf(g).ln(),
        };
        let comb_extra = if variant == AsymVariant::Standard { (a - b) * LN_2 } else { 0.0 };
        -(1.0 - b) * h + comb_extra + (a - b) * erfc(mu).ln() + a * mu * mu - (a - b) * LN_2 - a * g * g
            + (1.0 - a) * ext
    }

    #[test]
    fn matches_stationarity_oracle() {
        for &(a, b) in &[(0.7, 0.2), (0.4, 0.15), (0.55, 1.0 / 3.0), (0.9, 0.1), (0.3, 0.29)] {
            for v in [AsymVariant::Positive, AsymVariant::Standard] {
                let got = rate(params(a, b), v).unwrap().rate;
                let want = oracle(a, b, v);
                assert!((got - want).abs() < 1e-12, "{a} {b} {v:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn reference_points() {
        let p = rate_positive(params(0.7, 0.2)).unwrap();
        assert!((p.rate + 0.223_451_722_673_7).abs() < 1e-9, "{p:?}");
        assert!((p.mu_star - 0.857_790_05).abs() < 1e-6);
        assert!((p.gamma_star - 0.191_969_09).abs() < 1e-6);
        let s = rate_standard(params(0.4, 0.15)).unwrap();
        assert!((s.rate + 0.001_655_412_335).abs() < 1e-9, "{s:?}");
        let sum = s.combinatorial_term + s.internal_term + s.external_term;
        assert_eq!(sum, s.rate);
    }

    #[test]
    fn optimiser_certificates() {
        for &(a, b) in &[(0.7, 0.2), (0.4, 0.15), (0.95, 0.05)] {
            for v in [AsymVariant::Positive, AsymVariant::Standard] {
                let r = rate(params(a, b), v).unwrap();
                let f = mu_objective(a, b);
                assert!(f(r.mu_star) <= f(r.mu_star + 1e-4) && f(r.mu_star) <= f(r.mu_star - 1e-4));
                let g = gamma_objective(a, v);
                assert!(g(r.gamma_star) >= g(r.gamma_star + 1e-4));
                assert!(g(r.gamma_star) >= g(r.gamma_star - 1e-4));
            }
        }
    }

    #[test]
    fn invalid_params() {
        assert!(AsymParams::new(0.3, 0.3).is_err());
        assert!(AsymParams::new(1.0, 0.3).is_err());
        assert!(AsymParams::new(0.5, 0.0).is_err());
        assert!(pt_alpha(0.0, AsymVariant::Positive).is_err());
    }

    #[test]
    fn threshold_is_self_consistent_and_monotone() {
        for v in [AsymVariant::Positive, AsymVariant::Standard] {
            let mut prev = 0.0;
            for b in [0.1, 0.2, 0.3] {
                let a = pt_alpha(b, v).unwrap();
                assert!(rate(params(a, b), v).unwrap().rate.abs() <= 1e-8);
                assert!(a > prev);
                prev = a;
            }
        }
        let a = pt_alpha(1.0 / 3.0, AsymVariant::Positive).unwrap();
        assert!((a - 0.554_20).abs() < 1e-4, "{a}");
    }

    #[test]
    fn rate_never_positive_and_falls_past_threshold() {
        for v in [AsymVariant::Positive, AsymVariant::Standard] {
            let b = 0.2;
            let aw = pt_alpha(b, v).unwrap();
            let mut prev = f64::INFINITY;
            for i in 0..40 {
                let a = aw + (0.99 - aw) * i as f64 / 39.0;
                let r = rate(params(a, b), v).unwrap().rate;
                assert!(r <= 1e-9);
                assert!(r <= prev + 1e-12);
                prev = r;
            }
            for i in 1..20 {
                let a = b + (aw - b) * i as f64 / 20.0;
                assert!(rate(params(a, b), v).unwrap().rate <= 1e-9);
            }
        }
    }

    #[test]
    fn pinned_rho_is_the_maximiser() {
        for &(a, b) in &[(0.7, 0.2), (0.8, 0.3), (0.5, 0.1)] {
            for v in [AsymVariant::Positive, AsymVariant::Standard] {
                assert_eq!(rho_argmax(params(a, b), v).unwrap(), a);
            }
        }
    }

    #[test]
    fn near_diagonal_limit_stays_negative() {
        // Along β = α − 10⁻³ the rate tends to a strictly negative value, not 0.
        for a in [0.5, 0.7] {
            let p = rate_positive(params(a, a - 1e-3)).unwrap().rate;
            let s = rate_standard(params(a, a - 1e-3)).unwrap().rate;
            assert!(p < -0.1 && s < -0.1, "{p} {s}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn standard_external_term_below_positive(b in 0.02f64..0.9, t in 0.01f64..0.99) {
            // erf(γ) ≤ ½erfc(−γ) pointwise. The full rates are not ordered:
            // the standard face count carries an extra (ρ−β)·ln 2.
            let a = b + (0.999 - b) * t;
            let p = rate_positive(params(a, b)).unwrap();
            let s = rate_standard(params(a, b)).unwrap();
            proptest::prop_assert!(s.external_term <= p.external_term + 1e-12);
            proptest::prop_assert!((s.internal_term - p.internal_term).abs() <= 1e-12);
        }

        #[test]
        fn rate_is_continuous(b in 0.02f64..0.9, t in 0.01f64..0.98) {
            let a = b + (0.99 - b) * t;
            for v in [AsymVariant::Positive, AsymVariant::Standard] {
                let r0 = rate(params(a, b), v).unwrap().rate;
                let r1 = rate(params(a + 1e-6, b), v).unwrap().rate;
                proptest::prop_assert!((r1 - r0).abs() <= 1e-4);
            }
        }
    }
}
