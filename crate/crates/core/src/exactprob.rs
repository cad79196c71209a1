//! Exact failure probabilities as alternating-parity angle sums.
//!
//! For a face `F` of dimension `k−1` the failure probability is
//! `2·Σ count(l)·φint(F, G_l)·φext(G_l, P)` over face dimensions
//! `l = m+1, m+3, …`, and the success probability is the same sum over
//! `l = m−1, m−3, …, ≥ k−1`. Both halves are provided so the identity
//! `p_err + p_cor = 1` can be checked from two disjoint sets of terms.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::{AngleConfig, AngleError, AngleKind, AngleValue, Angles, FaceFamily};
use crate::specialfn::{binomial_exact, log_binomial};

const LN_2: f64 = std::f64::consts::LN_2;
const PROB_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemDims {
    pub k: u32,
    pub m: u32,
    pub n: u32,
}

impl ProblemDims {
    pub fn new(k: u32, m: u32, n: u32) -> Result<Self, ProbError> {
        if k >= 1 && k <= m && m <= n {
            Ok(ProblemDims { k, m, n })
        } else {
            Err(ProbError::InvalidDims { k, m, n })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    PositiveL1,
    StandardL1,
    PositiveSimplex,
    Crosspolytope,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::PositiveL1, Variant::StandardL1, Variant::PositiveSimplex, Variant::Crosspolytope];
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("invalid dimensions k={k}, m={m}, n={n} (need 1 ≤ k ≤ m ≤ n)")]
    InvalidDims { k: u32, m: u32, n: u32 },
    #[error("probability {value:e} outside [0, 1]")]
    OutOfRange { value: f64 },
    #[error(transparent)]
    Angle(#[from] AngleError),
}

/// Number of `l`-faces of a family containing a fixed `(k−1)`-face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceCount {
    /// `ln(count)`, `-inf` when there are no such faces.
    pub log: f64,
    /// Exact value when it fits in 128 bits.
    pub exact: Option<u128>,
}

impl FaceCount {
    fn zero() -> Self {
        FaceCount { log: f64::NEG_INFINITY, exact: Some(0) }
    }

    pub fn is_zero(&self) -> bool {
        self.log == f64::NEG_INFINITY
    }
}

pub fn face_count(family: FaceFamily, k: u32, l: u32, n: u32) -> FaceCount {
    let nk = (n - k.min(n)) as u64;
    let binom = |j: i64| FaceCount { log: log_binomial(nk, j), exact: binomial_exact(nk, j) };
    let (ni, li) = (n as i64, l as i64);
    if l + 1 < k || l > n {
        return FaceCount::zero();
    }
    match family {
        FaceFamily::PosType1 | FaceFamily::SimplexFace => {
            if l >= n {
                FaceCount::zero()
            } else {
                binom(ni - li - 1)
            }
        }
        FaceFamily::PosType2 => {
            if l < k {
                FaceCount::zero()
            } else {
                binom(ni - li)
            }
        }
        FaceFamily::StdType1 | FaceFamily::CrosspolytopeFace if l < n => {
            let c = binom(ni - li - 1);
            let e = l + 1 - k;
            let exact = c.exact.and_then(|v| if e < 127 { v.checked_mul(1u128 << e) } else { None });
            FaceCount { log: c.log + e as f64 * LN_2, exact: if c.is_zero() { Some(0) } else { exact } }
        }
        FaceFamily::StdType1 => FaceCount::zero(),
        FaceFamily::CrosspolytopeFace | FaceFamily::FullCone => {
            if l == n {
                FaceCount { log: 0.0, exact: Some(1) }
            } else {
                FaceCount::zero()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub l: u32,
    pub family: FaceFamily,
    pub count: FaceCount,
    pub internal: AngleValue,
    pub external: AngleValue,
    /// `count·internal·external`.
    pub value: f64,
    pub error_bound: f64,
}

/// Which half of the angle sum produced `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumForm {
    /// `value = 2·Σ terms` over `l = m+1, m+3, …`.
    Top,
    /// `value = 2·Σ terms` over `l = m−1, m−3, …` (a success probability).
    Bottom,
    /// `value = 1 − 2·Σ terms` over `l = m−1, m−3, …`.
    OneMinusBottom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbBreakdown {
    pub value: f64,
    pub terms: Vec<Term>,
    pub error_bound: f64,
    pub form: SumForm,
}

impl ProbBreakdown {
    /// `2·Σ term values`, accumulated smallest first.
    pub fn doubled_sum(&self) -> f64 {
        let mut v: Vec<f64> = self.terms.iter().map(|t| t.value).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        2.0 * v.iter().sum::<f64>()
    }
}

fn clamp_prob(value: f64) -> Result<f64, ProbError> {
    if !value.is_finite() || !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&value) {
        return Err(ProbError::OutOfRange { value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Face dimensions `l = start, start ± 2, …` inside `[lo, hi]`.
fn parity_range(start: i64, step: i64, lo: i64, hi: i64) -> Vec<u32> {
    let mut out = Vec::new();
    let mut l = start;
    while l >= lo && l <= hi {
        out.push(l as u32);
        l += step;
    }
    out
}

/// One family's contribution at a face dimension.
#[derive(Debug, Clone, Copy)]
struct Part {
    family: FaceFamily,
    internal: (AngleKind, u32, u32),
    external: Option<(AngleKind, u32, u32)>,
}

/// Evaluates the exact probabilities, sharing one angle cache.
#[derive(Debug, Default)]
pub struct ExactEngine {
    angles: Angles,
}

impl ExactEngine {
    pub fn new(cfg: AngleConfig) -> Self {
        ExactEngine { angles: Angles::new(cfg) }
    }

    pub fn angles(&self) -> &Angles {
        &self.angles
    }

    fn parts(&self, variant: Variant, k: u32, l: u32, n: u32) -> Vec<Part> {
        use AngleKind::*;
        let mut v = Vec::with_capacity(2);
        match variant {
            Variant::PositiveL1 => {
                if l < n {
                    v.push(Part {
                        family: FaceFamily::PosType1,
                        internal: (InternalType1, k, l),
                        external: Some((ExternalPosType1, l, n)),
                    });
                }
                if l >= k {
                    v.push(Part {
                        family: FaceFamily::PosType2,
                        internal: (InternalType2, k, l),
                        external: Some((ExternalPosType2, l, n)),
                    });
                }
            }
            Variant::StandardL1 => {
                if l < n {
                    v.push(Part {
                        family: FaceFamily::StdType1,
                        internal: (InternalType1, k, l),
                        external: Some((ExternalStdType1, l, n)),
                    });
                } else {
                    v.push(Part { family: FaceFamily::FullCone, internal: (InternalFullCone, k, n), external: None });
                }
            }
            Variant::PositiveSimplex => {
                if l < n {
                    v.push(Part {
                        family: FaceFamily::SimplexFace,
                        internal: (InternalSimplex, k, l),
                        external: Some((ExternalSimplex, l, n)),
                    });
                }
            }
            Variant::Crosspolytope => {
                if l < n {
                    v.push(Part {
                        family: FaceFamily::CrosspolytopeFace,
                        internal: (InternalSimplex, k, l),
                        external: Some((ExternalCrosspolytope, l, n)),
                    });
                } else {
                    v.push(Part {
                        family: FaceFamily::CrosspolytopeFace,
                        internal: (InternalFullCone, k, n),
                        external: None,
                    });
                }
            }
        }
        v
    }

    fn terms(&self, variant: Variant, dims: ProblemDims, ls: &[u32]) -> Result<Vec<Term>, ProbError> {
        let ProblemDims { k, n, .. } = dims;
        let jobs: Vec<(u32, Part)> = ls
            .iter()
            .flat_map(|&l| self.parts(variant, k, l, n).into_iter().map(move |p| (l, p)))
            .collect();
        let out: Result<Vec<Option<Term>>, ProbError> = jobs
            .par_iter()
            .map(|&(l, p)| {
                let count = face_count(p.family, k, l, n);
                if count.is_zero() {
                    return Ok(None);
                }
                let internal = self.angles.get(p.internal.0, p.internal.1, p.internal.2)?;
                let external = match p.external {
                    Some((kind, a, b)) => self.angles.get(kind, a, b)?,
                    None => AngleValue::exact(1.0),
                };
                let value = (count.log + internal.log_value + external.log_value).exp();
                let error_bound = if value > 0.0 {
                    value * (internal.rel_error() + external.rel_error())
                } else {
                    let c = count.log.exp();
                    c * (internal.error_bound * external.value + internal.value * external.error_bound)
                };
                Ok(Some(Term { l, family: p.family, count, internal, external, value, error_bound }))
            })
            .collect();
        Ok(out?.into_iter().flatten().collect())
    }

    fn assemble(&self, terms: Vec<Term>, form: SumForm) -> Result<ProbBreakdown, ProbError> {
        let mut b = ProbBreakdown { value: 0.0, terms, error_bound: 0.0, form };
        let s = b.doubled_sum();
        let mut errs: Vec<f64> = b.terms.iter().map(|t| t.error_bound).collect();
        errs.sort_by(|a, b| a.total_cmp(b));
        b.error_bound = 2.0 * errs.iter().sum::<f64>();
        b.value = clamp_prob(match form {
            SumForm::Top | SumForm::Bottom => s,
            SumForm::OneMinusBottom => 1.0 - s,
        })?;
        Ok(b)
    }

    fn top(&self, variant: Variant, dims: ProblemDims) -> Result<ProbBreakdown, ProbError> {
        let ls = parity_range(dims.m as i64 + 1, 2, 0, dims.n as i64);
        let terms = self.terms(variant, dims, &ls)?;
        self.assemble(terms, SumForm::Top)
    }

    fn bottom_terms(&self, variant: Variant, dims: ProblemDims) -> Result<Vec<Term>, ProbError> {
        let lo = dims.k as i64 - 1;
        let ls = parity_range(dims.m as i64 - 1, -2, lo, dims.n as i64);
        self.terms(variant, dims, &ls)
    }

    pub fn p_err_positive(&self, dims: ProblemDims) -> Result<ProbBreakdown, ProbError> {
        self.top(Variant::PositiveL1, dims)
    }

    pub fn p_err_standard(&self, dims: ProblemDims) -> Result<ProbBreakdown, ProbError> {
        self.top(Variant::StandardL1, dims)
    }

    pub fn p_err_positive_simplex(&self, dims: ProblemDims) -> Result<ProbBreakdown, ProbError> {
        self.top(Variant::PositiveSimplex, dims)
    }

    /// Crosspolytope top sum, including the `l = n` term through the internal
    /// angle of the full cone when the parity reaches it.
    pub fn crosspolytope_top(&self, dims: ProblemDims) -> Result<ProbBreakdown, ProbError> {
        self.top(Variant::Crosspolytope, dims)
    }

    /// `1 − 2Σ` over the bottom face dimensions.
    pub fn crosspolytope_bottom(&self, dims: ProblemDims) -> Result<ProbBreakdown, ProbError> {
        let terms = self.bottom_terms(Variant::Crosspolytope, dims)?;
        self.assemble(terms, SumForm::OneMinusBottom)
    }

    /// Uses the bottom sum whenever the top sum would need the `l = n` term.
    pub fn p_err_crosspolytope(&self, dims: ProblemDims) -> Result<ProbBreakdown, ProbError> {
        if dims.m < dims.n && (dims.n - dims.m - 1) % 2 == 0 {
            self.crosspolytope_bottom(dims)
        } else {
            self.crosspolytope_top(dims)
        }
    }

    pub fn p_err(&self, variant: Variant, dims: ProblemDims) -> Result<ProbBreakdown, ProbError> {
        match variant {
            Variant::PositiveL1 => self.p_err_positive(dims),
            Variant::StandardL1 => self.p_err_standard(dims),
            Variant::PositiveSimplex => self.p_err_positive_simplex(dims),
            Variant::Crosspolytope => self.p_err_crosspolytope(dims),
        }
    }

    /// Success probability `1 − p_err` from the bottom half of the sum.
    ///
    /// For the simplex with `k = n` the fixed face is the whole simplex, for
    /// which the angle-sum relation does not hold; it always survives.
    pub fn p_complement(&self, variant: Variant, dims: ProblemDims) -> Result<ProbBreakdown, ProbError> {
        if variant == Variant::PositiveSimplex && dims.k == dims.n {
            return Ok(ProbBreakdown { value: 1.0, terms: Vec::new(), error_bound: 0.0, form: SumForm::Bottom });
        }
        let terms = self.bottom_terms(variant, dims)?;
        self.assemble(terms, SumForm::Bottom)
    }

    pub fn sweep(
        &self,
        variant: Variant,
        k: u32,
        n: u32,
        m_range: RangeInclusive<u32>,
    ) -> Result<Vec<(u32, ProbBreakdown)>, ProbError> {
        m_range
            .map(|m| {
                let dims = ProblemDims::new(k, m, n)?;
                Ok((m, self.p_err(variant, dims)?))
            })
            .collect()
    }
}
