//! Empirical failure rates from random Gaussian systems, and Monte Carlo
//! membership estimates of the individual angles.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, trial)`, and
//! results are reduced as integer counts, so estimates do not depend on the
//! number of threads or the order in which trials run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::AngleKind;
use crate::exactprob::{ProblemDims, Variant};
use crate::linprog::{solve, LpStatus, StandardFormLP};

/// Two-sided normal quantiles used for the Wilson intervals.
pub const Z_95: f64 = 1.959_963_984_540_054;
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Above this fraction of solver failures an estimate is flagged.
const SOLVER_FAILURE_FLAG: f64 = 1e-3;
const ORACLE_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("invalid trial configuration: {0}")]
    InvalidConfig(String),
    #[error("LP solver returned {0:?}")]
    SolverFailure(LpStatus),
    #[error("angle {kind:?} has no membership oracle at ({a}, {b})")]
    BadOracleIndex { kind: AngleKind, a: u32, b: u32 },
}

/// How a trial decides failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum TrialMethod {
    /// Solve the ℓ1 program (or the face-survival LP for the simplex) and
    /// compare with the planted vector.
    #[default]
    Recovery,
    /// Test the null-space condition directly.
    NullSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub dims: ProblemDims,
    pub variant: Variant,
    pub trials: u64,
    pub seed: u64,
    pub magnitude_low: f64,
    pub magnitude_high: f64,
    pub success_tol: f64,
    pub method: TrialMethod,
}

impl TrialConfig {
    pub fn new(dims: ProblemDims, variant: Variant, trials: u64, seed: u64) -> Self {
        TrialConfig {
            dims,
            variant,
            trials,
            seed,
            magnitude_low: 0.5,
            magnitude_high: 1.5,
            success_tol: 1e-6,
            method: TrialMethod::Recovery,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        let bad = |s: &str| Err(McError::InvalidConfig(s.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.magnitude_low > 0.0 && self.magnitude_low <= self.magnitude_high && self.magnitude_high.is_finite()) {
            return bad("need 0 < magnitude_low <= magnitude_high");
        }
        if !(self.success_tol > 0.0 && self.success_tol.is_finite()) {
            return bad("success_tol must be positive");
        }
        if self.method == TrialMethod::NullSpace && self.variant == Variant::PositiveSimplex {
            return bad("the simplex variant has no null-space check");
        }
        Ok(())
    }
}

/// One random system: `A` (row-major `m×n`), the planted `x` and `y = A·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
    pub x_true: Vec<f64>,
    pub y: Vec<f64>,
}

impl Instance {
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Instance number `trial_index` of the stream `seed`. Support `{0..k}`,
/// all signs positive, magnitudes uniform on `[low, high]`.
pub fn gen_instance(dims: ProblemDims, trial_index: u64, seed: u64, magnitudes: (f64, f64)) -> Instance {
    let (m, n, k) = (dims.m as usize, dims.n as usize, dims.k as usize);
    let mut rng = trial_rng(seed, trial_index);
    let a: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let mut x_true = vec![0.0; n];
    if magnitudes.0 == magnitudes.1 {
        x_true[..k].fill(magnitudes.0);
    } else {
        let u = Uniform::new_inclusive(magnitudes.0, magnitudes.1).expect("validated magnitude range");
        for v in &mut x_true[..k] {
            *v = rng.sample(u);
        }
    }
    let y = (0..m).map(|i| (0..k).map(|j| a[i * n + j] * x_true[j]).sum()).collect();
    Instance { m, n, a, x_true, y }
}

fn optimal(lp: &StandardFormLP) -> Result<crate::linprog::LpSolution, McError> {
    let s = solve(lp);
    match s.status {
        LpStatus::Optimal => Ok(s),
        other => Err(McError::SolverFailure(other)),
    }
}

/// `min 1ᵀx` subject to `Ax = y`, `x ≥ 0`.
pub fn recover_positive(inst: &Instance) -> Result<Vec<f64>, McError> {
    let lp = StandardFormLP::new(inst.m, inst.n, inst.a.clone(), inst.y.clone(), vec![1.0; inst.n])
        .map_err(|e| McError::InvalidConfig(e.to_string()))?;
    Ok(optimal(&lp)?.x)
}

/// `min ‖x‖₁` subject to `Ax = y`, with `x = u − v`.
pub fn recover_standard(inst: &Instance) -> Result<Vec<f64>, McError> {
    let (m, n) = (inst.m, inst.n);
    let mut a = Vec::with_capacity(m * 2 * n);
    for i in 0..m {
        let row = &inst.a[i * n..(i + 1) * n];
        a.extend_from_slice(row);
        a.extend(row.iter().map(|v| -v));
    }
    let lp = StandardFormLP::new(m, 2 * n, a, inst.y.clone(), vec![1.0; 2 * n])
        .map_err(|e| McError::InvalidConfig(e.to_string()))?;
    let s = optimal(&lp)?;
    Ok((0..n).map(|j| s.x[j] - s.x[n + j]).collect())
}

/// Largest mass `Σ_{i≥k} z_i` over `Az = A·x_true`, `1ᵀz = 1ᵀx_true`,
/// `z ≥ 0`. Zero exactly when the face spanned by the support survives.
pub fn off_support_mass(inst: &Instance, k: usize) -> Result<f64, McError> {
    let (m, n) = (inst.m, inst.n);
    let mut a = inst.a.clone();
    a.extend(std::iter::repeat_n(1.0, n));
    let mut b = inst.y.clone();
    b.push(inst.x_true.iter().sum());
    let c: Vec<f64> = (0..n).map(|j| if j < k { 0.0 } else { -1.0 }).collect();
    let lp = StandardFormLP::new(m + 1, n, a, b, c).map_err(|e| McError::InvalidConfig(e.to_string()))?;
    Ok(-optimal(&lp)?.objective)
}

/// Whether the support face survives the projection by `A`.
pub fn face_survival_trial(inst: &Instance, k: usize, success_tol: f64) -> Result<bool, McError> {
    Ok(off_support_mass(inst, k)? <= success_tol)
}

/// `min Σ_{i≥k} |w_i|` subject to `Aw = 0`, `−Σ_{i<k} w_i = 1`, with
/// `w_i ≥ 0` for `i ≥ k` in the positive variant. `None` when infeasible,
/// i.e. every null vector has `Σ_{i<k} w_i = 0`.
pub fn nullspace_margin(inst: &Instance, k: usize, positive: bool) -> Result<Option<f64>, McError> {
    let (m, n) = (inst.m, inst.n);
    // Columns: w⁺ (n), then w⁻ for the support (and for the rest too in the
    // standard variant).
    let neg: Vec<usize> = (0..n).filter(|&j| j < k || !positive).collect();
    let cols = n + neg.len();
    let mut a = Vec::with_capacity((m + 1) * cols);
    for i in 0..m {
        a.extend_from_slice(&inst.a[i * n..(i + 1) * n]);
        a.extend(neg.iter().map(|&j| -inst.a(i, j)));
    }
    a.extend((0..n).map(|j| if j < k { -1.0 } else { 0.0 }));
    a.extend(neg.iter().map(|&j| if j < k { 1.0 } else { 0.0 }));
    let mut b = vec![0.0; m];
    b.push(1.0);
    let c: Vec<f64> = (0..n).map(|j| if j < k { 0.0 } else { 1.0 }).chain(neg.iter().map(|&j| if j < k { 0.0 } else { 1.0 })).collect();
    let lp = StandardFormLP::new(m + 1, cols, a, b, c).map_err(|e| McError::InvalidConfig(e.to_string()))?;
    let s = solve(&lp);
    match s.status {
        LpStatus::Optimal => Ok(Some(s.objective)),
        LpStatus::Infeasible => Ok(None),
        other => Err(McError::SolverFailure(other)),
    }
}

/// Whether some null vector `w` has `−Σ_{i<k} w_i ≥ Σ_{i≥k} |w_i|`
/// (`w_i` instead of `|w_i|`, and `w_i ≥ 0`, in the positive variant).
pub fn nullspace_failure_check(inst: &Instance, k: usize, positive: bool, success_tol: f64) -> Result<bool, McError> {
    Ok(matches!(nullspace_margin(inst, k, positive)?, Some(v) if v <= 1.0 + success_tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrialOutcome {
    Success,
    Failure,
    SolverFailure,
}

fn recovered(x_hat: &[f64], x_true: &[f64], tol: f64) -> bool {
    let scale = x_true.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    x_hat.iter().zip(x_true).all(|(a, b)| (a - b).abs() <= tol * scale)
}

/// Runs trial number `index` of `cfg`.
pub fn run_trial(cfg: &TrialConfig, index: u64) -> TrialOutcome {
    let inst = gen_instance(cfg.dims, index, cfg.seed, (cfg.magnitude_low, cfg.magnitude_high));
    let k = cfg.dims.k as usize;
    let failed = match (cfg.method, cfg.variant) {
        (TrialMethod::Recovery, Variant::PositiveL1) => {
            recover_positive(&inst).map(|x| !recovered(&x, &inst.x_true, cfg.success_tol))
        }
        (TrialMethod::Recovery, Variant::StandardL1 | Variant::Crosspolytope) => {
            recover_standard(&inst).map(|x| !recovered(&x, &inst.x_true, cfg.success_tol))
        }
        (TrialMethod::Recovery, Variant::PositiveSimplex) => {
            face_survival_trial(&inst, k, cfg.success_tol).map(|s| !s)
        }
        (TrialMethod::NullSpace, Variant::PositiveL1) => nullspace_failure_check(&inst, k, true, cfg.success_tol),
        (TrialMethod::NullSpace, _) => nullspace_failure_check(&inst, k, false, cfg.success_tol),
    };
    match failed {
        Ok(true) => TrialOutcome::Failure,
        Ok(false) => TrialOutcome::Success,
        Err(_) => TrialOutcome::SolverFailure,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateEstimate {
    pub failures: u64,
    /// Trials that completed; solver failures are excluded.
    pub trials: u64,
    pub solver_failures: u64,
    pub p_hat: f64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Set when solver failures exceed 0.1% of the requested trials.
    pub flagged: bool,
}

impl ErrorRateEstimate {
    pub fn from_counts(failures: u64, trials: u64, solver_failures: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials, Z_95);
        let total = trials + solver_failures;
        ErrorRateEstimate {
            failures,
            trials,
            solver_failures,
            p_hat: if trials == 0 { f64::NAN } else { failures as f64 / trials as f64 },
            ci_low,
            ci_high,
            flagged: total > 0 && solver_failures as f64 > SOLVER_FAILURE_FLAG * total as f64,
        }
    }

    /// Wilson interval at normal quantile `z`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.failures, self.trials, z)
    }

    /// Binomial standard error `√(p̂(1−p̂)/N)`.
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval for `failures` out of `trials`; `(0, 1)` when there
/// are no trials.
pub fn wilson_interval(failures: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if failures == trials { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (lo, hi)
}

/// Runs all trials of `cfg` on the current rayon pool.
pub fn estimate(cfg: &TrialConfig) -> Result<ErrorRateEstimate, McError> {
    cfg.validate()?;
    let (fail, ok, bad) = (0..cfg.trials)
        .into_par_iter()
        .map(|i| match run_trial(cfg, i) {
            TrialOutcome::Failure => (1u64, 0u64, 0u64),
            TrialOutcome::Success => (0, 1, 0),
            TrialOutcome::SolverFailure => (0, 0, 1),
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(ErrorRateEstimate::from_counts(fail, fail + ok, bad))
}

/// Monte Carlo estimate of one angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub a: u32,
    pub b: u32,
    pub hits: u64,
    pub samples: u64,
    pub p_hat: f64,
    pub std_error: f64,
}

/// Coordinates a sample of `kind` at `(a, b)` needs, or `None` if the index
/// is outside the angle's domain.
fn oracle_dim(kind: AngleKind, a: u32, b: u32) -> Option<usize> {
    use AngleKind::*;
    let ok = match kind {
        InternalType1 | InternalSimplex => a >= 1 && b + 1 >= a,
        InternalType2 => a >= 1 && b >= a,
        InternalFullCone => a >= 1 && b >= a,
        ExternalPosType2 => a <= b,
        ExternalPosType1 | ExternalStdType1 | ExternalSimplex | ExternalCrosspolytope => a < b,
    };
    ok.then(|| match kind {
        InternalType1 | InternalSimplex => b as usize + 1,
        _ => b as usize,
    })
}

/// Direct membership test of a standard Gaussian vector `z` in the cone
/// whose Gaussian measure is the angle.
///
/// Internal angles: `(a, b) = (k, l)`, or `(k, n)` for the full cone.
/// External angles: `(a, b) = (l, n)`. Faces of simplices are spanned by the
/// first vertices; projecting out the face directions replaces those
/// coordinates by their mean.
fn member(kind: AngleKind, a: usize, b: usize, z: &[f64]) -> bool {
    use AngleKind::*;
    let mean = |len: usize| z[..len].iter().sum::<f64>() / len as f64;
    match kind {
        // Tangent cone of T^{(l)} at the face of its first k vertices.
        InternalType1 | InternalSimplex => {
            let m = mean(b + 1);
            z[a..=b].iter().all(|&v| v >= m)
        }
        // {w ∈ ℝ^l : w_j ≥ 0 (j ≥ k), −Σ_{i<k} w_i ≥ Σ_{j≥k} w_j}
        InternalType2 => {
            z[a..b].iter().all(|&v| v >= 0.0) && -z[..a].iter().sum::<f64>() >= z[a..b].iter().sum::<f64>()
        }
        // {w ∈ ℝ^n : −Σ_{i<k} w_i ≥ Σ_{j≥k} |w_j|}
        InternalFullCone => -z[..a].iter().sum::<f64>() >= z[a..b].iter().map(|v| v.abs()).sum::<f64>(),
        // Normal cone of conv(e₁…e_{l+1}) in conv(0, e₁, …, e_n).
        ExternalPosType1 => {
            let m = mean(a + 1);
            m >= 0.0 && z[a + 1..b].iter().all(|&v| v <= m)
        }
        // Normal cone of a codimension-(n−l) face of the orthant.
        ExternalPosType2 => z[..b - a].iter().all(|&v| v <= 0.0),
        // Normal cone of conv(e₁…e_{l+1}) in conv(0, e₁…e_{l+1}, ±e_{l+2}…±e_n).
        ExternalStdType1 => {
            let m = mean(a + 1);
            m >= 0.0 && z[a + 1..b].iter().all(|&v| v.abs() <= m)
        }
        ExternalSimplex => {
            let m = mean(a + 1);
            z[a + 1..b].iter().all(|&v| v <= m)
        }
        // The crosspolytope is full-dimensional, so the mean direction is a
        // normal direction too; `m ≥ 0` only follows from the rest when
        // l + 1 < n.
        ExternalCrosspolytope => {
            let m = mean(a + 1);
            m >= 0.0 && z[a + 1..b].iter().all(|&v| v.abs() <= m)
        }
    }
}

/// Membership estimates of `kind` at every index in `indices`, all from the
/// same `samples` Gaussian vectors.
pub fn angle_oracle(
    kind: AngleKind,
    indices: &[(u32, u32)],
    samples: u64,
    seed: u64,
) -> Result<Vec<OracleEstimate>, McError> {
    let mut dim = 0;
    for &(a, b) in indices {
        let d = oracle_dim(kind, a, b).ok_or(McError::BadOracleIndex { kind, a, b })?;
        dim = dim.max(d);
    }
    let chunks = samples.div_ceil(ORACLE_CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed, c);
            let count = ORACLE_CHUNK.min(samples - c * ORACLE_CHUNK);
            let mut z = vec![0.0; dim];
            let mut h = vec![0u64; indices.len()];
            for _ in 0..count {
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                for (slot, &(a, b)) in h.iter_mut().zip(indices) {
                    *slot += member(kind, a as usize, b as usize, &z) as u64;
                }
            }
            h
        })
        .reduce(
            || vec![0u64; indices.len()],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
                x
            },
        );
    Ok(indices
        .iter()
        .zip(hits)
        .map(|(&(a, b), h)| {
            let p = h as f64 / samples as f64;
            OracleEstimate { a, b, hits: h, samples, p_hat: p, std_error: (p * (1.0 - p) / samples as f64).sqrt() }
        })
        .collect())
}
