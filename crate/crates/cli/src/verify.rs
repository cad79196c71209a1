//! Invariant checks behind `l1exact verify`.

use l1exact::angles::{external_crosspolytope, external_std_type1, internal_simplex, internal_type1, AngleConfig};
use l1exact::exactprob::{ExactEngine, ProbError, ProblemDims, Variant};
use l1exact::montecarlo::{estimate, TrialConfig, Z_99};
use serde_json::{json, Map};

use crate::args::{Level, VerifyArgs};
use crate::commands::angle_config;
use crate::output::{OutputRecord, Table};
use crate::CliError;

pub const TABLE_TOL: f64 = 1.5e-3;
pub const COMPLEMENT_TOL: f64 = 1e-8;
pub const ANGLE_TOL: f64 = 1e-10;

pub const TABLE1: [f64; 6] = [0.8235, 0.6815, 0.5113, 0.3427, 0.2029, 0.1053];
pub const TABLE2: [f64; 6] = [0.7890, 0.6786, 0.5530, 0.4248, 0.3064, 0.2069];
/// `(k, m, n, simplex, positive)`; `None` where no value is tabulated.
pub const TABLE3: [(u32, u32, u32, f64, Option<f64>); 6] = [
    (3, 5, 8, 0.1265, Some(0.1528)),
    (3, 4, 6, 0.1539, Some(0.2305)),
    (4, 5, 8, 0.3401, Some(0.3937)),
    (3, 5, 9, 0.2091, None),
    (3, 4, 7, 0.3077, None),
    (4, 5, 9, 0.4789, None),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Distance from the tolerance; negative on failure.
    pub margin: f64,
    pub detail: String,
}

impl CheckResult {
    fn from_margin(name: &'static str, margin: f64, detail: String) -> Self {
        CheckResult { name, passed: margin > 0.0, margin, detail }
    }

    fn errored(name: &'static str, e: impl std::fmt::Display) -> Self {
        CheckResult { name, passed: false, margin: f64::NAN, detail: format!("error: {e}") }
    }
}

fn dims(k: u32, m: u32, n: u32) -> ProblemDims {
    ProblemDims::new(k, m, n).expect("grid dimensions are valid")
}

fn golden(engine: &ExactEngine, variant: Variant, k: u32, n: u32, ms: std::ops::RangeInclusive<u32>, want: &[f64]) -> Result<(f64, u32), ProbError> {
    let mut worst = (0.0f64, 0);
    for (m, w) in ms.zip(want) {
        let d = (engine.p_err(variant, dims(k, m, n))?.value - w).abs();
        if d > worst.0 {
            worst = (d, m);
        }
    }
    Ok(worst)
}

pub fn check_table1(engine: &ExactEngine) -> CheckResult {
    match golden(engine, Variant::PositiveL1, 12, 36, 17..=22, &TABLE1) {
        Ok((d, m)) => CheckResult::from_margin("table1_golden", TABLE_TOL - d, format!("max deviation {d:.2e} at m={m}")),
        Err(e) => CheckResult::errored("table1_golden", e),
    }
}

pub fn check_table2(engine: &ExactEngine) -> CheckResult {
    match golden(engine, Variant::StandardL1, 6, 40, 14..=19, &TABLE2) {
        Ok((d, m)) => CheckResult::from_margin("table2_golden", TABLE_TOL - d, format!("max deviation {d:.2e} at m={m}")),
        Err(e) => CheckResult::errored("table2_golden", e),
    }
}

pub fn check_table3(engine: &ExactEngine) -> CheckResult {
    let run = || -> Result<(f64, String), ProbError> {
        let mut worst = (0.0f64, String::new());
        for &(k, m, n, simplex, pos) in &TABLE3 {
            let mut cmp = vec![(Variant::PositiveSimplex, simplex)];
            cmp.extend(pos.map(|p| (Variant::PositiveL1, p)));
            for (v, want) in cmp {
                let d = (engine.p_err(v, dims(k, m, n))?.value - want).abs();
                if d > worst.0 {
                    worst = (d, format!("{v:?} at ({k},{m},{n})"));
                }
            }
        }
        Ok(worst)
    };
    match run() {
        Ok((d, at)) => CheckResult::from_margin("table3_golden", TABLE_TOL - d, format!("max deviation {d:.2e} ({at})")),
        Err(e) => CheckResult::errored("table3_golden", e),
    }
}

/// All `(k, m, n)` with `k ∈ ks`, `n ∈ ns`, `k ≤ m ≤ n`.
pub fn grid(ks: std::ops::RangeInclusive<u32>, ns: std::ops::RangeInclusive<u32>) -> Vec<ProblemDims> {
    let mut out = Vec::new();
    for n in ns {
        for k in ks.clone().filter(|&k| k <= n) {
            for m in k..=n {
                out.push(dims(k, m, n));
            }
        }
    }
    out
}

pub fn check_complement(engine: &ExactEngine, cells: &[ProblemDims]) -> CheckResult {
    let run = || -> Result<(f64, String), ProbError> {
        let mut worst = (-1.0f64, String::new());
        for &d in cells {
            for v in Variant::ALL {
                let s = engine.p_err(v, d)?.value + engine.p_complement(v, d)?.value;
                let dev = (s - 1.0).abs();
                if dev > worst.0 {
                    worst = (dev, format!("{v:?} at ({},{},{})", d.k, d.m, d.n));
                }
            }
        }
        Ok(worst)
    };
    match run() {
        Ok((d, at)) => CheckResult::from_margin(
            "complement_identity",
            COMPLEMENT_TOL - d,
            format!("{} cells, max |p_err + p_complement - 1| = {d:.2e} ({at})", cells.len()),
        ),
        Err(e) => CheckResult::errored("complement_identity", e),
    }
}

pub fn check_cross_equals_std(engine: &ExactEngine, cells: &[ProblemDims]) -> CheckResult {
    let run = || -> Result<f64, ProbError> {
        let mut worst = 0.0f64;
        for &d in cells {
            let a = engine.p_err(Variant::Crosspolytope, d)?.value;
            let b = engine.p_err(Variant::StandardL1, d)?.value;
            worst = worst.max((a - b).abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(d) => CheckResult::from_margin("crosspolytope_equals_standard", COMPLEMENT_TOL - d, format!("max difference {d:.2e}")),
        Err(e) => CheckResult::errored("crosspolytope_equals_standard", e),
    }
}

/// `simplex(k,m,n) < positive(k,m,n) < simplex(k,m,n+1)`, each gap larger
/// than the summed error bounds. Margin is the smallest such excess.
pub fn check_sandwich(engine: &ExactEngine, cells: &[ProblemDims]) -> CheckResult {
    let run = || -> Result<(f64, String), ProbError> {
        let mut worst = (f64::INFINITY, String::new());
        for &d in cells {
            let s = engine.p_err(Variant::PositiveSimplex, d)?;
            let p = engine.p_err(Variant::PositiveL1, d)?;
            let s1 = engine.p_err(Variant::PositiveSimplex, dims(d.k, d.m, d.n + 1))?;
            let lo = p.value - s.value - (p.error_bound + s.error_bound);
            let hi = s1.value - p.value - (s1.error_bound + p.error_bound);
            let m = lo.min(hi);
            if m < worst.0 {
                worst = (m, format!("({},{},{})", d.k, d.m, d.n));
            }
        }
        Ok(worst)
    };
    match run() {
        Ok((m, at)) => CheckResult::from_margin("sandwich", m, format!("{} cells, tightest at {at}", cells.len())),
        Err(e) => CheckResult::errored("sandwich", e),
    }
}

/// Internal type-1 against the real-line simplex formula and the standard
/// external angle against the crosspolytope one, for `k ≤ l < n ≤ n_max`.
pub fn check_angle_formulas(cfg: &AngleConfig, n_max: u32) -> CheckResult {
    let q = &cfg.quadrature;
    let run = || -> Result<(f64, String), l1exact::angles::AngleError> {
        let mut worst = (0.0f64, String::new());
        for l in 1..n_max {
            for k in 1..=l {
                let a = internal_type1(k, l, q)?.value;
                let b = internal_simplex(k, l, q)?.value;
                if (a - b).abs() > worst.0 {
                    worst = ((a - b).abs(), format!("internal ({k},{l})"));
                }
            }
            for n in l + 1..=n_max {
                let a = external_std_type1(l, n, cfg)?.value;
                let b = external_crosspolytope(l, n, q)?.value;
                if (a - b).abs() > worst.0 {
                    worst = ((a - b).abs(), format!("external ({l},{n})"));
                }
            }
        }
        Ok(worst)
    };
    match run() {
        Ok((d, at)) => CheckResult::from_margin(
            "angle_cross_formulas",
            ANGLE_TOL - d,
            format!("n <= {n_max}, max difference {d:.2e} {at}"),
        ),
        Err(e) => CheckResult::errored("angle_cross_formulas", e),
    }
}

/// The three Monte Carlo cells: `(variant, k, m, n)`.
pub const MC_CELLS: [(Variant, u32, u32, u32); 3] =
    [(Variant::PositiveL1, 12, 19, 36), (Variant::StandardL1, 6, 16, 40), (Variant::PositiveSimplex, 3, 5, 8)];

/// Exact value inside the 99% Wilson interval of a `trials`-trial run.
pub fn check_monte_carlo(engine: &ExactEngine, trials: u64, seed: u64) -> CheckResult {
    let mut margin = f64::INFINITY;
    let mut parts = Vec::new();
    for (v, k, m, n) in MC_CELLS {
        let d = dims(k, m, n);
        let exact = match engine.p_err(v, d) {
            Ok(b) => b.value,
            Err(e) => return CheckResult::errored("monte_carlo_vs_exact", e),
        };
        let est = match estimate(&TrialConfig::new(d, v, trials, seed)) {
            Ok(e) => e,
            Err(e) => return CheckResult::errored("monte_carlo_vs_exact", e),
        };
        let (lo, hi) = est.interval(Z_99);
        margin = margin.min((exact - lo).min(hi - exact));
        parts.push(format!("{v:?} ({k},{m},{n}): {exact:.4} in [{lo:.4}, {hi:.4}]"));
    }
    CheckResult::from_margin("monte_carlo_vs_exact", margin, parts.join("; "))
}

/// Runs the suite at `level`.
pub fn run_checks(level: Level, cfg: AngleConfig, seed: u64) -> Vec<CheckResult> {
    let engine = ExactEngine::new(cfg);
    let full = level == Level::Full;
    let cells = if full { grid(1..=8, 6..=24) } else { grid(1..=4, 6..=14) };
    let table3: Vec<ProblemDims> = TABLE3.iter().map(|&(k, m, n, ..)| dims(k, m, n)).collect();
    let sandwich_cells: Vec<ProblemDims> = if full {
        grid(1..=5, 2..=12).into_iter().filter(|d| d.m < d.n).collect()
    } else {
        table3
    };
    let mut out = vec![
        check_table1(&engine),
        check_table2(&engine),
        check_table3(&engine),
        check_complement(&engine, &cells),
        check_cross_equals_std(&engine, &cells),
        check_sandwich(&engine, &sandwich_cells),
        check_angle_formulas(&cfg, if full { 40 } else { 20 }),
    ];
    if full {
        out.push(check_monte_carlo(&engine, 10_000, seed));
    }
    out
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(OutputRecord, usize), CliError> {
    let seed = a.seed.unwrap_or(1);
    let results = run_checks(a.level, angle_config(a.external_prefactor), seed);
    let mut table = Table::new(&["check", "status", "margin", "detail"]);
    for r in &results {
        let status = if r.passed { "pass" } else { "FAIL" };
        table.push(vec![r.name.into(), status.into(), r.margin.into(), r.detail.clone().into()]);
    }
    let level = if a.level == Level::Full { "full" } else { "quick" };
    let mut command = format!("l1exact verify --level {level}");
    let mut params = Map::new();
    params.insert("level".into(), json!(level));
    if a.level == Level::Full {
        command.push_str(&format!(" --seed {seed}"));
    }
    if a.external_prefactor != crate::args::PrefactorArg::Gaussian {
        command.push_str(" --external-prefactor printed");
        params.insert("external_prefactor".into(), json!("printed"));
    }
    let mut rec = OutputRecord::new(command, params, table);
    if a.level == Level::Full {
        rec.seed = Some(seed);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    Ok((rec, failed))
}
