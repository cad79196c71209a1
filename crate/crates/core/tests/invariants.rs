//! Whole-library invariants over the full `k ≤ 12, n ≤ 40` grid, and a
//! small exact-vs-simulation cross-check.

use l1exact::exactprob::{ExactEngine, ProblemDims, Variant};
use l1exact::montecarlo::{estimate, TrialConfig, TrialMethod, Z_99};

fn dims(k: u32, m: u32, n: u32) -> ProblemDims {
    ProblemDims::new(k, m, n).unwrap()
}

#[test]
fn complement_monotonicity_and_ranges() {
    let e = ExactEngine::default();
    let mut worst_sum = 0.0f64;
    for n in 1..=40u32 {
        for k in 1..=n.min(12) {
            for v in Variant::ALL {
                let mut prev = f64::INFINITY;
                for m in k..=n {
                    let d = dims(k, m, n);
                    let p = e.p_err(v, d).unwrap();
                    let c = e.p_complement(v, d).unwrap();
                    worst_sum = worst_sum.max((p.value + c.value - 1.0).abs());
                    assert!((0.0..=1.0).contains(&p.value), "{v:?} {d:?}: {}", p.value);
                    assert!(p.terms.iter().chain(&c.terms).all(|t| t.value >= 0.0), "{v:?} {d:?}");
                    assert!(p.value <= prev + p.error_bound + 1e-12, "{v:?} {d:?} rises: {prev} -> {}", p.value);
                    prev = p.value;
                }
                assert_eq!(e.p_err(v, dims(k, n, n)).unwrap().value, 0.0);
            }
        }
    }
    assert!(worst_sum <= 1e-8, "complement identity off by {worst_sum:e}");
}

#[test]
fn crosspolytope_matches_standard_to_forty() {
    let e = ExactEngine::default();
    for n in 1..=40u32 {
        for k in 1..=n.min(12) {
            for m in k..=n {
                let d = dims(k, m, n);
                let a = e.p_err(Variant::Crosspolytope, d).unwrap().value;
                let b = e.p_err(Variant::StandardL1, d).unwrap().value;
                assert!((a - b).abs() <= 1e-8, "{d:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn simulation_brackets_exact_value() {
    let e = ExactEngine::default();
    for (v, method, d) in [
        (Variant::PositiveL1, TrialMethod::NullSpace, dims(4, 9, 20)),
        (Variant::StandardL1, TrialMethod::Recovery, dims(3, 8, 16)),
        (Variant::PositiveSimplex, TrialMethod::Recovery, dims(2, 4, 9)),
    ] {
        let exact = e.p_err(v, d).unwrap().value;
        let mut cfg = TrialConfig::new(d, v, 3000, 41);
        cfg.method = method;
        let (lo, hi) = estimate(&cfg).unwrap().interval(Z_99);
        assert!(lo <= exact && exact <= hi, "{v:?} {d:?}: {exact} not in [{lo}, {hi}]");
    }
}
