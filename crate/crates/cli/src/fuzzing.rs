//! Entry points shared by the cargo-fuzz targets and the seed-replay test.
//! Each takes raw bytes, must not panic on any input, and panics if an
//! invariant of the parsed value fails.

use l1exact::linprog::{solve, LpStatus, StandardFormLP};

use crate::output::Table;
use crate::ranges::{parse_int_range, parse_real_range};

pub fn ranges(data: &[u8]) {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_int_range(s) {
        assert!(r.start() <= r.end());
        let again = parse_int_range(&format!("{}..={}", r.start(), r.end())).expect("canonical form parses");
        assert_eq!(again, r);
    }
    if let Ok(v) = parse_real_range(s) {
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}

pub fn csv_table(data: &[u8]) {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(t) = Table::from_csv(s) else { return };
    let first = t.to_csv();
    let back = Table::from_csv(&first).expect("emitted csv parses");
    assert_eq!(back.to_csv(), first);
}

/// Decodes `rows·cols` small integers (and `b`, `c`) from bytes.
pub fn decode_lp(data: &[u8]) -> Option<StandardFormLP> {
    let (&r, rest) = data.split_first()?;
    let (&c, rest) = rest.split_first()?;
    let rows = 1 + r as usize % 6;
    let cols = 1 + c as usize % 10;
    let mut vals = rest.iter().map(|&b| (b as i8 as f64) / 16.0).chain(std::iter::repeat(0.0));
    let a: Vec<f64> = vals.by_ref().take(rows * cols).collect();
    let b: Vec<f64> = vals.by_ref().take(rows).collect();
    let cost: Vec<f64> = vals.by_ref().take(cols).collect();
    StandardFormLP::new(rows, cols, a, b, cost).ok()
}

pub fn lp_solve(data: &[u8]) {
    let Some(lp) = decode_lp(data) else { return };
    let sol = solve(&lp);
    if sol.status != LpStatus::Optimal {
        return;
    }
    let scale = 1.0 + lp.rhs().iter().chain(lp.cost()).fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-7 * scale * (1.0 + sol.x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    assert!(sol.x.iter().all(|&v| v >= -tol), "negative x {:?}", sol.x);
    assert!(lp.residual(&sol.x) <= tol, "residual {}", lp.residual(&sol.x));
    let cx: f64 = lp.cost().iter().zip(&sol.x).map(|(c, x)| c * x).sum();
    assert!((cx - sol.objective).abs() <= tol, "objective {} vs {cx}", sol.objective);
    let by: f64 = lp.rhs().iter().zip(&sol.duals).map(|(b, y)| b * y).sum();
    assert!((by - sol.objective).abs() <= tol * scale, "dual objective {by} vs {}", sol.objective);
}
