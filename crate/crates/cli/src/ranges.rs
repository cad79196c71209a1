//! Parsers for the `--m` and `--beta` range arguments.

use std::ops::RangeInclusive;

use thiserror::Error;

/// Longest real range accepted, to keep typos like a zero-ish step from
/// allocating without bound.
pub const MAX_REAL_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RangeError {
    #[error("empty range specification")]
    Empty,
    #[error("cannot parse {0:?} as a number")]
    Number(String),
    #[error("range start {start} exceeds end {end}")]
    Reversed { start: String, end: String },
    #[error("step must be positive and finite, got {0}")]
    Step(f64),
    #[error("range has more than {MAX_REAL_POINTS} points")]
    TooLong,
    #[error("real ranges need a step, as in 0.1..0.4:0.05")]
    MissingStep,
}

fn int(s: &str) -> Result<u32, RangeError> {
    s.trim().parse().map_err(|_| RangeError::Number(s.to_string()))
}

fn real(s: &str) -> Result<f64, RangeError> {
    let v: f64 = s.trim().parse().map_err(|_| RangeError::Number(s.to_string()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(RangeError::Number(s.to_string()))
    }
}

/// `"19"`, `"17..22"` or `"17..=22"`; both forms of the range include the
/// end point.
pub fn parse_int_range(s: &str) -> Result<RangeInclusive<u32>, RangeError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RangeError::Empty);
    }
    let Some((a, b)) = s.split_once("..") else {
        let v = int(s)?;
        return Ok(v..=v);
    };
    let b = b.strip_prefix('=').unwrap_or(b);
    let (start, end) = (int(a)?, int(b)?);
    if start > end {
        return Err(RangeError::Reversed { start: start.to_string(), end: end.to_string() });
    }
    Ok(start..=end)
}

/// `"0.2"` or `"start..end:step"`. Points are `start + i·step` up to `end`,
/// which is included when it lies on the grid to within `1e-9` steps.
pub fn parse_real_range(s: &str) -> Result<Vec<f64>, RangeError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RangeError::Empty);
    }
    let Some((a, rest)) = s.split_once("..") else {
        return Ok(vec![real(s)?]);
    };
    let (b, step) = rest.split_once(':').ok_or(RangeError::MissingStep)?;
    let (start, end, step) = (real(a)?, real(b)?, real(step)?);
    if !(step > 0.0) {
        return Err(RangeError::Step(step));
    }
    if start > end {
        return Err(RangeError::Reversed { start: start.to_string(), end: end.to_string() });
    }
    let span = (end - start) / step + 1e-9;
    if !(span < MAX_REAL_POINTS as f64) {
        return Err(RangeError::TooLong);
    }
    let count = span.floor() as usize + 1;
    let v: Vec<f64> = (0..count).map(|i| start + i as f64 * step).collect();
    // A step below the spacing of floats at `start` repeats points.
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RangeError::Step(step));
    }
    Ok(v)
}
