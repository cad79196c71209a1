//! Dense two-phase primal simplex for `min cᵀx, Ax = b, x ≥ 0`.
//!
//! Revised simplex on an explicit basis inverse, updated by one eta
//! (rank-one) step per pivot and recomputed from scratch every
//! [`REFACTOR_EVERY`] pivots or whenever `‖B·x_B − b‖∞` drifts above `1e-10`.
//! Pricing is Dantzig's rule until `10·(r+c)` iterations, then Bland's.
//! Ties are always broken by lowest variable index, so the pivot sequence
//! is a deterministic function of the input bits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const REFACTOR_EVERY: usize = 100;
const DRIFT_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-9;
const PRICE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("matrix has {got} entries, expected {rows}×{cols}")]
    Shape { rows: usize, cols: usize, got: usize },
    #[error("rhs has length {got}, expected {want}")]
    RhsLength { want: usize, got: usize },
    #[error("cost has length {got}, expected {want}")]
    CostLength { want: usize, got: usize },
    #[error("non-finite entry in the problem data")]
    NonFinite,
}

/// `min cᵀx` subject to `Ax = b`, `x ≥ 0`, with `A` stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardFormLP {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl StandardFormLP {
    pub fn new(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self, LpError> {
        if a.len() != rows * cols {
            return Err(LpError::Shape { rows, cols, got: a.len() });
        }
        if b.len() != rows {
            return Err(LpError::RhsLength { want: rows, got: b.len() });
        }
        if c.len() != cols {
            return Err(LpError::CostLength { want: cols, got: c.len() });
        }
        if a.iter().chain(&b).chain(&c).any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite);
        }
        Ok(StandardFormLP { rows, cols, a, b, c })
    }

    pub fn from_rows(a: &[Vec<f64>], b: Vec<f64>, c: Vec<f64>) -> Result<Self, LpError> {
        let cols = c.len();
        let mut flat = Vec::with_capacity(a.len() * cols);
        for row in a {
            if row.len() != cols {
                return Err(LpError::Shape { rows: a.len(), cols, got: row.len() * a.len() });
            }
            flat.extend_from_slice(row);
        }
        Self::new(a.len(), cols, flat, b, c)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn cost(&self) -> &[f64] {
        &self.c
    }

    /// `‖Ax − b‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        (0..self.rows)
            .map(|i| {
                let s: f64 = (0..self.cols).map(|j| self.a(i, j) * x[j]).sum();
                (s - self.b[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The final basis failed the feasibility check even after
    /// refactorisation.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Simplex multipliers `y = c_Bᵀ B⁻¹` of the final basis (phase 2).
    pub duals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub feas_tol: f64,
    /// Defaults to `50·(r+c)` when `None`.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { feas_tol: 1e-9, max_iter: None }
    }
}

/// Inverts a dense `n×n` row-major matrix by Gauss–Jordan elimination with
/// partial pivoting. `None` if a pivot falls below `1e-12` of the largest
/// entry.
fn invert(m: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        let p = a[piv * n + col];
        if p.abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        let ip = 1.0 / p;
        for j in 0..n {
            a[col * n + j] *= ip;
            inv[col * n + j] *= ip;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[r * n + j] -= f * a[col * n + j];
                inv[r * n + j] -= f * inv[col * n + j];
            }
        }
    }
    Some(inv)
}

/// Working state over the columns of `A` followed by one artificial per row.
struct Tableau<'a> {
    lp: &'a StandardFormLP,
    /// Row signs that make `b ≥ 0`.
    sign: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots_since_refactor: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl<'a> Tableau<'a> {
    fn new(lp: &'a StandardFormLP) -> Self {
        let r = lp.rows;
        let sign: Vec<f64> = lp.b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let b: Vec<f64> = lp.b.iter().zip(&sign).map(|(v, s)| v * s).collect();
        let mut binv = vec![0.0; r * r];
        for i in 0..r {
            binv[i * r + i] = 1.0;
        }
        Tableau {
            lp,
            xb: b.clone(),
            sign,
            b,
            basis: (lp.cols..lp.cols + r).collect(),
            binv,
            pivots_since_refactor: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.lp.cols
    }

    /// Entry `(i, j)` of the sign-adjusted `[A | I]`.
    fn entry(&self, i: usize, j: usize) -> f64 {
        if self.is_artificial(j) {
            if j - self.lp.cols == i {
                1.0
            } else {
                0.0
            }
        } else {
            self.sign[i] * self.lp.a(i, j)
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.lp.rows).map(|i| self.entry(i, j)).collect()
    }

    /// `B⁻¹·v`.
    fn solve(&self, v: &[f64]) -> Vec<f64> {
        let r = self.lp.rows;
        (0..r).map(|i| (0..r).map(|k| self.binv[i * r + k] * v[k]).sum()).collect()
    }

    /// `yᵀ = c_Bᵀ B⁻¹`.
    fn multipliers(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let r = self.lp.rows;
        let cb: Vec<f64> = self.basis.iter().map(|&j| cost(j)).collect();
        (0..r).map(|k| (0..r).map(|i| cb[i] * self.binv[i * r + k]).sum()).collect()
    }

    fn drift(&self) -> f64 {
        let r = self.lp.rows;
        let mut worst = 0.0f64;
        for i in 0..r {
            let s: f64 = self.basis.iter().zip(&self.xb).map(|(&j, &x)| self.entry(i, j) * x).sum();
            worst = worst.max((s - self.b[i]).abs());
        }
        worst
    }

    fn refactor(&mut self) -> bool {
        let r = self.lp.rows;
        let mut bm = vec![0.0; r * r];
        for (col, &j) in self.basis.iter().enumerate() {
            for i in 0..r {
                bm[i * r + col] = self.entry(i, j);
            }
        }
        match invert(&bm, r) {
            Some(inv) => {
                self.binv = inv;
                self.xb = self.solve(&self.b);
                self.pivots_since_refactor = 0;
                true
            }
            None => false,
        }
    }

    fn pivot(&mut self, row: usize, entering: usize, alpha: &[f64]) {
        let r = self.lp.rows;
        let p = alpha[row];
        for k in 0..r {
            self.binv[row * r + k] /= p;
        }
        let theta = self.xb[row] / p;
        for i in 0..r {
            if i == row {
                continue;
            }
            let f = alpha[i];
            if f != 0.0 {
                for k in 0..r {
                    self.binv[i * r + k] -= f * self.binv[row * r + k];
                }
                self.xb[i] -= f * theta;
            }
        }
        self.xb[row] = theta;
        self.basis[row] = entering;
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY || self.drift() > DRIFT_TOL {
            self.refactor();
        }
    }

    /// One simplex iteration. `allowed` filters entering candidates.
    fn step(&mut self, cost: &dyn Fn(usize) -> f64, allowed: &dyn Fn(usize) -> bool, bland: bool) -> Step {
        let total = self.lp.cols + self.lp.rows;
        let y = self.multipliers(cost);
        let mut entering = None;
        let mut best = -PRICE_TOL;
        for j in 0..total {
            if !allowed(j) || self.basis.contains(&j) {
                continue;
            }
            let d = cost(j) - (0..self.lp.rows).map(|i| y[i] * self.entry(i, j)).sum::<f64>();
            if d < best {
                entering = Some(j);
                if bland {
                    break;
                }
                best = d;
            }
        }
        let Some(q) = entering else {
            return Step::Optimal;
        };
        let alpha = self.solve(&self.column(q));
        let mut leave: Option<(usize, f64)> = None;
        for (i, &a) in alpha.iter().enumerate() {
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.xb[i].max(0.0) / a;
            leave = match leave {
                None => Some((i, ratio)),
                Some((li, lr)) => {
                    let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                    if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                        Some((i, ratio))
                    } else {
                        Some((li, lr))
                    }
                }
            };
        }
        match leave {
            None => Step::Unbounded,
            Some((row, _)) => {
                self.pivot(row, q, &alpha);
                Step::Pivoted
            }
        }
    }

    fn run(
        &mut self,
        cost: &dyn Fn(usize) -> f64,
        allowed: &dyn Fn(usize) -> bool,
        iterations: &mut usize,
        max_iter: usize,
        bland_after: usize,
    ) -> Option<Step> {
        loop {
            if *iterations >= max_iter {
                return None;
            }
            let bland = *iterations >= bland_after;
            match self.step(cost, allowed, bland) {
                Step::Pivoted => *iterations += 1,
                s => return Some(s),
            }
        }
    }

    /// Pivots basic artificials at zero level out of the basis where some
    /// structural column allows it. Those that remain sit on redundant rows.
    fn expel_artificials(&mut self) {
        for row in 0..self.lp.rows {
            if !self.is_artificial(self.basis[row]) {
                continue;
            }
            let r = self.lp.rows;
            let binv_row: Vec<f64> = (0..r).map(|k| self.binv[row * r + k]).collect();
            let candidate = (0..self.lp.cols).find(|&j| {
                !self.basis.contains(&j)
                    && (0..r).map(|i| binv_row[i] * self.entry(i, j)).sum::<f64>().abs() > PIVOT_TOL
            });
            if let Some(j) = candidate {
                let alpha = self.solve(&self.column(j));
                self.pivot(row, j, &alpha);
            }
        }
    }
}

/// Solves `lp` with the default options.
pub fn solve(lp: &StandardFormLP) -> LpSolution {
    solve_with(lp, &SolveOptions::default())
}

pub fn solve_with(lp: &StandardFormLP, opts: &SolveOptions) -> LpSolution {
    let (r, c) = (lp.rows, lp.cols);
    let max_iter = opts.max_iter.unwrap_or(50 * (r + c));
    let bland_after = 10 * (r + c);
    let bscale = 1.0 + lp.b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let finish = |status, x: Vec<f64>, iterations, duals| {
        let objective = if status == LpStatus::Optimal {
            x.iter().zip(&lp.c).map(|(a, b)| a * b).sum()
        } else {
            f64::NAN
        };
        LpSolution { status, x, objective, iterations, duals }
    };
    let mut t = Tableau::new(lp);
    let mut iterations = 0;

    let phase1_cost = |j: usize| if j >= c { 1.0 } else { 0.0 };
    match t.run(&phase1_cost, &|_| true, &mut iterations, max_iter, bland_after) {
        None => return finish(LpStatus::IterationLimit, vec![0.0; c], iterations, Vec::new()),
        Some(Step::Unbounded) => {
            // Phase 1 is bounded below by zero; this only happens numerically.
            return finish(LpStatus::NumericalFailure, vec![0.0; c], iterations, Vec::new());
        }
        _ => {}
    }
    let infeas: f64 = t.basis.iter().zip(&t.xb).filter(|(&j, _)| j >= c).map(|(_, &v)| v).sum();
    if infeas > opts.feas_tol * bscale {
        return finish(LpStatus::Infeasible, vec![0.0; c], iterations, Vec::new());
    }
    t.expel_artificials();

    let phase2_cost = |j: usize| if j >= c { 0.0 } else { lp.c[j] };
    let structural = |j: usize| j < c;
    let outcome = t.run(&phase2_cost, &structural, &mut iterations, max_iter, bland_after);
    let mut x = vec![0.0; c];
    let collect = |t: &Tableau, x: &mut Vec<f64>| {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (&j, &v) in t.basis.iter().zip(&t.xb) {
            if j < c {
                x[j] = v;
            }
        }
    };
    collect(&t, &mut x);
    match outcome {
        None => return finish(LpStatus::IterationLimit, x, iterations, Vec::new()),
        Some(Step::Unbounded) => return finish(LpStatus::Unbounded, x, iterations, Vec::new()),
        _ => {}
    }
    let ok = |x: &[f64]| lp.residual(x) <= opts.feas_tol * bscale && x.iter().all(|&v| v >= -opts.feas_tol);
    if !ok(&x) {
        if !t.refactor() {
            return finish(LpStatus::NumericalFailure, x, iterations, Vec::new());
        }
        collect(&t, &mut x);
        if !ok(&x) {
            return finish(LpStatus::NumericalFailure, x, iterations, Vec::new());
        }
    }
    let y = t.multipliers(&phase2_cost);
    let duals: Vec<f64> = y.iter().zip(&t.sign).map(|(v, s)| v * s).collect();
    finish(LpStatus::Optimal, x, iterations, duals)
}
