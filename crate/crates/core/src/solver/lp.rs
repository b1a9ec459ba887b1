//! Dense bounded-variable simplex.
//!
//! Every row `r` gets a logical variable `s_r = a_r x` carrying the row
//! bounds, so the system is `A x - s = 0` and every variable is boxed.
//! The tableau stores `B^-1 [A  -I]` up to sign for the current basis;
//! with a zero right-hand side the basic values follow from the
//! nonbasic ones alone.
//!
//! [`Simplex::primal`] is a composite phase-1/phase-2 primal method with
//! Dantzig pricing and Bland's rule after a run of degenerate pivots.
//! [`Simplex::reoptimize`] runs the dual method from the current basis
//! after bounds change, which is how branch-and-bound nodes are solved.

use crate::model::{LinearModel, Sense, VarKind};
use crate::solver::Tolerances;

/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;
/// Times a finished solve re-checks freshly computed basic values.
const MAX_RECHECKS: usize = 3;
/// Base size of the cost shifts used by the dual method.
const PERTURBATION: f64 = 1e-7;
/// Pivots between tableau rebuilds from the original rows.
const REBUILD_EVERY: usize = 4000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Row-bounded LP data: `row_lo <= a_r x <= row_hi`, `col_lo <= x <= col_hi`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub n: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
    pub col_lo: Vec<f64>,
    pub col_hi: Vec<f64>,
    pub integer: Vec<bool>,
}

impl LpProblem {
    pub fn from_model(model: &LinearModel) -> Self {
        let vars = model.variables();
        let mut p = LpProblem {
            n: vars.len(),
            rows: Vec::new(),
            row_lo: Vec::new(),
            row_hi: Vec::new(),
            col_lo: vars.iter().map(|v| v.lo).collect(),
            col_hi: vars.iter().map(|v| v.hi).collect(),
            integer: vars.iter().map(|v| v.kind == VarKind::Binary).collect(),
        };
        for c in model.constraints() {
            let (lo, hi) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            p.push_row(c.terms.iter().map(|&(a, v)| (v.0, a)).collect(), lo, hi);
        }
        p
    }

    pub fn push_row(&mut self, terms: Vec<(usize, f64)>, lo: f64, hi: f64) {
        self.rows.push(terms);
        self.row_lo.push(lo);
        self.row_hi.push(hi);
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn dense_cost(&self, terms: &[(f64, crate::model::VarId)]) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        for &(a, v) in terms {
            c[v.0] += a;
        }
        c
    }

    /// Largest bound or row violation of `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.n {
            worst = worst.max(self.col_lo[j] - x[j]).max(x[j] - self.col_hi[j]);
        }
        for (r, row) in self.rows.iter().enumerate() {
            let act: f64 = row.iter().map(|&(j, a)| a * x[j]).sum();
            worst = worst.max(self.row_lo[r] - act).max(act - self.row_hi[r]);
        }
        worst
    }

    /// Range of `a_r x` implied by the column bounds.
    fn implied_range(&self, r: usize, lo: &[f64], hi: &[f64]) -> (f64, f64) {
        let (mut min, mut max) = (0.0, 0.0);
        for &(j, a) in &self.rows[r] {
            if a > 0.0 {
                min += a * lo[j];
                max += a * hi[j];
            } else {
                min += a * hi[j];
                max += a * lo[j];
            }
        }
        (min, max)
    }
}

const NONBASIC: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    m: usize,
    n: usize,
    ncols: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    pub(crate) x: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    rows_src: Vec<Vec<(usize, f64)>>,
    tol: Tolerances,
    pub(crate) iterations: usize,
    pivots_since_rebuild: usize,
    scratch: Vec<(usize, f64)>,
}

impl Simplex {
    pub(crate) fn new(p: &LpProblem, cost: &[f64], tol: Tolerances) -> Self {
        let m = p.m();
        let n = p.n;
        let ncols = n + m;
        let mut lo = p.col_lo.clone();
        let mut hi = p.col_hi.clone();
        for r in 0..m {
            let (imin, imax) = p.implied_range(r, &p.col_lo, &p.col_hi);
            lo.push(p.row_lo[r].max(imin));
            hi.push(p.row_hi[r].min(imax));
        }
        let mut s = Simplex {
            m,
            n,
            ncols,
            t: Vec::new(),
            basis: Vec::new(),
            row_of: Vec::new(),
            lo,
            hi,
            x: vec![0.0; ncols],
            cost: {
                let mut c = cost.to_vec();
                c.resize(ncols, 0.0);
                c
            },
            d: vec![0.0; ncols],
            rows_src: p.rows.clone(),
            tol,
            iterations: 0,
            pivots_since_rebuild: 0,
            scratch: Vec::new(),
        };
        s.reset_tableau();
        for j in 0..n {
            s.x[j] = s.default_nonbasic_value(j);
        }
        s.recompute_basics();
        s.recompute_d();
        s
    }

    fn reset_tableau(&mut self) {
        let (m, n, ncols) = (self.m, self.n, self.ncols);
        self.t = vec![0.0; m * ncols];
        for (r, row) in self.rows_src.iter().enumerate() {
            for &(j, a) in row {
                self.t[r * ncols + j] -= a;
            }
            self.t[r * ncols + n + r] = 1.0;
        }
        self.basis = (n..ncols).collect();
        self.row_of = vec![NONBASIC; ncols];
        for r in 0..m {
            self.row_of[n + r] = r;
        }
        self.pivots_since_rebuild = 0;
    }

    fn default_nonbasic_value(&self, j: usize) -> f64 {
        if self.lo[j].is_finite() {
            self.lo[j]
        } else if self.hi[j].is_finite() {
            self.hi[j]
        } else {
            0.0
        }
    }

    fn is_basic(&self, j: usize) -> bool {
        self.row_of[j] != NONBASIC
    }

    fn recompute_basics(&mut self) {
        let ncols = self.ncols;
        for r in 0..self.m {
            let row = &self.t[r * ncols..(r + 1) * ncols];
            let mut v = 0.0;
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 && self.row_of[j] == NONBASIC {
                    v -= a * self.x[j];
                }
            }
            self.x[self.basis[r]] = v;
        }
    }

    fn recompute_d(&mut self) {
        let ncols = self.ncols;
        self.d.copy_from_slice(&self.cost);
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[r * ncols..(r + 1) * ncols];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    pub(crate) fn objective(&self) -> f64 {
        self.cost[..self.n].iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    pub(crate) fn structural(&self) -> &[f64] {
        &self.x[..self.n]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ncols = self.ncols;
        let piv = self.t[r * ncols + q];
        self.scratch.clear();
        {
            let row = &mut self.t[r * ncols..(r + 1) * ncols];
            for (j, a) in row.iter_mut().enumerate() {
                if *a != 0.0 {
                    *a /= piv;
                    if a.abs() < 1e-14 {
                        *a = 0.0;
                    } else {
                        self.scratch.push((j, *a));
                    }
                }
            }
            row[q] = 1.0;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * ncols + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * ncols..(i + 1) * ncols];
            for &(j, a) in &self.scratch {
                row[j] -= f * a;
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(j, a) in &self.scratch {
                self.d[j] -= f * a;
            }
        }
        self.d[q] = 0.0;
        let leaving = self.basis[r];
        self.row_of[leaving] = NONBASIC;
        self.row_of[q] = r;
        self.basis[r] = q;
        self.iterations += 1;
        self.pivots_since_rebuild += 1;
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.m + self.ncols) + 10_000
    }

    /// Recomputes the tableau for the current basis from the source rows.
    pub(crate) fn rebuild(&mut self) -> Result<(), LpError> {
        let wanted: Vec<usize> = self.basis.clone();
        let iterations = self.iterations;
        self.reset_tableau();
        let ncols = self.ncols;
        let n = self.n;
        for &b in wanted.iter().filter(|&&b| b < n) {
            let mut best = (0.0, usize::MAX);
            for r in 0..self.m {
                let cur = self.basis[r];
                if cur >= self.n && !wanted.contains(&cur) {
                    let a = self.t[r * ncols + b].abs();
                    if a > best.0 {
                        best = (a, r);
                    }
                }
            }
            if best.0 < 1e-9 {
                // Basis went singular; the column drops out at a bound.
                self.x[b] = self.default_nonbasic_value(b).clamp(self.lo[b], self.hi[b]);
                continue;
            }
            self.pivot(best.1, b);
        }
        self.iterations = iterations;
        self.pivots_since_rebuild = 0;
        for j in 0..self.ncols {
            if !self.is_basic(j) && !(self.x[j] >= self.lo[j] && self.x[j] <= self.hi[j]) {
                self.x[j] = self.default_nonbasic_value(j);
            }
        }
        self.recompute_basics();
        self.recompute_d();
        Ok(())
    }

    fn basic_infeasibility(&self, r: usize) -> f64 {
        let b = self.basis[r];
        let v = self.x[b];
        if v < self.lo[b] - self.tol.feasibility {
            self.lo[b] - v
        } else if v > self.hi[b] + self.tol.feasibility {
            v - self.hi[b]
        } else {
            0.0
        }
    }

    /// Composite primal simplex from the current basis.
    pub(crate) fn primal(&mut self) -> Result<LpStatus, LpError> {
        let cap = self.iterations + self.iteration_cap();
        let ncols = self.ncols;
        let ftol = self.tol.feasibility;
        let mut degenerate = 0usize;
        let mut rechecks = 0usize;
        let mut phase_cost = vec![0.0; ncols];
        let mut dphase = vec![0.0; ncols];
        let mut blocking: Vec<Blocking> = Vec::new();
        self.recompute_d();
        loop {
            if self.iterations >= cap {
                return Err(LpError::IterationLimit(cap));
            }
            let bland = degenerate >= DEGENERATE_RUN;

            let mut phase1 = false;
            phase_cost.fill(0.0);
            for r in 0..self.m {
                let b = self.basis[r];
                let v = self.x[b];
                if v < self.lo[b] - ftol {
                    phase_cost[b] = -1.0;
                    phase1 = true;
                } else if v > self.hi[b] + ftol {
                    phase_cost[b] = 1.0;
                    phase1 = true;
                }
            }
            let d: &[f64] = if phase1 {
                dphase.fill(0.0);
                for r in 0..self.m {
                    let cb = phase_cost[self.basis[r]];
                    if cb == 0.0 {
                        continue;
                    }
                    let row = &self.t[r * ncols..(r + 1) * ncols];
                    for (dj, &a) in dphase.iter_mut().zip(row) {
                        *dj -= cb * a;
                    }
                }
                &dphase
            } else {
                &self.d
            };

            // Pricing.
            let mut enter: Option<(usize, f64)> = None;
            let mut best_score = 0.0;
            for j in 0..ncols {
                if self.is_basic(j) || self.lo[j] == self.hi[j] {
                    continue;
                }
                let dj = d[j];
                let dir = if dj < -self.tol.optimality && self.x[j] < self.hi[j] {
                    1.0
                } else if dj > self.tol.optimality && self.x[j] > self.lo[j] {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    enter = Some((j, dir));
                    break;
                }
                if dj.abs() > best_score {
                    best_score = dj.abs();
                    enter = Some((j, dir));
                }
            }
            let Some((q, dir)) = enter else {
                if phase1 {
                    return Ok(LpStatus::Infeasible);
                }
                // Refresh basic values before trusting the point.
                self.recompute_basics();
                if rechecks < MAX_RECHECKS && (0..self.m).any(|r| self.basic_infeasibility(r) > 0.0) {
                    rechecks += 1;
                    continue;
                }
                return Ok(LpStatus::Optimal);
            };

            // Two-pass ratio test: the first pass finds the largest step
            // that keeps every basic variable within tolerance, the second
            // takes the largest pivot among the rows blocking before it.
            blocking.clear();
            let mut relaxed = f64::INFINITY;
            for r in 0..self.m {
                let a = self.t[r * ncols + q];
                if a.abs() <= self.tol.pivot {
                    continue;
                }
                let alpha = -a * dir;
                let b = self.basis[r];
                let v = self.x[b];
                // (distance to the bound, allowance past it, bound)
                let (gap, slack, bound) = if alpha > 0.0 {
                    if phase1 && v < self.lo[b] - ftol {
                        (self.lo[b] - v, 0.0, self.lo[b])
                    } else if v <= self.hi[b] + ftol && self.hi[b].is_finite() {
                        (self.hi[b] - v, ftol, self.hi[b])
                    } else {
                        continue;
                    }
                } else if phase1 && v > self.hi[b] + ftol {
                    (v - self.hi[b], 0.0, self.hi[b])
                } else if v >= self.lo[b] - ftol && self.lo[b].is_finite() {
                    (v - self.lo[b], ftol, self.lo[b])
                } else {
                    continue;
                };
                let size = alpha.abs();
                relaxed = relaxed.min((gap + slack) / size);
                blocking.push(Blocking {
                    row: r,
                    ratio: gap.max(0.0) / size,
                    bound,
                    size,
                });
            }
            let mut leave: Option<&Blocking> = None;
            if bland {
                for c in &blocking {
                    let better = leave.is_none_or(|l| {
                        c.ratio < l.ratio - 1e-12
                            || (c.ratio <= l.ratio + 1e-12 && self.basis[c.row] < self.basis[l.row])
                    });
                    if better {
                        leave = Some(c);
                    }
                }
            } else {
                for c in blocking.iter().filter(|c| c.ratio <= relaxed) {
                    if leave.is_none_or(|l| c.size > l.size) {
                        leave = Some(c);
                    }
                }
            }
            let mut step = leave.map_or(f64::INFINITY, |l| l.ratio);
            let span = self.hi[q] - self.lo[q];
            let flip = span.is_finite() && span <= step;
            if flip {
                step = span;
            } else if leave.is_none() {
                return if phase1 {
                    Err(LpError::Numerical("unbounded phase-1 direction".into()))
                } else {
                    Ok(LpStatus::Unbounded)
                };
            }
            let leave = leave.map(|l| (l.row, l.bound));

            degenerate = if step * d[q].abs() <= 1e-12 { degenerate + 1 } else { 0 };
            self.x[q] += dir * step;
            if step != 0.0 {
                for r in 0..self.m {
                    let a = self.t[r * ncols + q];
                    if a != 0.0 {
                        self.x[self.basis[r]] -= a * dir * step;
                    }
                }
            }
            if flip {
                self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                self.iterations += 1;
                continue;
            }
            let (r, bound) = leave.expect("checked above");
            let leaving = self.basis[r];
            self.pivot(r, q);
            self.x[leaving] = bound;
        }
    }

    /// Places nonbasic variables on the bound their reduced cost asks for.
    /// Returns false when some variable would need an infinite bound.
    fn make_dual_feasible(&mut self) -> bool {
        let mut ok = true;
        for j in 0..self.ncols {
            if self.is_basic(j) {
                continue;
            }
            let (lo, hi, dj) = (self.lo[j], self.hi[j], self.d[j]);
            let v = if lo == hi {
                lo
            } else if dj > self.tol.optimality {
                if lo.is_finite() {
                    lo
                } else {
                    ok = false;
                    self.default_nonbasic_value(j)
                }
            } else if dj < -self.tol.optimality {
                if hi.is_finite() {
                    hi
                } else {
                    ok = false;
                    self.default_nonbasic_value(j)
                }
            } else if self.x[j] == lo || self.x[j] == hi {
                self.x[j]
            } else {
                self.default_nonbasic_value(j)
            };
            self.x[j] = v;
        }
        self.recompute_basics();
        ok
    }

    /// Shifts the cost of every movable nonbasic variable by a small
    /// amount in the direction that keeps its reduced cost dual feasible.
    /// The shifts are a fixed function of the column index.
    fn perturb_costs(&mut self) {
        for j in 0..self.ncols {
            if self.is_basic(j) || self.lo[j] == self.hi[j] {
                continue;
            }
            let sign = if self.x[j] == self.lo[j] {
                1.0
            } else if self.x[j] == self.hi[j] {
                -1.0
            } else {
                continue;
            };
            let mut h = (j as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
            h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            h ^= h >> 31;
            let u = (h >> 11) as f64 / (1u64 << 53) as f64;
            let delta = PERTURBATION * (1.0 + self.cost[j].abs()) * (1.0 + u);
            self.cost[j] += sign * delta;
            self.d[j] += sign * delta;
        }
    }

    /// Dual simplex; assumes dual feasibility.
    fn dual(&mut self) -> Result<LpStatus, LpError> {
        let cap = self.iterations + self.iteration_cap();
        let ncols = self.ncols;
        let otol = self.tol.optimality;
        let mut degenerate = 0usize;
        let mut rechecks = 0usize;
        let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
        loop {
            if self.iterations >= cap {
                return Err(LpError::IterationLimit(cap));
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut pick: Option<usize> = None;
            let mut worst = 0.0;
            for r in 0..self.m {
                let v = self.basic_infeasibility(r);
                if v <= 0.0 {
                    continue;
                }
                let better = match pick {
                    None => true,
                    Some(p) if bland => self.basis[r] < self.basis[p],
                    Some(_) => v > worst,
                };
                if better {
                    worst = v;
                    pick = Some(r);
                }
            }
            let Some(r) = pick else {
                self.recompute_basics();
                if rechecks < MAX_RECHECKS && (0..self.m).any(|r| self.basic_infeasibility(r) > 0.0) {
                    rechecks += 1;
                    continue;
                }
                return Ok(LpStatus::Optimal);
            };
            let b = self.basis[r];
            let below = self.x[b] < self.lo[b];
            let target = if below { self.lo[b] } else { self.hi[b] };
            let need = if below { 1.0 } else { -1.0 };

            // Two-pass ratio test on the reduced costs.
            candidates.clear();
            let mut relaxed = f64::INFINITY;
            let row = &self.t[r * ncols..(r + 1) * ncols];
            for (j, &a) in row.iter().enumerate() {
                if a == 0.0 || self.row_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                    continue;
                }
                let effect = -a * need;
                let up = effect > self.tol.pivot && self.x[j] < self.hi[j];
                let down = effect < -self.tol.pivot && self.x[j] > self.lo[j];
                if !up && !down {
                    continue;
                }
                let dj = if up { self.d[j] } else { -self.d[j] };
                relaxed = relaxed.min((dj + otol).max(0.0) / a.abs());
                candidates.push((j, dj.max(0.0) / a.abs(), a.abs()));
            }
            let mut enter: Option<(usize, f64, f64)> = None;
            if bland {
                for &c in &candidates {
                    if enter.is_none_or(|e| c.1 < e.1 - 1e-12) {
                        enter = Some(c);
                    }
                }
            } else {
                for &c in candidates.iter().filter(|c| c.1 <= relaxed) {
                    if enter.is_none_or(|e| c.2 > e.2) {
                        enter = Some(c);
                    }
                }
            }
            let Some((q, ratio, _)) = enter else {
                return Ok(LpStatus::Infeasible);
            };
            degenerate = if ratio <= 1e-12 { degenerate + 1 } else { 0 };
            let a_rq = self.t[r * ncols + q];
            let delta = (self.x[b] - target) / a_rq;
            self.x[q] += delta;
            for i in 0..self.m {
                let a = self.t[i * ncols + q];
                if a != 0.0 {
                    self.x[self.basis[i]] -= a * delta;
                }
            }
            self.pivot(r, q);
            self.x[b] = target;
        }
    }

    /// Changes structural bounds, keeping the current basis.
    pub(crate) fn set_bounds(&mut self, lo: &[f64], hi: &[f64]) {
        self.lo[..self.n].copy_from_slice(lo);
        self.hi[..self.n].copy_from_slice(hi);
    }

    /// Re-solves after bound changes: dual simplex on slightly perturbed
    /// costs when the basis is dual feasible, then a primal pass on the
    /// true costs.
    pub(crate) fn reoptimize(&mut self) -> Result<LpStatus, LpError> {
        if self.pivots_since_rebuild > REBUILD_EVERY {
            self.rebuild()?;
        }
        self.recompute_d();
        if self.make_dual_feasible() {
            let cost = self.cost.clone();
            self.perturb_costs();
            let status = self.dual();
            self.cost = cost;
            if status? == LpStatus::Infeasible {
                return Ok(LpStatus::Infeasible);
            }
        }
        self.primal()
    }
}

struct Blocking {
    row: usize,
    ratio: f64,
    bound: f64,
    size: f64,
}

/// Solves the LP relaxation of `model` for its first objective level
/// (binaries relaxed to `[0, 1]`).
pub fn lp_solve(model: &LinearModel, tol: Tolerances) -> Result<LpOutcome, LpError> {
    let p = LpProblem::from_model(model);
    let cost = model
        .objective()
        .first()
        .map_or_else(|| vec![0.0; p.n], |l| p.dense_cost(&l.terms));
    let mut s = Simplex::new(&p, &cost, tol);
    Ok(match s.primal()? {
        LpStatus::Optimal => LpOutcome::Optimal {
            value: s.objective(),
            x: s.structural().to_vec(),
        },
        LpStatus::Infeasible => LpOutcome::Infeasible,
        LpStatus::Unbounded => LpOutcome::Unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LinearModel;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn single_bound_row() {
        let mut m = LinearModel::new("t");
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        m.add_constraint("c", "g", [(1.0, x)], Sense::Ge, 3.0).unwrap();
        m.add_objective_terms(1, "obj", [(1.0, x)]).unwrap();
        match lp_solve(&m, tol()).unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value - 3.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_pair() {
        let mut m = LinearModel::new("t");
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        m.add_constraint("a", "g", [(1.0, x)], Sense::Ge, 3.0).unwrap();
        m.add_constraint("b", "g", [(1.0, x)], Sense::Le, 2.0).unwrap();
        assert_eq!(lp_solve(&m, tol()).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut m = LinearModel::new("t");
        let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
        let y = m.add_continuous("y", 0.0, f64::INFINITY).unwrap();
        m.add_constraint("a", "g", [(1.0, x), (-1.0, y)], Sense::Le, 1.0)
            .unwrap();
        m.add_objective_terms(1, "obj", [(-1.0, x)]).unwrap();
        assert_eq!(lp_solve(&m, tol()).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut m = LinearModel::new("t");
        let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
        let y = m.add_continuous("y", 0.0, f64::INFINITY).unwrap();
        m.add_constraint("a", "g", [(1.0, x)], Sense::Le, 4.0).unwrap();
        m.add_constraint("b", "g", [(2.0, y)], Sense::Le, 12.0).unwrap();
        m.add_constraint("c", "g", [(3.0, x), (2.0, y)], Sense::Le, 18.0)
            .unwrap();
        m.add_objective_terms(1, "obj", [(-3.0, x), (-5.0, y)]).unwrap();
        match lp_solve(&m, tol()).unwrap() {
            LpOutcome::Optimal { value, x: sol } => {
                assert!((value + 36.0).abs() < 1e-9);
                assert!((sol[0] - 2.0).abs() < 1e-9 && (sol[1] - 6.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dual_reoptimisation_matches_fresh_solve() {
        let mut m = LinearModel::new("t");
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        let y = m.add_continuous("y", 0.0, 10.0).unwrap();
        m.add_constraint("a", "g", [(1.0, x), (1.0, y)], Sense::Ge, 4.0)
            .unwrap();
        m.add_constraint("b", "g", [(1.0, x), (-1.0, y)], Sense::Le, 1.0)
            .unwrap();
        m.add_objective_terms(1, "obj", [(2.0, x), (3.0, y)]).unwrap();
        let p = LpProblem::from_model(&m);
        let cost = p.dense_cost(&m.objective()[0].terms);
        let mut s = Simplex::new(&p, &cost, tol());
        assert_eq!(s.primal().unwrap(), LpStatus::Optimal);
        // x = 2.5, y = 1.5 -> 9.5
        assert!((s.objective() - 9.5).abs() < 1e-9);
        s.set_bounds(&[0.0, 2.0], &[10.0, 10.0]);
        assert_eq!(s.reoptimize().unwrap(), LpStatus::Optimal);
        // y >= 2: x = 2, y = 2 -> 10
        assert!((s.objective() - 10.0).abs() < 1e-9);
        s.set_bounds(&[0.0, 0.0], &[1.0, 2.0]);
        assert_eq!(s.reoptimize().unwrap(), LpStatus::Infeasible);
        s.set_bounds(&[0.0, 0.0], &[10.0, 10.0]);
        assert_eq!(s.reoptimize().unwrap(), LpStatus::Optimal);
        assert!((s.objective() - 9.5).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under plain Dantzig pricing.
        let mut m = LinearModel::new("beale");
        let v: Vec<_> = (0..4)
            .map(|k| m.add_continuous(format!("x{k}"), 0.0, f64::INFINITY).unwrap())
            .collect();
        m.add_constraint(
            "r1",
            "g",
            [(0.25, v[0]), (-60.0, v[1]), (-0.04, v[2]), (9.0, v[3])],
            Sense::Le,
            0.0,
        )
        .unwrap();
        m.add_constraint(
            "r2",
            "g",
            [(0.5, v[0]), (-90.0, v[1]), (-0.02, v[2]), (3.0, v[3])],
            Sense::Le,
            0.0,
        )
        .unwrap();
        m.add_constraint("r3", "g", [(1.0, v[2])], Sense::Le, 1.0).unwrap();
        m.add_objective_terms(1, "obj", [(-0.75, v[0]), (150.0, v[1]), (-0.02, v[2]), (6.0, v[3])])
            .unwrap();
        match lp_solve(&m, tol()).unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value + 0.05).abs() < 1e-9, "{value}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rebuild_preserves_solution() {
        let mut m = LinearModel::new("t");
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        let y = m.add_continuous("y", 0.0, 10.0).unwrap();
        m.add_constraint("a", "g", [(1.0, x), (2.0, y)], Sense::Ge, 4.0)
            .unwrap();
        m.add_constraint("b", "g", [(3.0, x), (1.0, y)], Sense::Ge, 6.0)
            .unwrap();
        m.add_objective_terms(1, "obj", [(1.0, x), (1.0, y)]).unwrap();
        let p = LpProblem::from_model(&m);
        let cost = p.dense_cost(&m.objective()[0].terms);
        let mut s = Simplex::new(&p, &cost, tol());
        s.primal().unwrap();
        let before = s.structural().to_vec();
        s.rebuild().unwrap();
        for (a, b) in before.iter().zip(s.structural()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((s.objective() - 2.8).abs() < 1e-9);
    }
}
