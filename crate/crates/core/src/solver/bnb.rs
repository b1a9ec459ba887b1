//! Depth-first branch-and-bound for one objective level.

use std::time::Instant;

use super::lp::{LpError, LpProblem, LpStatus, Simplex};
use super::{Limits, Tolerances};

pub(crate) struct Budget {
    limits: Limits,
    start: Instant,
    pub(crate) nodes: usize,
    pub(crate) lp_iterations: usize,
}

impl Budget {
    pub(crate) fn new(limits: Limits, start: Instant) -> Self {
        Budget {
            limits,
            start,
            nodes: 0,
            lp_iterations: 0,
        }
    }

    fn exhausted(&self) -> Option<LevelStatus> {
        if self.nodes >= self.limits.max_nodes {
            Some(LevelStatus::NodeLimit)
        } else if self.start.elapsed().as_secs_f64() >= self.limits.max_seconds {
            Some(LevelStatus::TimeLimit)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LevelStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

pub(crate) struct LevelOutcome {
    pub(crate) status: LevelStatus,
    pub(crate) best: Option<Vec<f64>>,
}

struct Node {
    fixes: Vec<(usize, f64)>,
    depth: usize,
    bound: f64,
    seq: usize,
}

struct Search<'a> {
    p: &'a LpProblem,
    cost: &'a [f64],
    tol: Tolerances,
    /// Objective takes integer values on integer points.
    integral: bool,
    best: Option<(f64, Vec<f64>)>,
    open: Vec<Node>,
    seq: usize,
}

impl Search<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    fn improves(&self, bound: f64) -> bool {
        match &self.best {
            None => true,
            Some((b, _)) if self.integral => (bound - self.tol.integrality).ceil() < b - 0.5,
            Some((b, _)) => bound < b - self.tol.gap,
        }
    }

    fn bounds_for(&self, fixes: &[(usize, f64)]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.p.col_lo.clone();
        let mut hi = self.p.col_hi.clone();
        for &(j, v) in fixes {
            lo[j] = v;
            hi[j] = v;
        }
        (lo, hi)
    }

    /// Handles an LP-optimal node: records an integral point or branches.
    fn expand(&mut self, lp: &mut Simplex, fixes: &[(usize, f64)], depth: usize) -> Result<(), LpError> {
        let bound = lp.objective();
        if !self.improves(bound) {
            return Ok(());
        }
        let x = lp.structural();
        let mut branch: Option<(usize, f64)> = None;
        let mut worst = self.tol.integrality;
        for j in 0..self.p.n {
            if !self.p.integer[j] {
                continue;
            }
            let frac = (x[j] - x[j].round()).abs();
            if frac > worst {
                worst = frac;
                branch = Some((j, x[j]));
            }
        }
        match branch {
            None => self.accept(lp),
            Some((j, v)) => {
                let up_first = v - v.floor() >= 0.5;
                let order = if up_first { [0.0, 1.0] } else { [1.0, 0.0] };
                for val in order {
                    let mut f = fixes.to_vec();
                    f.push((j, val));
                    self.seq += 1;
                    self.open.push(Node {
                        fixes: f,
                        depth: depth + 1,
                        bound,
                        seq: self.seq,
                    });
                }
                Ok(())
            }
        }
    }

    /// Rounds the LP point, verifies it by substitution and keeps it if it
    /// improves the incumbent. Points that fail substitution are re-solved
    /// from scratch with every integer variable fixed.
    fn accept(&mut self, lp: &mut Simplex) -> Result<(), LpError> {
        let mut x = self.rounded(lp.structural());
        if self.p.violation(&x) > self.tol.verify {
            let fixed: Vec<_> = (0..self.p.n)
                .filter(|&j| self.p.integer[j])
                .map(|j| (j, x[j]))
                .collect();
            let mut q = self.p.clone();
            (q.col_lo, q.col_hi) = self.bounds_for(&fixed);
            let mut fresh = Simplex::new(&q, self.cost, self.tol.tightened());
            let status = fresh.primal()?;
            lp.iterations += fresh.iterations;
            if status != LpStatus::Optimal {
                return Ok(());
            }
            x = self.rounded(fresh.structural());
            if self.p.violation(&x) > self.tol.verify {
                return Ok(());
            }
        }
        let v = self.value(&x);
        let better = match &self.best {
            None => true,
            Some((b, _)) => v < b - self.tol.gap,
        };
        if better {
            self.best = Some((v, x));
        }
        Ok(())
    }

    fn rounded(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let v = if self.p.integer[j] { v.round() } else { v };
                v.clamp(self.p.col_lo[j], self.p.col_hi[j])
            })
            .collect()
    }

    /// Deepest node first, then lowest bound, then most recent.
    fn pop(&mut self) -> Option<Node> {
        let mut pick = 0;
        for (k, n) in self.open.iter().enumerate().skip(1) {
            let cur = &self.open[pick];
            let better = n.depth > cur.depth
                || (n.depth == cur.depth && (n.bound < cur.bound || (n.bound == cur.bound && n.seq > cur.seq)));
            if better {
                pick = k;
            }
        }
        if self.open.is_empty() {
            None
        } else {
            Some(self.open.swap_remove(pick))
        }
    }
}

pub(crate) fn branch_and_bound(
    p: &LpProblem,
    cost: &[f64],
    seed: Option<Vec<f64>>,
    tol: Tolerances,
    budget: &mut Budget,
) -> Result<LevelOutcome, LpError> {
    let integral = cost
        .iter()
        .enumerate()
        .all(|(j, &c)| c == 0.0 || (p.integer[j] && c == c.round()));
    let mut s = Search {
        p,
        cost,
        tol,
        integral,
        best: None,
        open: Vec::new(),
        seq: 0,
    };
    if let Some(x) = seed {
        s.best = Some((s.value(&x), x));
    }

    let mut lp = Simplex::new(p, cost, tol);
    let root = lp.primal();
    budget.lp_iterations += lp.iterations;
    let mut counted = lp.iterations;
    match root? {
        LpStatus::Optimal => s.expand(&mut lp, &[], 0)?,
        LpStatus::Infeasible => {
            let status = if s.best.is_some() {
                LevelStatus::Optimal
            } else {
                LevelStatus::Infeasible
            };
            return Ok(LevelOutcome {
                status,
                best: s.best.map(|b| b.1),
            });
        }
        LpStatus::Unbounded => return Err(LpError::Numerical("unbounded relaxation".into())),
    }

    let mut status = LevelStatus::Optimal;
    while let Some(node) = s.pop() {
        if !s.improves(node.bound) {
            continue;
        }
        if let Some(limit) = budget.exhausted() {
            status = limit;
            break;
        }
        budget.nodes += 1;
        let (lo, hi) = s.bounds_for(&node.fixes);
        lp.set_bounds(&lo, &hi);
        let st = match lp.reoptimize() {
            Ok(st) => st,
            Err(_) => {
                lp.rebuild()?;
                lp.reoptimize()?
            }
        };
        budget.lp_iterations += lp.iterations - counted;
        counted = lp.iterations;
        match st {
            LpStatus::Optimal => s.expand(&mut lp, &node.fixes, node.depth)?,
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => return Err(LpError::Numerical("unbounded node relaxation".into())),
        }
    }
    if status == LevelStatus::Optimal && s.best.is_none() {
        status = LevelStatus::Infeasible;
    }
    Ok(LevelOutcome {
        status,
        best: s.best.map(|b| b.1),
    })
}
