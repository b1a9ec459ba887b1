//! Exact lexicographic branch-and-bound over [`LinearModel`]s, plus
//! decoding of solutions into schedules.

mod bnb;
mod decode;
pub mod lp;

use std::time::Instant;

use serde::Serialize;

use crate::model::{LinearModel, VarId};

pub use decode::{decode, verify, CheckResult, DecodeError, Schedule, ScheduleEntry, UnitSchedule, VerificationReport};
pub use lp::{lp_solve, LpError, LpOutcome, LpProblem};

/// All numeric tolerances used by the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Bound and row feasibility inside the simplex.
    pub feasibility: f64,
    /// Reduced-cost optimality.
    pub optimality: f64,
    /// Smallest usable pivot magnitude.
    pub pivot: f64,
    /// Distance from 0/1 for a binary to count as integral.
    pub integrality: f64,
    /// Substitution check on incumbents.
    pub verify: f64,
    /// Allowance when fixing a solved level as a constraint.
    pub lex_slack: f64,
    /// Absolute improvement needed to keep a node.
    pub gap: f64,
}

impl Tolerances {
    /// Feasibility tightened to `1e-9`, for re-solves with all binaries fixed.
    pub fn tightened(self) -> Self {
        Tolerances {
            feasibility: self.feasibility.min(1e-9),
            ..self
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-7,
            optimality: 1e-9,
            pivot: 1e-9,
            integrality: 1e-6,
            verify: 1e-6,
            lex_slack: 1e-6,
            gap: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_nodes: usize,
    pub max_seconds: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: 1_000_000,
            max_seconds: 600.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn is_limit(self) -> bool {
        matches!(self, SolveStatus::NodeLimit | SolveStatus::TimeLimit)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::TimeLimit => "time_limit",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolveStats {
    /// Branch-and-bound nodes below the root, over all levels.
    pub nodes: usize,
    pub lp_iterations: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// One value per objective level, evaluated at the assignment.
    pub objective_vector: Vec<f64>,
    /// Value per variable, indexed by [`VarId`]; empty without an incumbent.
    pub assignment: Vec<f64>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn value(&self, v: VarId) -> f64 {
        self.assignment[v.0]
    }

    pub fn has_assignment(&self) -> bool {
        !self.assignment.is_empty()
    }
}

pub fn solve(model: &LinearModel, limits: Limits) -> Result<SolveResult, LpError> {
    solve_with(model, limits, Tolerances::default())
}

/// Optimises each objective level in turn; after level `k` is solved its
/// value `v` is imposed as `level_k <= v + lex_slack`.
pub fn solve_with(model: &LinearModel, limits: Limits, tol: Tolerances) -> Result<SolveResult, LpError> {
    let start = Instant::now();
    let base = LpProblem::from_model(model);
    let mut p = base.clone();
    let mut budget = bnb::Budget::new(limits, start);
    let levels: Vec<Vec<f64>> = if model.objective().is_empty() {
        vec![vec![0.0; p.n]]
    } else {
        model.objective().iter().map(|l| p.dense_cost(&l.terms)).collect()
    };

    let mut incumbent: Option<Vec<f64>> = None;
    let mut status = SolveStatus::Optimal;
    for (k, cost) in levels.iter().enumerate() {
        if k > 0 {
            let prev = &levels[k - 1];
            let x = incumbent.as_ref().expect("earlier level produced a point");
            let v: f64 = prev.iter().zip(x).map(|(c, x)| c * x).sum();
            let terms = prev
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, &c)| (j, c))
                .collect();
            p.push_row(terms, f64::NEG_INFINITY, v + tol.lex_slack);
            if cost.iter().all(|&c| c == 0.0) {
                continue;
            }
        }
        let out = bnb::branch_and_bound(&p, cost, incumbent.take(), tol, &mut budget)?;
        incumbent = out.best;
        match out.status {
            bnb::LevelStatus::Optimal => {}
            bnb::LevelStatus::Infeasible => {
                if incumbent.is_none() {
                    status = SolveStatus::Infeasible;
                    break;
                }
            }
            bnb::LevelStatus::NodeLimit => {
                status = SolveStatus::NodeLimit;
                break;
            }
            bnb::LevelStatus::TimeLimit => {
                status = SolveStatus::TimeLimit;
                break;
            }
        }
    }

    if let Some(x) = incumbent.as_mut() {
        if let Some(better) = polish(&base, &levels, x, tol)? {
            *x = better;
        }
    }
    let assignment = incumbent.unwrap_or_default();
    let objective_vector = if assignment.is_empty() {
        Vec::new()
    } else {
        // `+ 0.0` turns a negative zero into zero.
        model
            .objective_values(&assignment)
            .into_iter()
            .map(|v| v + 0.0)
            .collect()
    };
    Ok(SolveResult {
        status,
        objective_vector,
        assignment,
        stats: SolveStats {
            nodes: budget.nodes,
            lp_iterations: budget.lp_iterations,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

/// Re-solves the levels as pure LPs with every binary fixed at `x`,
/// imposing each level with a much smaller slack than the search uses.
fn polish(base: &LpProblem, levels: &[Vec<f64>], x: &[f64], tol: Tolerances) -> Result<Option<Vec<f64>>, LpError> {
    let mut p = base.clone();
    for j in 0..p.n {
        if p.integer[j] {
            p.col_lo[j] = x[j].round();
            p.col_hi[j] = x[j].round();
        }
    }
    let mut point = None;
    for (k, cost) in levels.iter().enumerate() {
        if k > 0 {
            let prev = &levels[k - 1];
            let v: f64 = prev
                .iter()
                .zip(point.as_ref().unwrap_or(&x.to_vec()))
                .map(|(c, x)| c * x)
                .sum();
            let terms = prev
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, &c)| (j, c))
                .collect();
            p.push_row(terms, f64::NEG_INFINITY, v + 1e-9 * v.abs().max(1.0));
        }
        let mut s = lp::Simplex::new(&p, cost, tol.tightened());
        if s.primal()? != lp::LpStatus::Optimal {
            return Ok(None);
        }
        point = Some(s.structural().to_vec());
    }
    Ok(point.filter(|pt| base.violation(pt) <= tol.verify))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sense;

    #[test]
    fn pure_lp_needs_no_branching() {
        let mut m = LinearModel::new("lp");
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        m.add_constraint("c", "g", [(1.0, x)], Sense::Ge, 3.0).unwrap();
        m.add_objective_terms(1, "obj", [(1.0, x)]).unwrap();
        let r = solve(&m, Limits::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.stats.nodes, 0);
        assert!((r.objective_vector[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn small_knapsack() {
        // max 5a + 4b + 3c, 2a + 3b + c <= 4, binaries -> a, c: 8
        let mut m = LinearModel::new("knap");
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        let c = m.add_binary("c").unwrap();
        m.add_constraint("w", "g", [(2.0, a), (3.0, b), (1.0, c)], Sense::Le, 4.0)
            .unwrap();
        m.add_objective_terms(1, "obj", [(-5.0, a), (-4.0, b), (-3.0, c)])
            .unwrap();
        let r = solve(&m, Limits::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective_vector[0] + 8.0).abs() < 1e-9);
        assert_eq!(r.assignment, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn infeasible_integer_model() {
        let mut m = LinearModel::new("inf");
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_constraint("s", "g", [(2.0, a), (2.0, b)], Sense::Eq, 1.0)
            .unwrap();
        let r = solve(&m, Limits::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(!r.has_assignment());
    }

    #[test]
    fn second_level_breaks_ties() {
        // level 1: a + b >= 1 costs a + b; level 2 prefers b.
        let mut m = LinearModel::new("lex");
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_constraint("s", "g", [(1.0, a), (1.0, b)], Sense::Ge, 1.0)
            .unwrap();
        m.add_objective_terms(1, "l1", [(1.0, a), (1.0, b)]).unwrap();
        m.add_objective_terms(2, "l2", [(2.0, a), (1.0, b)]).unwrap();
        let r = solve(&m, Limits::default()).unwrap();
        assert_eq!(r.objective_vector, vec![1.0, 1.0]);
        assert_eq!(r.assignment, vec![0.0, 1.0]);
    }

    #[test]
    fn node_limit_keeps_incumbent_status() {
        let mut m = LinearModel::new("lim");
        let xs: Vec<_> = (0..12).map(|k| m.add_binary(format!("b{k}")).unwrap()).collect();
        m.add_constraint("s", "g", xs.iter().map(|&v| (2.0, v)), Sense::Eq, 11.0)
            .unwrap();
        let r = solve(
            &m,
            Limits {
                max_nodes: 5,
                max_seconds: 60.0,
            },
        )
        .unwrap();
        assert_eq!(r.status, SolveStatus::NodeLimit);
    }
}
