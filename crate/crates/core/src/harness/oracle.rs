//! Exhaustive check of the first-active-task variables on one unit.
//!
//! Every assignment of processing tasks (or nothing) to the event points
//! of [`fixture_ex1`](super::fixture_ex1) is replayed against the compiled
//! rows of both formulations.

use serde::Serialize;

use super::{fixture_ex1, HarnessError};
use crate::compact;
use crate::compile::{compile, CompileOptions, Compiled, Formulation, WindowMode};
use crate::legacy;
use crate::model::{Constraint, LinearModel, VarId};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OracleReport {
    pub patterns: usize,
    /// Semantic `x` satisfies the defining rows of the compact model.
    pub semantic_feasible: usize,
    /// Semantic `x` is below every binary `x` satisfying those rows.
    pub semantic_minimal: usize,
    /// Semantic three-index `x` satisfies the pairwise rows.
    pub legacy_feasible: usize,
    /// Forced changeover activations agree between formulations.
    pub activations_match: usize,
    pub failures: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && [
                self.semantic_feasible,
                self.semantic_minimal,
                self.legacy_feasible,
                self.activations_match,
            ]
            .iter()
            .all(|&c| c == self.patterns)
    }
}

/// First processing task at or after `n` (1-based), if any.
fn first_from(pattern: &[Option<usize>], n: usize) -> Option<usize> {
    pattern[n - 1..].iter().flatten().next().copied()
}

fn rows<'a>(m: &'a LinearModel, groups: &[&str]) -> Vec<&'a Constraint> {
    m.constraints()
        .iter()
        .filter(|c| groups.contains(&c.group.as_str()))
        .collect()
}

fn satisfied(rows: &[&Constraint], x: &[f64]) -> bool {
    rows.iter().all(|c| c.violation(x) <= 1e-9)
}

/// Smallest value of `target` allowed by `rows` with everything else fixed.
fn forced_lower_bound(rows: &[&Constraint], target: VarId, x: &[f64]) -> f64 {
    let mut lb: f64 = 0.0;
    for c in rows {
        let Some(&(a, _)) = c.terms.iter().find(|(_, v)| *v == target) else {
            continue;
        };
        let rest: f64 = c
            .terms
            .iter()
            .filter(|(_, v)| *v != target)
            .map(|(b, v)| b * x[v.0])
            .sum();
        match c.sense {
            crate::model::Sense::Ge if a > 0.0 => lb = lb.max((c.rhs - rest) / a),
            crate::model::Sense::Le if a < 0.0 => lb = lb.max((c.rhs - rest) / a),
            crate::model::Sense::Eq => lb = lb.max((c.rhs - rest) / a),
            _ => {}
        }
    }
    lb
}

struct Side {
    compiled: Compiled,
}

impl Side {
    fn zeroed_with(&self, proc: &[usize], pattern: &[Option<usize>]) -> Vec<f64> {
        let mut x = vec![0.0; self.compiled.model.variables().len()];
        for (k, slot) in pattern.iter().enumerate() {
            if let Some(t) = slot {
                x[self.compiled.core.wv(proc[*t], k + 1).0] = 1.0;
            }
        }
        x
    }
}

/// Runs the enumeration on the single-unit fixture (three processing
/// tasks, `n_max = 4`: `4^4` patterns).
pub fn semantic_x_oracle() -> Result<OracleReport, HarnessError> {
    let inst = fixture_ex1();
    let n_max = inst.n_max;
    let unit = inst.units[0].id.clone();
    let proc = inst.processing_on(&unit);
    let changeovers: Vec<usize> = inst
        .tasks_on(&unit)
        .filter(|(_, t)| t.kind.is_changeover())
        .map(|(i, _)| i)
        .collect();
    let cmp = Side {
        compiled: compile(&inst, CompileOptions::new(Formulation::Compact, WindowMode::None))?,
    };
    let leg = Side {
        compiled: compile(&inst, CompileOptions::new(Formulation::Legacy, WindowMode::None))?,
    };
    let cvars = cmp.compiled.compact.as_ref().expect("compact build");
    let lvars = leg.compiled.legacy.as_ref().expect("legacy build");
    let defining = rows(&cmp.compiled.model, &[compact::G_NEW1, compact::G_COPY]);
    let cact = rows(
        &cmp.compiled.model,
        &[compact::G_ACT_P1P1, compact::G_ACT_NP1, compact::G_ACT_P1NP1],
    );
    let pairwise = rows(&leg.compiled.model, &[legacy::G_UPPER, legacy::G_CH2, legacy::G_CH3]);
    let lact = rows(&leg.compiled.model, &[legacy::G_ACT_C, legacy::G_ACT_C1]);
    let xids: Vec<VarId> = proc
        .iter()
        .flat_map(|&i| cvars.x_of(i).expect("x for processing task").iter().copied())
        .collect();

    let choices = proc.len() + 1;
    let total = choices.pow(n_max as u32);
    let mut rep = OracleReport {
        patterns: total,
        ..OracleReport::default()
    };
    for code in 0..total {
        let mut c = code;
        let pattern: Vec<Option<usize>> = (0..n_max)
            .map(|_| {
                let d = c % choices;
                c /= choices;
                (d > 0).then(|| d - 1)
            })
            .collect();
        let label = format!("{pattern:?}");

        let mut xc = cmp.zeroed_with(&proc, &pattern);
        let mut semantic = vec![0.0; xids.len()];
        for (k, &i) in proc.iter().enumerate() {
            let ids = cvars.x_of(i).expect("x for processing task");
            for n in 1..=n_max {
                if first_from(&pattern, n) == Some(k) {
                    xc[ids[n - 1].0] = 1.0;
                    semantic[k * n_max + n - 1] = 1.0;
                }
            }
        }
        if satisfied(&defining, &xc) {
            rep.semantic_feasible += 1;
        } else {
            rep.failures
                .push(format!("{label}: semantic x violates its defining rows"));
        }

        let mut trial = xc.clone();
        let mut minimal = true;
        for mask in 0u32..(1 << xids.len()) {
            for (b, v) in xids.iter().enumerate() {
                trial[v.0] = f64::from((mask >> b) & 1);
            }
            if satisfied(&defining, &trial) && xids.iter().enumerate().any(|(b, v)| trial[v.0] < semantic[b]) {
                minimal = false;
                rep.failures
                    .push(format!("{label}: feasible x below the semantic one (mask {mask:b})"));
                break;
            }
        }
        if minimal {
            rep.semantic_minimal += 1;
        }

        let mut xl = leg.zeroed_with(&proc, &pattern);
        for p in &lvars.x {
            let from = proc.iter().position(|&t| t == p.from).expect("processing task");
            let to = proc.iter().position(|&t| t == p.to).expect("processing task");
            for n in 1..n_max {
                if pattern[n - 1] == Some(from) && first_from(&pattern, n + 1) == Some(to) {
                    xl[p.x[n - 1].0] = 1.0;
                }
            }
        }
        if satisfied(&pairwise, &xl) {
            rep.legacy_feasible += 1;
        } else {
            rep.failures
                .push(format!("{label}: semantic three-index x violates the pairwise rows"));
        }

        let mut same = true;
        for &ch in &changeovers {
            for n in 2..=n_max {
                let a = forced_lower_bound(&cact, cmp.compiled.core.wv(ch, n), &xc);
                let b = forced_lower_bound(&lact, leg.compiled.core.wv(ch, n), &xl);
                if a != b {
                    same = false;
                    rep.failures.push(format!(
                        "{label}: {} at n={n} forced to {a} (compact) vs {b} (legacy)",
                        inst.tasks[ch].id
                    ));
                }
            }
        }
        if same {
            rep.activations_match += 1;
        }
    }
    Ok(rep)
}
