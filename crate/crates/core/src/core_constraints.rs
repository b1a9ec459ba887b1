//! Event-point scheduling skeleton shared by both changeover formulations:
//! allocation, batch bounds, durations, unit non-overlap, material balances,
//! producer/consumer synchronisation and demand accounting.
//!
//! Event points are numbered `1..=n_max`. Inventory `ST(s,n)` is the stock
//! of state `s` while stage `n` runs; stage `n_max + 1` is the terminal
//! accounting stage holding everything produced at the last event point.
//! Material produced at event point `n` becomes available at `n + 1`.

use crate::instance::{Direction, Instance};
use crate::model::{LinearModel, ModelError, Sense, VarId};

pub const LEVEL_UNDERPRODUCTION: &str = "underproduction";
pub const LEVEL_CHANGEOVER_HOURS: &str = "changeover-hours";
pub const LEVEL_CHANGEOVER_COUNT: &str = "changeover-count";

/// Handles of the skeleton variables, indexed by task/state position in
/// the instance and by event point `n - 1`.
#[derive(Debug, Clone)]
pub struct CoreBuild {
    pub n_max: usize,
    pub horizon_h: f64,
    pub wv: Vec<Vec<VarId>>,
    pub ts: Vec<Vec<VarId>>,
    pub tf: Vec<Vec<VarId>>,
    /// `None` for changeover tasks, which process no material.
    pub batch: Vec<Option<Vec<VarId>>>,
    /// `n_max + 1` stages per state.
    pub stock: Vec<Vec<VarId>>,
    /// Underproduction slack, for states with positive demand.
    pub under: Vec<Option<VarId>>,
}

impl CoreBuild {
    pub fn wv(&self, task: usize, n: usize) -> VarId {
        self.wv[task][n - 1]
    }

    pub fn ts(&self, task: usize, n: usize) -> VarId {
        self.ts[task][n - 1]
    }

    pub fn tf(&self, task: usize, n: usize) -> VarId {
        self.tf[task][n - 1]
    }

    pub fn batch(&self, task: usize, n: usize) -> Option<VarId> {
        self.batch[task].as_ref().map(|b| b[n - 1])
    }

    /// Terminal stock of a state, after the last event point.
    pub fn terminal_stock(&self, state: usize) -> VarId {
        self.stock[state][self.n_max]
    }
}

/// Compiles the skeleton into a fresh model. Objective levels: (1) total
/// underproduction, (2) total changeover hours, (3) number of changeover
/// activations.
pub fn build_core(inst: &Instance) -> Result<(LinearModel, CoreBuild), ModelError> {
    let n_max = inst.n_max;
    let h = inst.horizon_h;
    let mut m = LinearModel::new("evsched");

    let mut wv = Vec::new();
    let mut ts = Vec::new();
    let mut tf = Vec::new();
    let mut batch = Vec::new();
    for t in &inst.tasks {
        let mut w = Vec::with_capacity(n_max);
        let mut s = Vec::with_capacity(n_max);
        let mut f = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            w.push(m.add_binary(format!("wv({},{n})", t.id))?);
            s.push(m.add_continuous(format!("Ts({},{n})", t.id), 0.0, h)?);
            f.push(m.add_continuous(format!("Tf({},{n})", t.id), 0.0, h)?);
        }
        let b = if t.kind.is_processing() {
            let b: Result<Vec<_>, _> = (1..=n_max)
                .map(|n| m.add_continuous(format!("B({},{n})", t.id), 0.0, t.b_max()))
                .collect();
            Some(b?)
        } else {
            None
        };
        wv.push(w);
        ts.push(s);
        tf.push(f);
        batch.push(b);
    }

    let mut stock = Vec::new();
    let mut under = Vec::new();
    for s in &inst.states {
        // Valid upper bound: opening stock plus every batch that could feed the state.
        let inflow: f64 = inst
            .arcs
            .iter()
            .filter(|a| a.state == s.id && a.direction == Direction::Produces)
            .map(|a| a.coefficient * inst.task(&a.task).map_or(0.0, |t| t.b_max()) * n_max as f64)
            .sum();
        let cap = s.initial_stock + inflow;
        let stages: Result<Vec<_>, _> = (1..=n_max + 1)
            .map(|n| m.add_continuous(format!("ST({},{n})", s.id), 0.0, cap))
            .collect();
        stock.push(stages?);
        under.push(if s.demand > 0.0 {
            Some(m.add_continuous(format!("U({})", s.id), 0.0, s.demand)?)
        } else {
            None
        });
    }

    let core = CoreBuild {
        n_max,
        horizon_h: h,
        wv,
        ts,
        tf,
        batch,
        stock,
        under,
    };

    for u in &inst.units {
        let on_unit: Vec<usize> = inst.tasks_on(&u.id).map(|(i, _)| i).collect();
        if on_unit.is_empty() {
            continue;
        }
        for n in 1..=n_max {
            m.add_constraint(
                format!("core.alloc({},{n})", u.id),
                "core.alloc",
                on_unit.iter().map(|&i| (1.0, core.wv(i, n))),
                Sense::Le,
                1.0,
            )?;
        }
    }

    for (i, t) in inst.tasks.iter().enumerate() {
        for n in 1..=n_max {
            let (w, s, f) = (core.wv(i, n), core.ts(i, n), core.tf(i, n));
            m.add_constraint(
                format!("core.timebox({},{n})", t.id),
                "core.timebox",
                [(1.0, f), (-1.0, s)],
                Sense::Ge,
                0.0,
            )?;
            let Some(b) = core.batch(i, n) else { continue };
            m.add_constraint(
                format!("core.batch({},{n},lo)", t.id),
                "core.batch",
                [(1.0, b), (-t.b_min(), w)],
                Sense::Ge,
                0.0,
            )?;
            m.add_constraint(
                format!("core.batch({},{n},hi)", t.id),
                "core.batch",
                [(1.0, b), (-t.b_max(), w)],
                Sense::Le,
                0.0,
            )?;
            // rate * (Tf - Ts) = B keeps coefficients exact in text formats.
            m.add_constraint(
                format!("core.dur({},{n})", t.id),
                "core.dur",
                [(t.rate(), f), (-t.rate(), s), (-1.0, b)],
                Sense::Eq,
                0.0,
            )?;
        }
    }

    // Unit non-overlap in event order, big-M = H.
    for u in &inst.units {
        let on_unit: Vec<usize> = inst.tasks_on(&u.id).map(|(i, _)| i).collect();
        for &i in &on_unit {
            for &j in &on_unit {
                for n in 1..n_max {
                    for n2 in n + 1..=n_max {
                        m.add_constraint(
                            format!("core.seq({},{},{n},{n2})", inst.tasks[i].id, inst.tasks[j].id),
                            "core.seq",
                            [
                                (1.0, core.ts(i, n2)),
                                (-1.0, core.tf(j, n)),
                                (-h, core.wv(i, n2)),
                                (-h, core.wv(j, n)),
                            ],
                            Sense::Ge,
                            -2.0 * h,
                        )?;
                    }
                }
            }
        }
    }

    for (si, s) in inst.states.iter().enumerate() {
        let producers: Vec<(usize, f64)> = arcs_for(inst, &s.id, Direction::Produces);
        let consumers: Vec<(usize, f64)> = arcs_for(inst, &s.id, Direction::Consumes);
        for n in 1..=n_max + 1 {
            let mut terms = vec![(1.0, core.stock[si][n - 1])];
            let mut rhs = 0.0;
            if n == 1 {
                rhs = s.initial_stock;
            } else {
                terms.push((-1.0, core.stock[si][n - 2]));
                for &(i, rho) in &producers {
                    terms.push((-rho, core.batch(i, n - 1).expect("producer is a processing task")));
                }
            }
            if n <= n_max {
                for &(i, rho) in &consumers {
                    terms.push((rho, core.batch(i, n).expect("consumer is a processing task")));
                }
            }
            m.add_constraint(format!("core.bal({},{n})", s.id), "core.bal", terms, Sense::Eq, rhs)?;
        }

        for &(i, _) in &producers {
            for &(j, _) in &consumers {
                for n in 1..n_max {
                    for n2 in n + 1..=n_max {
                        m.add_constraint(
                            format!("core.sync({},{},{},{n},{n2})", s.id, inst.tasks[i].id, inst.tasks[j].id),
                            "core.sync",
                            [
                                (1.0, core.ts(j, n2)),
                                (-1.0, core.tf(i, n)),
                                (-h, core.wv(j, n2)),
                                (-h, core.wv(i, n)),
                            ],
                            Sense::Ge,
                            -2.0 * h,
                        )?;
                    }
                }
            }
        }

        if let Some(uvar) = core.under[si] {
            m.add_constraint(
                format!("core.demand({})", s.id),
                "core.demand",
                [(1.0, uvar), (1.0, core.terminal_stock(si))],
                Sense::Ge,
                s.demand,
            )?;
        }
    }

    m.add_objective_terms(1, LEVEL_UNDERPRODUCTION, core.under.iter().flatten().map(|&u| (1.0, u)))?;
    let changeovers: Vec<usize> = inst
        .tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| t.kind.is_changeover())
        .map(|(i, _)| i)
        .collect();
    let mut hours = Vec::new();
    let mut activations = Vec::new();
    for &i in &changeovers {
        for n in 1..=n_max {
            hours.push((1.0, core.tf(i, n)));
            hours.push((-1.0, core.ts(i, n)));
            activations.push((1.0, core.wv(i, n)));
        }
    }
    m.add_objective_terms(2, LEVEL_CHANGEOVER_HOURS, hours)?;
    m.add_objective_terms(3, LEVEL_CHANGEOVER_COUNT, activations)?;

    Ok((m, core))
}

fn arcs_for(inst: &Instance, state: &str, dir: Direction) -> Vec<(usize, f64)> {
    inst.arcs
        .iter()
        .filter(|a| a.state == state && a.direction == dir)
        .filter_map(|a| inst.task_index(&a.task).map(|i| (i, a.coefficient)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{State, StnArc, Task, TaskKind, Unit, WindowSet};
    use crate::model::count;

    pub(crate) fn single_task(demand: f64) -> Instance {
        Instance {
            units: vec![Unit {
                id: "U1".into(),
                is_main: false,
            }],
            tasks: vec![Task::processing("A", "U1", TaskKind::P1, 10.0, 20.0, 20.0)],
            states: vec![State::new("R", false, 0.0, 1000.0), State::new("P", true, demand, 0.0)],
            arcs: vec![
                StnArc::new("A", "R", Direction::Consumes, 1.0),
                StnArc::new("A", "P", Direction::Produces, 1.0),
            ],
            changeovers: vec![],
            horizon_h: 12.0,
            n_max: 3,
            windows: WindowSet::default(),
        }
    }

    #[test]
    fn group_sizes() {
        let (m, _) = build_core(&single_task(20.0)).unwrap();
        let r = count(&m);
        assert_eq!(r.group("core.alloc"), 3);
        assert_eq!(r.group("core.batch"), 6);
        assert_eq!(r.group("core.dur"), 3);
        assert_eq!(r.group("core.timebox"), 3);
        // one task pair (A,A), event pairs n < n' for n_max = 3
        assert_eq!(r.group("core.seq"), 3);
        assert_eq!(r.group("core.bal"), 2 * 4);
        assert_eq!(r.group("core.sync"), 0);
        assert_eq!(r.group("core.demand"), 1);
        assert_eq!(r.var_group("ST"), 8);
        assert_eq!(m.objective().len(), 3);
    }

    #[test]
    fn idle_schedule_is_feasible() {
        let inst = single_task(20.0);
        let (m, core) = build_core(&inst).unwrap();
        let mut x = vec![0.0; m.variables().len()];
        for (si, s) in inst.states.iter().enumerate() {
            for v in &core.stock[si] {
                x[v.0] = s.initial_stock;
            }
            if let Some(u) = core.under[si] {
                x[u.0] = s.demand;
            }
        }
        let (worst, what) = m.max_violation(&x);
        assert!(worst <= 1e-9, "{what}: {worst}");
    }
}
