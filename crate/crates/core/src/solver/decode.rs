//! Reads a solved assignment back into a [`Schedule`] and replays the
//! scheduling semantics on it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::compile::{Compiled, WindowMode};
use crate::instance::{Direction, Instance, TaskKind};
use crate::solver::SolveResult;

const TOL: f64 = 1e-6;
/// Changeover durations are minimised one level below a slack-fixed level.
const DURATION_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleEntry {
    pub event_point: usize,
    pub task: String,
    pub kind: TaskKind,
    pub ts: f64,
    pub tf: f64,
    /// `None` for changeover tasks.
    pub batch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitSchedule {
    pub unit: String,
    pub entries: Vec<ScheduleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub rule: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }

    fn record(&mut self, rule: &'static str, failures: Vec<String>) {
        let passed = failures.is_empty();
        let detail = if passed {
            "ok".to_string()
        } else {
            let more = if failures.len() > 3 {
                format!(" (+{} more)", failures.len() - 3)
            } else {
                String::new()
            };
            format!("{}{more}", failures[..failures.len().min(3)].join("; "))
        };
        self.checks.push(CheckResult { rule, passed, detail });
    }
}

impl std::fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "  {:<22} {}  {}",
                c.rule,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Schedule {
    pub units: Vec<UnitSchedule>,
    pub underproduction: BTreeMap<String, f64>,
    pub changeover_hours: f64,
    pub verification: VerificationReport,
}

impl Schedule {
    pub fn is_empty(&self) -> bool {
        self.units.iter().all(|u| u.entries.is_empty())
    }

    /// Entries of a unit, or an empty slice.
    pub fn unit(&self, id: &str) -> &[ScheduleEntry] {
        self.units
            .iter()
            .find(|u| u.unit == id)
            .map_or(&[], |u| u.entries.as_slice())
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for u in &self.units {
            writeln!(f, "unit {}", u.unit)?;
            for e in &u.entries {
                write!(
                    f,
                    "  n={:<3} {:<12} {:>8.3} -> {:>8.3}",
                    e.event_point, e.task, e.ts, e.tf
                )?;
                match e.batch {
                    Some(b) => writeln!(f, "  B={b:.3}")?,
                    None => writeln!(f, "  changeover")?,
                }
            }
        }
        for (s, u) in &self.underproduction {
            writeln!(f, "underproduction {s} = {u:.6}")?;
        }
        writeln!(f, "changeover hours = {:.6}", self.changeover_hours)?;
        writeln!(f, "verification:")?;
        write!(f, "{}", self.verification)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("result has no assignment to decode")]
    NoAssignment,
    #[error("assignment has {have} values, model has {want} variables")]
    WrongLength { have: usize, want: usize },
    #[error("verification failed: {rule}: {detail}")]
    Violation { rule: &'static str, detail: String },
}

/// Decodes and verifies; fails with the first violated rule.
pub fn decode(inst: &Instance, compiled: &Compiled, result: &SolveResult) -> Result<Schedule, DecodeError> {
    if !result.has_assignment() {
        return Err(DecodeError::NoAssignment);
    }
    let s = verify(inst, compiled, &result.assignment)?;
    match s.verification.first_failure() {
        Some(c) => Err(DecodeError::Violation {
            rule: c.rule,
            detail: c.detail.clone(),
        }),
        None => Ok(s),
    }
}

/// Builds the schedule and runs every check, recording failures in the
/// embedded report instead of returning early.
pub fn verify(inst: &Instance, compiled: &Compiled, x: &[f64]) -> Result<Schedule, DecodeError> {
    let m = &compiled.model;
    if x.len() != m.variables().len() {
        return Err(DecodeError::WrongLength {
            have: x.len(),
            want: m.variables().len(),
        });
    }
    let core = &compiled.core;
    let n_max = core.n_max;
    let mut report = VerificationReport::default();

    let mut fails = Vec::new();
    for v in m.variables().iter().filter(|v| v.kind == crate::model::VarKind::Binary) {
        let val = x[m.var(&v.name).expect("own variable").0];
        if (val - val.round()).abs() > TOL {
            fails.push(format!("{} = {val}", v.name));
        }
    }
    report.record("integrality", fails);

    let active = |i: usize, n: usize| x[core.wv(i, n).0] > 0.5;
    let mut units = Vec::new();
    for u in &inst.units {
        let mut entries = Vec::new();
        for n in 1..=n_max {
            for (i, t) in inst.tasks_on(&u.id) {
                if active(i, n) {
                    entries.push(ScheduleEntry {
                        event_point: n,
                        task: t.id.clone(),
                        kind: t.kind,
                        ts: x[core.ts(i, n).0],
                        tf: x[core.tf(i, n).0],
                        batch: core.batch(i, n).map(|b| x[b.0]),
                    });
                }
            }
        }
        units.push(UnitSchedule {
            unit: u.id.clone(),
            entries,
        });
    }

    let mut fails = Vec::new();
    for u in &units {
        let mut per_point = BTreeMap::new();
        for e in &u.entries {
            *per_point.entry(e.event_point).or_insert(0) += 1;
            if e.tf < e.ts - TOL {
                fails.push(format!("{} at n={} ends before it starts", e.task, e.event_point));
            }
        }
        for (n, c) in per_point {
            if c > 1 {
                fails.push(format!("unit {} runs {c} tasks at n={n}", u.unit));
            }
        }
        for w in u.entries.windows(2) {
            if w[1].ts < w[0].tf - TOL {
                fails.push(format!(
                    "unit {}: {}@{} [{:.6},{:.6}] overlaps {}@{} [{:.6},{:.6}]",
                    u.unit,
                    w[0].task,
                    w[0].event_point,
                    w[0].ts,
                    w[0].tf,
                    w[1].task,
                    w[1].event_point,
                    w[1].ts,
                    w[1].tf
                ));
            }
        }
    }
    report.record("non-overlap", fails);

    let mut fails = Vec::new();
    for (i, t) in inst.tasks.iter().enumerate() {
        if !t.kind.is_processing() {
            continue;
        }
        for n in 1..=n_max {
            let b = x[core.batch(i, n).expect("processing task").0];
            let dur = x[core.tf(i, n).0] - x[core.ts(i, n).0];
            if active(i, n) {
                if b < t.b_min() - TOL || b > t.b_max() + TOL {
                    fails.push(format!("B({},{n}) = {b} outside [{}, {}]", t.id, t.b_min(), t.b_max()));
                }
                if (t.rate() * dur - b).abs() > TOL * t.rate().max(1.0) {
                    fails.push(format!(
                        "{} at n={n}: rate x duration {} != B {b}",
                        t.id,
                        t.rate() * dur
                    ));
                }
            } else if b.abs() > TOL {
                fails.push(format!("idle {} at n={n} has B = {b}", t.id));
            }
        }
    }
    report.record("batch", fails);

    let mut presence = Vec::new();
    let mut duration = Vec::new();
    for u in inst.main_units() {
        let entries = &units.iter().find(|s| s.unit == u.id).expect("unit listed").entries;
        let proc: Vec<&ScheduleEntry> = entries.iter().filter(|e| e.kind.is_processing()).collect();
        for w in proc.windows(2) {
            let (prev, next) = (w[0], w[1]);
            if prev.task == next.task {
                continue;
            }
            let ct = inst.ctime(&prev.task, &next.task);
            if ct <= 0.0 {
                continue;
            }
            let class = if prev.kind == TaskKind::P1 && next.kind == TaskKind::Np1 {
                TaskKind::ChangeoverC1
            } else {
                TaskKind::ChangeoverC
            };
            let at = prev.event_point + 1;
            match entries.iter().find(|e| e.event_point == at && e.kind == class) {
                Some(ch) if at < next.event_point => {
                    let d = ch.tf - ch.ts;
                    if (d - ct).abs() > DURATION_TOL {
                        duration.push(format!(
                            "{} between {} and {}: {d:.6} h, expected {ct}",
                            ch.task, prev.task, next.task
                        ));
                    }
                }
                _ => presence.push(format!(
                    "no {class:?} changeover at n={at} between {}@{} and {}@{}",
                    prev.task, prev.event_point, next.task, next.event_point
                )),
            }
        }
    }
    report.record("changeover-presence", presence);
    report.record("changeover-duration", duration);

    if compiled.options.windows != WindowMode::None {
        let mut fails = Vec::new();
        for u in &units {
            for e in u.entries.iter().filter(|e| e.kind.is_changeover()) {
                let inside = inst
                    .windows
                    .for_class(e.kind)
                    .iter()
                    .filter(|[a, b]| e.ts >= a - TOL && e.tf <= b + TOL)
                    .count();
                if inside != 1 {
                    fails.push(format!(
                        "{}@{} [{:.6},{:.6}] lies in {inside} windows",
                        e.task, e.event_point, e.ts, e.tf
                    ));
                }
            }
        }
        report.record("window-containment", fails);
    }
    if let Some(c) = compiled.compact.as_ref().filter(|c| !c.z.is_empty()) {
        let mut fails = Vec::new();
        for (i, t) in inst.tasks.iter().enumerate().filter(|(_, t)| t.kind.is_changeover()) {
            for n in 1..=n_max {
                let picked: f64 = c.z.iter().filter(|z| z.0 == i).map(|z| x[z.2[n - 1].0].round()).sum();
                let w = x[core.wv(i, n).0].round();
                if picked != w {
                    fails.push(format!("{} at n={n}: sum z = {picked}, wv = {w}", t.id));
                }
            }
        }
        report.record("win_pick", fails);
    }

    let mut fails = Vec::new();
    for (si, s) in inst.states.iter().enumerate() {
        let mut level = s.initial_stock;
        for n in 1..=n_max + 1 {
            if n > 1 {
                for a in inst
                    .arcs
                    .iter()
                    .filter(|a| a.state == s.id && a.direction == Direction::Produces)
                {
                    let i = inst.task_index(&a.task).expect("validated arc");
                    level += a.coefficient * x[core.batch(i, n - 1).expect("producer").0];
                }
            }
            if n <= n_max {
                for a in inst
                    .arcs
                    .iter()
                    .filter(|a| a.state == s.id && a.direction == Direction::Consumes)
                {
                    let i = inst.task_index(&a.task).expect("validated arc");
                    level -= a.coefficient * x[core.batch(i, n).expect("consumer").0];
                }
            }
            let st = x[core.stock[si][n - 1].0];
            if level < -TOL || (level - st).abs() > TOL * level.abs().max(1.0) {
                fails.push(format!("{} stage {n}: replayed {level:.6}, ST {st:.6}", s.id));
            }
        }
    }
    report.record("inventory", fails);

    let (worst, name) = m.max_violation(x);
    report.record(
        "constraint-substitution",
        if worst > TOL {
            vec![format!("{name} violated by {worst:e}")]
        } else {
            vec![]
        },
    );

    let mut underproduction = BTreeMap::new();
    for (si, s) in inst.states.iter().enumerate() {
        if let Some(u) = core.under[si] {
            underproduction.insert(s.id.clone(), x[u.0] + 0.0);
        }
    }
    let changeover_hours = units
        .iter()
        .flat_map(|u| &u.entries)
        .filter(|e| e.kind.is_changeover())
        .map(|e| e.tf - e.ts)
        .sum::<f64>()
        + 0.0;
    Ok(Schedule {
        units,
        underproduction,
        changeover_hours,
        verification: report,
    })
}
