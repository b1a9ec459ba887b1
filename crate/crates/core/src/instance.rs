//! Plant description for one short-term scheduling horizon.
//!
//! An [`Instance`] lists the units, the tasks (each bound to a single
//! suitable unit), the states of the recipe network, the sequence-dependent
//! changeover times between processing tasks and the time windows in which
//! changeovers may run. Instances are plain data: construct them directly,
//! load them from the JSON document format with [`load`], or synthesise
//! them with [`crate::generate::generate_family`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

/// Tolerance used when checking that recipe coefficients of one task sum to at most one.
const COEFFICIENT_SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Unit {
    pub id: String,
    /// Main units need changeovers between different processing tasks.
    pub is_main: bool,
}

/// Task class. `P1` and `NP1` are processing tasks; a switch from `P1` to
/// `NP1` needs the special `CHANGEOVER_C1` task, every other switch uses
/// `CHANGEOVER_C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    #[serde(rename = "P1")]
    P1,
    #[serde(rename = "NP1")]
    Np1,
    #[serde(rename = "CHANGEOVER_C")]
    ChangeoverC,
    #[serde(rename = "CHANGEOVER_C1")]
    ChangeoverC1,
}

impl TaskKind {
    pub fn is_processing(self) -> bool {
        matches!(self, TaskKind::P1 | TaskKind::Np1)
    }

    pub fn is_changeover(self) -> bool {
        !self.is_processing()
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::P1 => "P1",
            TaskKind::Np1 => "NP1",
            TaskKind::ChangeoverC => "CHANGEOVER_C",
            TaskKind::ChangeoverC1 => "CHANGEOVER_C1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub id: String,
    #[serde(deserialize_with = "single_unit")]
    pub unit: String,
    pub kind: TaskKind,
    /// Amount processed per hour.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_max: Option<f64>,
}

impl Task {
    pub fn processing(id: &str, unit: &str, kind: TaskKind, rate: f64, b_min: f64, b_max: f64) -> Self {
        Task {
            id: id.to_string(),
            unit: unit.to_string(),
            kind,
            rate: Some(rate),
            b_min: Some(b_min),
            b_max: Some(b_max),
        }
    }

    pub fn changeover(id: &str, unit: &str, kind: TaskKind) -> Self {
        Task {
            id: id.to_string(),
            unit: unit.to_string(),
            kind,
            rate: None,
            b_min: None,
            b_max: None,
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate.unwrap_or(0.0)
    }

    pub fn b_min(&self) -> f64 {
        self.b_min.unwrap_or(0.0)
    }

    pub fn b_max(&self) -> f64 {
        self.b_max.unwrap_or(0.0)
    }
}

/// Tasks run on exactly one unit; a list of units is refused with a clear message.
fn single_unit<'de, D: Deserializer<'de>>(de: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum UnitRef {
        One(String),
        Many(#[allow(dead_code)] Vec<String>),
    }
    match UnitRef::deserialize(de)? {
        UnitRef::One(id) => Ok(id),
        UnitRef::Many(_) => Err(serde::de::Error::custom(
            "multi-unit suitability is not supported; give a single unit id",
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub id: String,
    #[serde(default)]
    pub is_final: bool,
    /// Amount due at the end of the horizon.
    #[serde(default)]
    pub demand: f64,
    #[serde(default)]
    pub initial_stock: f64,
}

impl State {
    pub fn new(id: &str, is_final: bool, demand: f64, initial_stock: f64) -> Self {
        State {
            id: id.to_string(),
            is_final,
            demand,
            initial_stock,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Produces,
    Consumes,
}

/// Recipe arc of the state-task network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StnArc {
    pub task: String,
    pub state: String,
    pub direction: Direction,
    pub coefficient: f64,
}

impl StnArc {
    pub fn new(task: &str, state: &str, direction: Direction, coefficient: f64) -> Self {
        StnArc {
            task: task.to_string(),
            state: state.to_string(),
            direction,
            coefficient,
        }
    }
}

/// One positive entry of the changeover matrix. Missing pairs mean no changeover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Changeover {
    pub from: String,
    pub to: String,
    /// Hours.
    pub ctime: f64,
}

impl Changeover {
    pub fn new(from: &str, to: &str, ctime: f64) -> Self {
        Changeover {
            from: from.to_string(),
            to: to.to_string(),
            ctime,
        }
    }
}

/// Allowed changeover intervals in hours from the horizon start, one list
/// per changeover class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSet {
    #[serde(default)]
    pub c: Vec<[f64; 2]>,
    #[serde(default)]
    pub c1: Vec<[f64; 2]>,
}

impl WindowSet {
    pub fn for_class(&self, kind: TaskKind) -> &[[f64; 2]] {
        match kind {
            TaskKind::ChangeoverC1 => &self.c1,
            _ => &self.c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub units: Vec<Unit>,
    pub tasks: Vec<Task>,
    pub states: Vec<State>,
    pub arcs: Vec<StnArc>,
    pub changeovers: Vec<Changeover>,
    pub horizon_h: f64,
    pub n_max: usize,
    pub windows: WindowSet,
}

impl Instance {
    pub fn unit(&self, id: &str) -> Option<&Unit> {
        self.units.iter().find(|u| u.id == id)
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s.id == id)
    }

    /// All tasks suitable for `unit`, in document order.
    pub fn tasks_on<'a>(&'a self, unit: &'a str) -> impl Iterator<Item = (usize, &'a Task)> + 'a {
        self.tasks.iter().enumerate().filter(move |(_, t)| t.unit == unit)
    }

    /// Processing tasks on `unit` (the set I^p ∩ I_u).
    pub fn processing_on(&self, unit: &str) -> Vec<usize> {
        self.tasks_on(unit)
            .filter(|(_, t)| t.kind.is_processing())
            .map(|(i, _)| i)
            .collect()
    }

    /// Processing tasks of one class on `unit`.
    pub fn class_on(&self, unit: &str, kind: TaskKind) -> Vec<usize> {
        self.tasks_on(unit)
            .filter(|(_, t)| t.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    /// The changeover task of the given class hosted by `unit`, if any.
    pub fn changeover_task(&self, unit: &str, kind: TaskKind) -> Option<usize> {
        debug_assert!(kind.is_changeover());
        self.tasks_on(unit).find(|(_, t)| t.kind == kind).map(|(i, _)| i)
    }

    pub fn main_units(&self) -> impl Iterator<Item = &Unit> {
        self.units.iter().filter(|u| u.is_main)
    }

    /// Changeover time from task `from` to task `to`; zero when absent.
    pub fn ctime(&self, from: &str, to: &str) -> f64 {
        self.changeovers
            .iter()
            .find(|c| c.from == from && c.to == to)
            .map_or(0.0, |c| c.ctime)
    }

    /// Changeover time by task index.
    pub fn ctime_idx(&self, from: usize, to: usize) -> f64 {
        self.ctime(&self.tasks[from].id, &self.tasks[to].id)
    }

    /// Arcs of task `task` in the given direction.
    pub fn arcs_of<'a>(&'a self, task: &'a str, dir: Direction) -> impl Iterator<Item = &'a StnArc> + 'a {
        self.arcs.iter().filter(move |a| a.task == task && a.direction == dir)
    }

    /// Serialises to the canonical JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialisation cannot fail")
    }
}

/// A broken invariant, naming the offending entity and the rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl Violation {
    fn new(entity: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            entity: entity.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

/// Checks every structural invariant of `inst`. An empty result means the
/// instance is well formed.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();

    if !(inst.horizon_h > 0.0 && inst.horizon_h.is_finite()) {
        out.push(Violation::new("horizon_h", "horizon must be positive"));
    }
    if inst.n_max < 1 {
        out.push(Violation::new("n_max", "at least one event point required"));
    }

    check_unique(inst.units.iter().map(|u| u.id.as_str()), "unit", &mut out);
    check_unique(inst.tasks.iter().map(|t| t.id.as_str()), "task", &mut out);
    check_unique(inst.states.iter().map(|s| s.id.as_str()), "state", &mut out);

    for t in &inst.tasks {
        let entity = format!("task {}", t.id);
        let unit = inst.unit(&t.unit);
        if unit.is_none() {
            out.push(Violation::new(&entity, format!("unresolved unit {}", t.unit)));
        }
        if t.kind.is_processing() {
            match t.rate {
                Some(r) if r > 0.0 && r.is_finite() => {}
                _ => out.push(Violation::new(&entity, "processing rate must be positive")),
            }
            match (t.b_min, t.b_max) {
                (Some(lo), Some(hi)) if lo >= 0.0 && lo <= hi && hi.is_finite() => {}
                (Some(_), Some(_)) => {
                    out.push(Violation::new(&entity, "batch bounds must satisfy 0 <= b_min <= b_max"))
                }
                _ => out.push(Violation::new(&entity, "batch bounds missing")),
            }
        } else {
            if t.rate.is_some() || t.b_min.is_some() || t.b_max.is_some() {
                out.push(Violation::new(
                    &entity,
                    "changeover tasks carry no rate or batch bounds",
                ));
            }
            if let Some(u) = unit {
                if !u.is_main {
                    out.push(Violation::new(&entity, "changeover task on a non-main unit"));
                }
            }
        }
    }

    for u in inst.main_units() {
        for kind in [TaskKind::ChangeoverC, TaskKind::ChangeoverC1] {
            let n = inst.tasks_on(&u.id).filter(|(_, t)| t.kind == kind).count();
            if n > 1 {
                out.push(Violation::new(
                    format!("unit {}", u.id),
                    format!("more than one {kind} task"),
                ));
            }
        }
    }

    for s in &inst.states {
        let entity = format!("state {}", s.id);
        if !(s.demand >= 0.0 && s.demand.is_finite()) {
            out.push(Violation::new(&entity, "demand must be non-negative"));
        }
        if !(s.initial_stock >= 0.0 && s.initial_stock.is_finite()) {
            out.push(Violation::new(&entity, "initial stock must be non-negative"));
        }
        if s.demand > 0.0 && !s.is_final {
            out.push(Violation::new(&entity, "demand on a non-final state"));
        }
    }

    let mut coefficient_sums: BTreeMap<(&str, bool), f64> = BTreeMap::new();
    for a in &inst.arcs {
        let entity = format!("arc {}->{}", a.task, a.state);
        match inst.task(&a.task) {
            None => out.push(Violation::new(&entity, format!("unresolved task {}", a.task))),
            Some(t) if !t.kind.is_processing() => {
                out.push(Violation::new(&entity, "recipe arcs only attach to processing tasks"))
            }
            Some(_) => {}
        }
        if inst.state_index(&a.state).is_none() {
            out.push(Violation::new(&entity, format!("unresolved state {}", a.state)));
        }
        if !(a.coefficient > 0.0 && a.coefficient <= 1.0) {
            out.push(Violation::new(&entity, "coefficient must lie in (0, 1]"));
        }
        *coefficient_sums
            .entry((a.task.as_str(), a.direction == Direction::Produces))
            .or_default() += a.coefficient;
    }
    for ((task, produces), sum) in coefficient_sums {
        if sum > 1.0 + COEFFICIENT_SUM_SLACK {
            let dir = if produces { "production" } else { "consumption" };
            out.push(Violation::new(
                format!("task {task}"),
                format!("{dir} coefficients sum to {sum} > 1"),
            ));
        }
    }

    let mut seen_pairs = HashSet::new();
    for c in &inst.changeovers {
        let entity = format!("changeover {}->{}", c.from, c.to);
        if !seen_pairs.insert((c.from.as_str(), c.to.as_str())) {
            out.push(Violation::new(&entity, "duplicate changeover entry"));
        }
        if !(c.ctime >= 0.0 && c.ctime.is_finite()) {
            out.push(Violation::new(&entity, "changeover time must be non-negative"));
        } else if c.ctime > inst.horizon_h {
            out.push(Violation::new(&entity, "changeover time exceeds the horizon"));
        }
        if c.from == c.to {
            out.push(Violation::new(&entity, "changeover from a task to itself"));
            continue;
        }
        let (from, to) = match (inst.task(&c.from), inst.task(&c.to)) {
            (Some(f), Some(t)) => (f, t),
            (f, _) => {
                let missing = if f.is_none() { &c.from } else { &c.to };
                out.push(Violation::new(&entity, format!("unresolved task {missing}")));
                continue;
            }
        };
        if !from.kind.is_processing() || !to.kind.is_processing() {
            out.push(Violation::new(
                &entity,
                "changeovers are defined between processing tasks",
            ));
        }
        if from.unit != to.unit {
            out.push(Violation::new(&entity, "tasks on different units"));
        } else if !inst.unit(&from.unit).is_some_and(|u| u.is_main) {
            out.push(Violation::new(&entity, "changeover on a non-main unit"));
        }
    }

    // Closure: a positive P1 -> NP1 entry needs a C1 task, any other positive entry a C task.
    for u in inst.main_units() {
        let mut needs_c = false;
        let mut needs_c1 = false;
        for c in inst.changeovers.iter().filter(|c| c.ctime > 0.0) {
            let (Some(f), Some(t)) = (inst.task(&c.from), inst.task(&c.to)) else {
                continue;
            };
            if f.unit != u.id {
                continue;
            }
            if f.kind == TaskKind::P1 && t.kind == TaskKind::Np1 {
                needs_c1 = true;
            } else {
                needs_c = true;
            }
        }
        if needs_c1 && inst.changeover_task(&u.id, TaskKind::ChangeoverC1).is_none() {
            out.push(Violation::new(
                format!("unit {}", u.id),
                "positive P1->NP1 changeover time but no CHANGEOVER_C1 task",
            ));
        }
        if needs_c && inst.changeover_task(&u.id, TaskKind::ChangeoverC).is_none() {
            out.push(Violation::new(
                format!("unit {}", u.id),
                "positive changeover time but no CHANGEOVER_C task",
            ));
        }
    }

    for (label, list) in [("windows.c", &inst.windows.c), ("windows.c1", &inst.windows.c1)] {
        for (k, w) in list.iter().enumerate() {
            let entity = format!("{label}[{k}]");
            if !(w[0] >= 0.0 && w[0] < w[1] && w[1].is_finite()) {
                out.push(Violation::new(&entity, "window needs 0 <= start < end"));
            }
            if k > 0 && list[k - 1][1] >= w[0] {
                out.push(Violation::new(&entity, "windows must be sorted and pairwise disjoint"));
            }
        }
    }

    out
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>, what: &str, out: &mut Vec<Violation>) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            out.push(Violation::new(format!("{what} {id}"), "duplicate id"));
        }
    }
}

/// Soft findings that do not make an instance invalid but usually make it infeasible.
pub fn warnings(inst: &Instance) -> Vec<String> {
    let mut out = Vec::new();
    let min_ctime = inst
        .changeovers
        .iter()
        .map(|c| c.ctime)
        .filter(|&c| c > 0.0)
        .fold(f64::INFINITY, f64::min);
    let windows = inst.windows.c.iter().chain(&inst.windows.c1);
    let max_window = windows.map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    if min_ctime.is_finite() && max_window.is_finite() && min_ctime > max_window {
        out.push(format!(
            "shortest positive changeover time {min_ctime} h exceeds the longest window {max_window} h"
        ));
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("parse error at {path} (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Parses and validates an instance document.
pub fn load(text: &str) -> Result<Instance, LoadError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let inst: Instance = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        LoadError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    let violations = validate(&inst);
    if violations.is_empty() {
        Ok(inst)
    } else {
        Err(LoadError::Invalid(violations))
    }
}
