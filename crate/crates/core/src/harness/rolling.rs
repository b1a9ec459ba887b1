//! Horizon selection and sequential solving over a longer planning period.
//!
//! The period is cut into horizons of the recipe's length. [`plan_horizons`]
//! picks a prefix of horizons and the states each one must handle;
//! [`run_rolling`] solves them in order, carrying terminal stock and unmet
//! demand forward.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{fixture_ex1, HarnessError};
use crate::compile::{compile, CompileOptions};
use crate::instance::{validate, Direction, Instance, Violation};
use crate::solver::{decode, solve, Limits, Schedule, SolveStatus};

const UNMET_TOL: f64 = 1e-6;

/// Demand for a state, due at the end of a horizon (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DueDemand {
    pub state: String,
    pub horizon: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Estimated binaries of one horizon's model.
    pub max_binaries: usize,
    /// Estimated busy hours of any main unit in one horizon.
    pub max_load_hours: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_binaries: 10_000,
            max_load_hours: 1e9,
        }
    }
}

/// A recipe (demands in it are ignored; its stocks open the period), the
/// period length and the due demands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonthPlan {
    pub recipe: Instance,
    pub period_h: f64,
    pub demands: Vec<DueDemand>,
    #[serde(default)]
    pub budgets: Budgets,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonSlot {
    pub index: usize,
    pub selected: bool,
    pub demands: BTreeMap<String, f64>,
    /// Demanded states with everything upstream of them.
    pub states: Vec<String>,
    pub tasks: Vec<String>,
    pub binary_estimate: usize,
    pub load_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonPlan {
    pub recipe: Instance,
    pub horizons: Vec<HorizonSlot>,
    pub initial_stock: BTreeMap<String, f64>,
}

impl HorizonPlan {
    pub fn selected(&self) -> impl Iterator<Item = &HorizonSlot> {
        self.horizons.iter().filter(|h| h.selected)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("period of {period} h is not a positive multiple of the {horizon} h horizon")]
    NotMultiple { period: f64, horizon: f64 },
    #[error("recipe is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidRecipe(Vec<Violation>),
    #[error("demand names unknown state {0}")]
    UnknownState(String),
    #[error("demand for {state} is due in horizon {horizon}, outside 1..={count}")]
    BadHorizon {
        state: String,
        horizon: usize,
        count: usize,
    },
    #[error("demand for {state} must be non-negative, got {amount}")]
    NegativeDemand { state: String, amount: f64 },
    #[error(
        "horizon {horizon} alone exceeds the budgets: {binaries} binaries (max {max_binaries}), \
         {load_hours:.3} h main-unit load (max {max_load_hours})"
    )]
    Overflow {
        horizon: usize,
        binaries: usize,
        max_binaries: usize,
        load_hours: f64,
        max_load_hours: f64,
    },
}

/// Demanded states plus every state and producing task upstream of them.
fn closure(recipe: &Instance, demanded: &BTreeSet<String>) -> (BTreeSet<String>, BTreeSet<usize>) {
    let mut states = demanded.clone();
    let mut tasks = BTreeSet::new();
    let mut queue: Vec<String> = demanded.iter().cloned().collect();
    while let Some(s) = queue.pop() {
        for a in recipe
            .arcs
            .iter()
            .filter(|a| a.state == s && a.direction == Direction::Produces)
        {
            let Some(t) = recipe.task_index(&a.task) else { continue };
            if !tasks.insert(t) {
                continue;
            }
            for b in recipe.arcs.iter().filter(|b| b.task == a.task) {
                if states.insert(b.state.clone()) {
                    queue.push(b.state.clone());
                }
            }
        }
    }
    (states, tasks)
}

/// Changeover tasks on the main units hosting `tasks`.
fn changeover_tasks(recipe: &Instance, tasks: &BTreeSet<usize>) -> BTreeSet<usize> {
    let units: BTreeSet<&str> = tasks.iter().map(|&t| recipe.tasks[t].unit.as_str()).collect();
    recipe
        .tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| t.kind.is_changeover() && units.contains(t.unit.as_str()))
        .filter(|(_, t)| recipe.unit(&t.unit).is_some_and(|u| u.is_main))
        .map(|(i, _)| i)
        .collect()
}

/// `wv` for every task in the horizon model plus one first-active-task
/// binary per processing task on a main unit and event point.
fn binary_estimate(recipe: &Instance, tasks: &BTreeSet<usize>) -> usize {
    let on_main = tasks
        .iter()
        .filter(|&&t| recipe.unit(&recipe.tasks[t].unit).is_some_and(|u| u.is_main))
        .count();
    (tasks.len() + changeover_tasks(recipe, tasks).len() + on_main) * recipe.n_max
}

/// Processing hours per unit to make `amount` of `state`, following the
/// first producer of each state upstream; stock on hand is ignored.
fn add_load(recipe: &Instance, state: &str, amount: f64, depth: usize, hours: &mut BTreeMap<String, f64>) {
    if depth > 64 || amount <= 0.0 {
        return;
    }
    let Some(arc) = recipe
        .arcs
        .iter()
        .find(|a| a.state == state && a.direction == Direction::Produces)
    else {
        return;
    };
    let Some(task) = recipe.task(&arc.task) else { return };
    let batch = amount / arc.coefficient;
    *hours.entry(task.unit.clone()).or_default() += batch / task.rate();
    for input in recipe.arcs_of(&task.id, Direction::Consumes) {
        add_load(recipe, &input.state, input.coefficient * batch, depth + 1, hours);
    }
}

fn main_unit_load(recipe: &Instance, demands: &BTreeMap<String, f64>) -> f64 {
    let mut hours = BTreeMap::new();
    for (s, &q) in demands {
        add_load(recipe, s, q, 0, &mut hours);
    }
    hours
        .iter()
        .filter(|(u, _)| recipe.unit(u).is_some_and(|u| u.is_main))
        .map(|(_, &h)| h)
        .fold(0.0, f64::max)
}

/// Selects the horizons up to the last one with a due demand, stopping
/// early at the first horizon whose content breaks a budget.
pub fn plan_horizons(plan: &MonthPlan) -> Result<HorizonPlan, PlanError> {
    let recipe = &plan.recipe;
    let violations = validate(recipe);
    if !violations.is_empty() {
        return Err(PlanError::InvalidRecipe(violations));
    }
    let ratio = plan.period_h / recipe.horizon_h;
    if !(ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9) {
        return Err(PlanError::NotMultiple {
            period: plan.period_h,
            horizon: recipe.horizon_h,
        });
    }
    let count = ratio.round() as usize;
    let mut due: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new(); count];
    for d in &plan.demands {
        if recipe.state_index(&d.state).is_none() {
            return Err(PlanError::UnknownState(d.state.clone()));
        }
        if d.horizon == 0 || d.horizon > count {
            return Err(PlanError::BadHorizon {
                state: d.state.clone(),
                horizon: d.horizon,
                count,
            });
        }
        if !(d.amount >= 0.0) {
            return Err(PlanError::NegativeDemand {
                state: d.state.clone(),
                amount: d.amount,
            });
        }
        *due[d.horizon - 1].entry(d.state.clone()).or_default() += d.amount;
    }
    let last = due.iter().rposition(|d| !d.is_empty()).map_or(0, |k| k + 1);

    let mut horizons = Vec::with_capacity(count);
    let mut open = true;
    for (k, demands) in due.into_iter().enumerate() {
        let index = k + 1;
        let names: BTreeSet<String> = demands.keys().cloned().collect();
        let (states, tasks) = closure(recipe, &names);
        let binaries = binary_estimate(recipe, &tasks);
        let load = main_unit_load(recipe, &demands);
        let fits = binaries <= plan.budgets.max_binaries && load <= plan.budgets.max_load_hours;
        if !fits && index == 1 {
            return Err(PlanError::Overflow {
                horizon: index,
                binaries,
                max_binaries: plan.budgets.max_binaries,
                load_hours: load,
                max_load_hours: plan.budgets.max_load_hours,
            });
        }
        open = open && fits && index <= last;
        horizons.push(HorizonSlot {
            index,
            selected: open,
            demands,
            states: states.into_iter().collect(),
            tasks: tasks.iter().map(|&t| recipe.tasks[t].id.clone()).collect(),
            binary_estimate: binaries,
            load_hours: load,
        });
    }
    Ok(HorizonPlan {
        recipe: recipe.clone(),
        horizons,
        initial_stock: recipe.states.iter().map(|s| (s.id.clone(), s.initial_stock)).collect(),
    })
}

/// The recipe cut down to the closure of `demands`, opening with `stock`.
pub fn horizon_instance(recipe: &Instance, demands: &BTreeMap<String, f64>, stock: &BTreeMap<String, f64>) -> Instance {
    let names: BTreeSet<String> = demands.keys().cloned().collect();
    let (mut states, mut tasks) = closure(recipe, &names);
    for &t in &tasks {
        for a in recipe.arcs.iter().filter(|a| a.task == recipe.tasks[t].id) {
            states.insert(a.state.clone());
        }
    }
    tasks.extend(changeover_tasks(recipe, &tasks));
    let task_ids: BTreeSet<&str> = tasks.iter().map(|&t| recipe.tasks[t].id.as_str()).collect();
    let units: BTreeSet<&str> = tasks.iter().map(|&t| recipe.tasks[t].unit.as_str()).collect();
    let mut inst = Instance {
        units: recipe
            .units
            .iter()
            .filter(|u| units.contains(u.id.as_str()))
            .cloned()
            .collect(),
        tasks: tasks.iter().map(|&t| recipe.tasks[t].clone()).collect(),
        states: recipe
            .states
            .iter()
            .filter(|s| states.contains(&s.id))
            .cloned()
            .collect(),
        arcs: recipe
            .arcs
            .iter()
            .filter(|a| task_ids.contains(a.task.as_str()))
            .cloned()
            .collect(),
        changeovers: recipe
            .changeovers
            .iter()
            .filter(|c| task_ids.contains(c.from.as_str()) && task_ids.contains(c.to.as_str()))
            .cloned()
            .collect(),
        horizon_h: recipe.horizon_h,
        n_max: recipe.n_max,
        windows: recipe.windows.clone(),
    };
    inst.tasks.sort_by_key(|t| recipe.task_index(&t.id));
    for s in &mut inst.states {
        s.demand = demands.get(&s.id).copied().unwrap_or(0.0);
        s.initial_stock = stock.get(&s.id).copied().unwrap_or(s.initial_stock);
    }
    inst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonOutcome {
    pub index: usize,
    pub status: SolveStatus,
    pub objective_vector: Vec<f64>,
    /// Due demands plus demand rolled over from the previous horizon.
    pub demands: BTreeMap<String, f64>,
    pub stock_in: BTreeMap<String, f64>,
    /// Terminal stock after deliveries.
    pub stock_out: BTreeMap<String, f64>,
    pub unmet: BTreeMap<String, f64>,
    pub schedule: Schedule,
    /// `None` for horizons with nothing to do.
    pub instance: Option<Instance>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingResult {
    pub horizons: Vec<HorizonOutcome>,
    /// False when a solve stopped at a limit before the last horizon.
    pub complete: bool,
    pub final_unmet: BTreeMap<String, f64>,
}

/// Solves the selected horizons in order.
pub fn run_rolling(plan: &HorizonPlan, options: CompileOptions, limits: Limits) -> Result<RollingResult, HarnessError> {
    let mut stock = plan.initial_stock.clone();
    let mut carry: BTreeMap<String, f64> = BTreeMap::new();
    let mut out = Vec::new();
    let mut complete = true;
    for slot in plan.selected() {
        let mut demands = slot.demands.clone();
        for (s, q) in std::mem::take(&mut carry) {
            *demands.entry(s).or_default() += q;
        }
        let stock_in = stock.clone();
        if demands.is_empty() {
            out.push(HorizonOutcome {
                index: slot.index,
                status: SolveStatus::Optimal,
                objective_vector: vec![0.0; 3],
                demands,
                stock_out: stock_in.clone(),
                stock_in,
                unmet: BTreeMap::new(),
                schedule: Schedule::default(),
                instance: None,
            });
            continue;
        }
        let inst = horizon_instance(&plan.recipe, &demands, &stock);
        let compiled = compile(&inst, options)?;
        let result = solve(&compiled.model, limits)?;
        if !result.has_assignment() {
            out.push(HorizonOutcome {
                index: slot.index,
                status: result.status,
                objective_vector: vec![],
                demands,
                stock_out: stock_in.clone(),
                stock_in,
                unmet: BTreeMap::new(),
                schedule: Schedule::default(),
                instance: Some(inst),
            });
            complete = false;
            break;
        }
        let schedule = decode(&inst, &compiled, &result).map_err(|e| HarnessError::Verification {
            context: format!("horizon {}", slot.index),
            error: e,
        })?;
        let mut unmet = BTreeMap::new();
        for (si, s) in inst.states.iter().enumerate() {
            let terminal = result.value(compiled.core.terminal_stock(si)).max(0.0);
            let short = compiled.core.under[si].map_or(0.0, |u| result.value(u).max(0.0));
            let delivered = (s.demand - short).clamp(0.0, terminal);
            stock.insert(s.id.clone(), terminal - delivered);
            if short > UNMET_TOL {
                unmet.insert(s.id.clone(), short);
            }
        }
        carry = unmet.clone();
        let limited = result.status.is_limit();
        out.push(HorizonOutcome {
            index: slot.index,
            status: result.status,
            objective_vector: result.objective_vector.clone(),
            demands,
            stock_in,
            stock_out: stock.clone(),
            unmet,
            schedule,
            instance: Some(inst),
        });
        if limited {
            complete = false;
            break;
        }
    }
    Ok(RollingResult {
        horizons: out,
        complete,
        final_unmet: carry,
    })
}

/// Four 12 h horizons on the single-unit fixture recipe. Horizon 3 asks
/// for more than one horizon can make, so demand rolls into horizon 4.
pub fn synthetic_month() -> MonthPlan {
    let mut recipe = fixture_ex1();
    for s in &mut recipe.states {
        s.demand = 0.0;
    }
    let due = |state: &str, horizon, amount| DueDemand {
        state: state.into(),
        horizon,
        amount,
    };
    MonthPlan {
        recipe,
        period_h: 48.0,
        demands: vec![
            due("PC", 1, 10.0),
            due("PB", 2, 20.0),
            due("PC", 3, 60.0),
            due("PB", 4, 10.0),
        ],
        budgets: Budgets::default(),
    }
}

impl fmt::Display for HorizonPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.horizons {
            let demands: Vec<String> = h.demands.iter().map(|(s, q)| format!("{s}={q}")).collect();
            writeln!(
                f,
                "horizon {:>3} {:<10} demands [{}] states [{}] binaries {} load {:.3} h",
                h.index,
                if h.selected { "selected" } else { "-" },
                demands.join(", "),
                h.states.join(", "),
                h.binary_estimate,
                h.load_hours
            )?;
        }
        Ok(())
    }
}

impl fmt::Display for RollingResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |m: &BTreeMap<String, f64>| -> String {
            m.iter()
                .map(|(s, q)| format!("{s}={q:.6}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        for h in &self.horizons {
            let obj: Vec<String> = h.objective_vector.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(f, "horizon {} ({}) objective [{}]", h.index, h.status, obj.join(", "))?;
            writeln!(f, "  demands   {}", show(&h.demands))?;
            writeln!(f, "  stock in  {}", show(&h.stock_in))?;
            writeln!(f, "  stock out {}", show(&h.stock_out))?;
            if !h.unmet.is_empty() {
                writeln!(f, "  unmet     {}", show(&h.unmet))?;
            }
            for line in h.schedule.to_string().lines() {
                writeln!(f, "  {line}")?;
            }
        }
        if !self.complete {
            writeln!(f, "stopped early at a solve limit")?;
        }
        if !self.final_unmet.is_empty() {
            writeln!(f, "unmet at end: {}", show(&self.final_unmet))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan_with(demands: Vec<DueDemand>, budgets: Budgets) -> MonthPlan {
        let mut p = synthetic_month();
        p.demands = demands;
        p.budgets = budgets;
        p
    }

    fn due(state: &str, horizon: usize, amount: f64) -> DueDemand {
        DueDemand {
            state: state.into(),
            horizon,
            amount,
        }
    }

    #[test]
    fn single_due_horizon() {
        let p = plan_horizons(&plan_with(vec![due("PC", 1, 10.0)], Budgets::default())).unwrap();
        let sel: Vec<usize> = p.selected().map(|h| h.index).collect();
        assert_eq!(sel, vec![1]);
        assert_eq!(p.horizons[0].states, vec!["IA", "PC", "R"]);
        assert_eq!(p.horizons[0].tasks, vec!["A", "C"]);
    }

    #[test]
    fn prefix_rule() {
        let p = plan_horizons(&plan_with(
            vec![due("PC", 1, 10.0), due("PB", 3, 5.0)],
            Budgets::default(),
        ))
        .unwrap();
        let sel: Vec<usize> = p.selected().map(|h| h.index).collect();
        assert_eq!(sel, vec![1, 2, 3]);
        assert!(!p.horizons[3].selected);
    }

    #[test]
    fn budget_overflow_in_first_horizon() {
        let b = Budgets {
            max_binaries: 4,
            max_load_hours: 1e9,
        };
        let err = plan_horizons(&plan_with(vec![due("PC", 1, 10.0)], b)).unwrap_err();
        assert!(matches!(err, PlanError::Overflow { horizon: 1, .. }), "{err}");
    }

    #[test]
    fn later_overflow_truncates() {
        let b = Budgets {
            max_binaries: 10_000,
            max_load_hours: 5.0,
        };
        let p = plan_horizons(&plan_with(vec![due("PC", 1, 10.0), due("PC", 2, 100.0)], b)).unwrap();
        let sel: Vec<usize> = p.selected().map(|h| h.index).collect();
        assert_eq!(sel, vec![1]);
        // 100 PC needs 10 h on C and 10 h on A, all on U1
        assert!((p.horizons[1].load_hours - 20.0).abs() < 1e-12);
    }

    #[test]
    fn period_must_be_a_multiple() {
        let mut p = synthetic_month();
        p.period_h = 30.0;
        assert!(matches!(plan_horizons(&p), Err(PlanError::NotMultiple { .. })));
    }

    #[test]
    fn closure_instance_is_valid() {
        let mut d = BTreeMap::new();
        d.insert("PB".to_string(), 20.0);
        let inst = horizon_instance(&synthetic_month().recipe, &d, &BTreeMap::new());
        assert_eq!(validate(&inst), vec![]);
        let ids: Vec<&str> = inst.tasks.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, vec!["B", "CH", "CH1"]);
    }
}
