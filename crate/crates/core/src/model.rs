//! Solver-independent linear model representation.
//!
//! Variables and constraints are registered through the builder methods on
//! [`LinearModel`]. Every constraint carries a group tag naming the
//! constraint family it belongs to; [`count`] reports cardinalities per tag,
//! which is how formulation sizes are compared.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(f64, VarId)>,
    pub sense: Sense,
    pub rhs: f64,
    pub group: String,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(a, v)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violate this row (zero when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// One minimisation level of a lexicographic objective.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ObjectiveLevel {
    pub label: String,
    pub terms: Vec<(f64, VarId)>,
}

impl ObjectiveLevel {
    pub fn value(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(a, v)| a * values[v.0]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate variable name {0}")]
    DuplicateVariable(String),
    #[error("duplicate constraint name {0}")]
    DuplicateConstraint(String),
    #[error("constraint {constraint} references unknown variable #{var}")]
    UnknownVariable { constraint: String, var: usize },
    #[error("variable {0} has lo > hi")]
    InvalidBounds(String),
    #[error("constraint {0} has an empty group tag")]
    EmptyGroup(String),
    #[error("objective level {level} is not contiguous (model has {have} levels)")]
    ObjectiveLevel { level: usize, have: usize },
}

/// Linear model with named variables, tagged constraints and a
/// lexicographic (all-minimise) objective.
#[derive(Debug, Clone, Default)]
pub struct LinearModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<ObjectiveLevel>,
    group_notes: BTreeMap<String, String>,
    var_index: HashMap<String, VarId>,
    con_index: HashMap<String, ConId>,
}

impl LinearModel {
    pub fn new(name: impl Into<String>) -> Self {
        LinearModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lo: f64,
        hi: f64,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        if self.var_index.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        let (lo, hi) = match kind {
            VarKind::Binary => (lo.max(0.0), hi.min(1.0)),
            VarKind::Continuous => (lo, hi),
        };
        if lo > hi || lo.is_nan() || hi.is_nan() {
            return Err(ModelError::InvalidBounds(name));
        }
        let id = VarId(self.variables.len());
        self.var_index.insert(name.clone(), id);
        self.variables.push(Variable { name, kind, lo, hi });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, ModelError> {
        self.add_variable(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lo: f64, hi: f64) -> Result<VarId, ModelError> {
        self.add_variable(name, VarKind::Continuous, lo, hi)
    }

    /// Registers a constraint. Repeated variables are merged and zero
    /// coefficients dropped, so stored rows never mention a variable twice.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        group: &str,
        terms: impl IntoIterator<Item = (f64, VarId)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConId, ModelError> {
        let name = name.into();
        if group.is_empty() {
            return Err(ModelError::EmptyGroup(name));
        }
        if self.con_index.contains_key(&name) {
            return Err(ModelError::DuplicateConstraint(name));
        }
        let mut raw: Vec<(f64, VarId)> = terms.into_iter().collect();
        if let Some(&(_, v)) = raw.iter().find(|(_, v)| v.0 >= self.variables.len()) {
            return Err(ModelError::UnknownVariable {
                constraint: name,
                var: v.0,
            });
        }
        raw.sort_by_key(|&(_, v)| v);
        let mut merged: Vec<(f64, VarId)> = Vec::with_capacity(raw.len());
        for (a, v) in raw {
            match merged.last_mut() {
                Some(last) if last.1 == v => last.0 += a,
                _ => merged.push((a, v)),
            }
        }
        merged.retain(|&(a, _)| a != 0.0);
        let id = ConId(self.constraints.len());
        self.con_index.insert(name.clone(), id);
        self.constraints.push(Constraint {
            name,
            terms: merged,
            sense,
            rhs,
            group: group.to_string(),
        });
        Ok(id)
    }

    /// Appends terms to objective level `level` (1-based). A level may only
    /// be opened directly after the previous one.
    pub fn add_objective_terms(
        &mut self,
        level: usize,
        label: &str,
        terms: impl IntoIterator<Item = (f64, VarId)>,
    ) -> Result<(), ModelError> {
        let have = self.objective.len();
        if level == 0 || level > have + 1 {
            return Err(ModelError::ObjectiveLevel { level, have });
        }
        if level == have + 1 {
            self.objective.push(ObjectiveLevel {
                label: label.to_string(),
                terms: Vec::new(),
            });
        }
        let n = self.variables.len();
        let slot = &mut self.objective[level - 1];
        for (a, v) in terms {
            if v.0 >= n {
                return Err(ModelError::UnknownVariable {
                    constraint: format!("objective level {level}"),
                    var: v.0,
                });
            }
            match slot.terms.iter_mut().find(|(_, w)| *w == v) {
                Some(t) => t.0 += a,
                None => slot.terms.push((a, v)),
            }
        }
        slot.terms.retain(|&(a, _)| a != 0.0);
        Ok(())
    }

    pub fn note_group(&mut self, group: &str, note: &str) {
        self.group_notes.insert(group.to_string(), note.to_string());
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[ObjectiveLevel] {
        &self.objective
    }

    pub fn group_notes(&self) -> &BTreeMap<String, String> {
        &self.group_notes
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn constraint_by_name(&self, name: &str) -> Option<&Constraint> {
        self.con_index.get(name).map(|c| &self.constraints[c.0])
    }

    pub fn constraints_in<'a>(&'a self, group: &'a str) -> impl Iterator<Item = &'a Constraint> + 'a {
        self.constraints.iter().filter(move |c| c.group == group)
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Objective values per level for a full assignment.
    pub fn objective_values(&self, values: &[f64]) -> Vec<f64> {
        self.objective.iter().map(|l| l.value(values)).collect()
    }

    /// Largest bound, integrality or row violation of `values`, with the
    /// name of the offending item.
    pub fn max_violation(&self, values: &[f64]) -> (f64, String) {
        let mut worst = (0.0, String::new());
        let mut bump = |amount: f64, what: &dyn Fn() -> String| {
            if amount > worst.0 {
                worst = (amount, what());
            }
        };
        for (v, &x) in self.variables.iter().zip(values) {
            bump((v.lo - x).max(x - v.hi).max(0.0), &|| format!("bounds of {}", v.name));
            if v.kind == VarKind::Binary {
                bump((x - x.round()).abs(), &|| format!("integrality of {}", v.name));
            }
        }
        for c in &self.constraints {
            bump(c.violation(values), &|| c.name.clone());
        }
        worst
    }

    /// Order-independent form used to compare models: names replace
    /// handles, coefficients are rounded to 12 significant digits and every
    /// list is sorted.
    pub fn canonical(&self) -> CanonicalModel {
        let vname = |v: VarId| self.variables[v.0].name.clone();
        let terms = |ts: &[(f64, VarId)]| {
            let mut out: Vec<(String, f64)> = ts
                .iter()
                .map(|&(a, v)| (vname(v), round_sig12(a)))
                .filter(|&(_, a)| a != 0.0)
                .collect();
            out.sort_by(|a, b| a.0.cmp(&b.0));
            out
        };
        let mut variables: Vec<_> = self
            .variables
            .iter()
            .map(|v| CanonicalVariable {
                name: v.name.clone(),
                binary: v.kind == VarKind::Binary,
                lo: round_sig12(v.lo),
                hi: round_sig12(v.hi),
            })
            .collect();
        variables.sort_by(|a, b| a.name.cmp(&b.name));
        let mut constraints: Vec<_> = self
            .constraints
            .iter()
            .map(|c| CanonicalConstraint {
                name: c.name.clone(),
                group: c.group.clone(),
                sense: c.sense,
                rhs: round_sig12(c.rhs),
                terms: terms(&c.terms),
            })
            .collect();
        constraints.sort_by(|a, b| a.name.cmp(&b.name));
        CanonicalModel {
            variables,
            constraints,
            objective: self.objective.iter().map(|l| terms(&l.terms)).collect(),
            group_notes: self.group_notes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalVariable {
    pub name: String,
    pub binary: bool,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalConstraint {
    pub name: String,
    pub group: String,
    pub sense: Sense,
    pub rhs: f64,
    pub terms: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalModel {
    pub variables: Vec<CanonicalVariable>,
    pub constraints: Vec<CanonicalConstraint>,
    pub objective: Vec<Vec<(String, f64)>>,
    pub group_notes: BTreeMap<String, String>,
}

/// Rounds to 12 significant decimal digits. Infinities pass through.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Constraint and variable cardinalities of a model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub constraints_by_group: BTreeMap<String, usize>,
    /// Keyed by the variable name prefix before the first `(`.
    pub variables_by_group: BTreeMap<String, usize>,
    pub total_constraints: usize,
    pub total_variables: usize,
    pub total_binaries: usize,
}

impl CountReport {
    pub fn group(&self, tag: &str) -> usize {
        self.constraints_by_group.get(tag).copied().unwrap_or(0)
    }

    pub fn var_group(&self, prefix: &str) -> usize {
        self.variables_by_group.get(prefix).copied().unwrap_or(0)
    }

    /// Sum over all constraint groups whose tag starts with `prefix`.
    pub fn groups_with_prefix(&self, prefix: &str) -> usize {
        self.constraints_by_group
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(_, v)| v)
            .sum()
    }
}

impl fmt::Display for CountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "constraint groups:")?;
        for (g, n) in &self.constraints_by_group {
            writeln!(f, "  {g:<22} {n:>8}")?;
        }
        writeln!(f, "  {:<22} {:>8}", "total", self.total_constraints)?;
        writeln!(f, "variable groups:")?;
        for (g, n) in &self.variables_by_group {
            writeln!(f, "  {g:<22} {n:>8}")?;
        }
        writeln!(f, "  {:<22} {:>8}", "total", self.total_variables)?;
        write!(f, "  {:<22} {:>8}", "binaries", self.total_binaries)
    }
}

pub fn var_group_of(name: &str) -> &str {
    name.split('(').next().unwrap_or(name)
}

pub fn count(model: &LinearModel) -> CountReport {
    let mut report = CountReport::default();
    for c in model.constraints() {
        *report.constraints_by_group.entry(c.group.clone()).or_default() += 1;
    }
    for v in model.variables() {
        *report
            .variables_by_group
            .entry(var_group_of(&v.name).to_string())
            .or_default() += 1;
    }
    report.total_constraints = model.constraints().len();
    report.total_variables = model.variables().len();
    report.total_binaries = model.num_binaries();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_handle_is_zero() {
        let mut m = LinearModel::new("t");
        assert_eq!(m.add_binary("wv(A,1)").unwrap(), VarId(0));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut m = LinearModel::new("t");
        let x = m.add_binary("x").unwrap();
        assert_eq!(m.add_binary("x"), Err(ModelError::DuplicateVariable("x".into())));
        m.add_constraint("c", "g", [(1.0, x)], Sense::Le, 1.0).unwrap();
        assert!(matches!(
            m.add_constraint("c", "g", [(1.0, x)], Sense::Le, 1.0),
            Err(ModelError::DuplicateConstraint(_))
        ));
    }

    #[test]
    fn unknown_variable_rejected() {
        let mut m = LinearModel::new("t");
        let err = m.add_constraint("c", "g", [(1.0, VarId(3))], Sense::Le, 1.0);
        assert!(matches!(err, Err(ModelError::UnknownVariable { var: 3, .. })));
    }

    #[test]
    fn repeated_terms_merge() {
        let mut m = LinearModel::new("t");
        let x = m.add_binary("x").unwrap();
        let y = m.add_binary("y").unwrap();
        m.add_constraint("c", "g", [(2.0, y), (1.0, x), (-1.0, x)], Sense::Le, 1.0)
            .unwrap();
        assert_eq!(m.constraints()[0].terms, vec![(2.0, y)]);
        m.add_constraint("d", "g", [(2.0, y), (1.0, x), (3.0, y)], Sense::Le, 1.0)
            .unwrap();
        assert_eq!(m.constraints()[1].terms, vec![(1.0, x), (5.0, y)]);
    }

    #[test]
    fn objective_levels_contiguous() {
        let mut m = LinearModel::new("t");
        let x = m.add_binary("x").unwrap();
        assert!(m.add_objective_terms(2, "b", [(1.0, x)]).is_err());
        m.add_objective_terms(1, "a", [(1.0, x)]).unwrap();
        m.add_objective_terms(2, "b", [(1.0, x)]).unwrap();
        assert_eq!(m.objective().len(), 2);
    }

    #[test]
    fn empty_model_counts_zero() {
        let r = count(&LinearModel::new("empty"));
        assert_eq!(r, CountReport::default());
    }

    #[test]
    fn count_ignores_insertion_order() {
        let build = |rev: bool| {
            let mut m = LinearModel::new("t");
            let mut names: Vec<_> = (0..5).map(|i| format!("x({i})")).collect();
            if rev {
                names.reverse();
            }
            let ids: Vec<_> = names.iter().map(|n| m.add_binary(n.clone()).unwrap()).collect();
            for (k, &id) in ids.iter().enumerate() {
                let g = if k % 2 == 0 { "a" } else { "b" };
                m.add_constraint(format!("c{k}"), g, [(1.0, id)], Sense::Le, 1.0)
                    .unwrap();
            }
            count(&m)
        };
        assert_eq!(build(false).total_constraints, 5);
        assert_eq!(build(false).variables_by_group, build(true).variables_by_group);
    }

    #[test]
    fn round_sig12_behaviour() {
        assert_eq!(round_sig12(0.1), 0.1);
        assert_eq!(round_sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig12(f64::INFINITY), f64::INFINITY);
        assert_eq!(round_sig12(-0.0), 0.0);
    }
}
