//! Solves an instance under both changeover formulations and compares the
//! optimal objective vectors.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::HarnessError;
use crate::compile::{compile, CompileOptions, Formulation, WindowMode};
use crate::instance::Instance;
use crate::solver::{decode, solve, Limits, SolveResult, SolveStatus};

pub const MATCH_TOL: f64 = 1e-6;
/// Levels compared for a match: underproduction and changeover hours.
pub const MATCH_LEVELS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub status: SolveStatus,
    pub objective_vector: Vec<f64>,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub wall_seconds: f64,
    /// `None` when there was nothing to decode.
    pub verified: Option<bool>,
    pub verify_detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceRecord {
    pub key: String,
    pub legacy: SolveSummary,
    pub compact: SolveSummary,
    /// `None` when a solve stopped at a limit.
    pub matched: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub records: Vec<EquivalenceRecord>,
}

pub(crate) fn solve_and_verify(
    inst: &Instance,
    options: CompileOptions,
    limits: Limits,
) -> Result<(SolveSummary, SolveResult), HarnessError> {
    let compiled = compile(inst, options)?;
    let result = solve(&compiled.model, limits)?;
    let (verified, verify_detail) = if result.has_assignment() {
        match decode(inst, &compiled, &result) {
            Ok(_) => (Some(true), String::new()),
            Err(e) => (Some(false), e.to_string()),
        }
    } else {
        (None, String::new())
    };
    let summary = SolveSummary {
        status: result.status,
        objective_vector: result.objective_vector.clone(),
        nodes: result.stats.nodes,
        lp_iterations: result.stats.lp_iterations,
        wall_seconds: result.stats.wall_seconds,
        verified,
        verify_detail,
    };
    Ok((summary, result))
}

fn vectors_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .take(MATCH_LEVELS)
            .all(|(x, y)| (x - y).abs() <= MATCH_TOL)
}

/// Compiles both formulations without window mechanisms, solves them and
/// compares the first [`MATCH_LEVELS`] objective levels.
pub fn check_equivalence(key: &str, inst: &Instance, limits: Limits) -> Result<EquivalenceRecord, HarnessError> {
    let (legacy, compact) = rayon::join(
        || solve_and_verify(inst, CompileOptions::new(Formulation::Legacy, WindowMode::None), limits),
        || {
            solve_and_verify(
                inst,
                CompileOptions::new(Formulation::Compact, WindowMode::None),
                limits,
            )
        },
    );
    let (legacy, compact) = (legacy?.0, compact?.0);
    let matched = match (legacy.status, compact.status) {
        (SolveStatus::Optimal, SolveStatus::Optimal) => {
            Some(vectors_match(&legacy.objective_vector, &compact.objective_vector))
        }
        (SolveStatus::Infeasible, SolveStatus::Infeasible) => Some(true),
        (a, b) if a.is_limit() || b.is_limit() => None,
        _ => Some(false),
    };
    Ok(EquivalenceRecord {
        key: key.to_string(),
        legacy,
        compact,
        matched,
    })
}

/// Runs [`check_equivalence`] over a suite in parallel; records keep the
/// suite order.
pub fn check_suite(suite: &[(String, Instance)], limits: Limits) -> Result<EquivalenceReport, HarnessError> {
    let records: Result<Vec<_>, _> = suite
        .par_iter()
        .map(|(key, inst)| check_equivalence(key, inst, limits))
        .collect();
    Ok(EquivalenceReport { records: records? })
}

impl EquivalenceReport {
    pub fn matched(&self) -> usize {
        self.records.iter().filter(|r| r.matched == Some(true)).count()
    }

    pub fn mismatched(&self) -> usize {
        self.records.iter().filter(|r| r.matched == Some(false)).count()
    }

    pub fn inconclusive(&self) -> usize {
        self.records.iter().filter(|r| r.matched.is_none()).count()
    }

    pub fn all_match(&self) -> bool {
        self.matched() == self.records.len()
    }

    /// Header: `key,match,legacy_status,compact_status,legacy_objective,
    /// compact_objective,legacy_nodes,compact_nodes,legacy_seconds,
    /// compact_seconds,legacy_verified,compact_verified`. Objective vectors
    /// are `;`-separated.
    pub fn to_csv(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            key: &'a str,
            #[serde(rename = "match")]
            matched: &'static str,
            legacy_status: String,
            compact_status: String,
            legacy_objective: String,
            compact_objective: String,
            legacy_nodes: usize,
            compact_nodes: usize,
            legacy_seconds: f64,
            compact_seconds: f64,
            legacy_verified: &'static str,
            compact_verified: &'static str,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(Row {
                key: &r.key,
                matched: match_word(r.matched),
                legacy_status: r.legacy.status.to_string(),
                compact_status: r.compact.status.to_string(),
                legacy_objective: join(&r.legacy.objective_vector),
                compact_objective: join(&r.compact.objective_vector),
                legacy_nodes: r.legacy.nodes,
                compact_nodes: r.compact.nodes,
                legacy_seconds: r.legacy.wall_seconds,
                compact_seconds: r.compact.wall_seconds,
                legacy_verified: verified_word(r.legacy.verified),
                compact_verified: verified_word(r.compact.verified),
            })
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

fn match_word(m: Option<bool>) -> &'static str {
    match m {
        Some(true) => "MATCH",
        Some(false) => "MISMATCH",
        None => "INCONCLUSIVE",
    }
}

fn verified_word(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "-",
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";")
}

fn show(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for EquivalenceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.key, match_word(self.matched))?;
        for (name, s) in [("legacy", &self.legacy), ("compact", &self.compact)] {
            write!(
                f,
                "  {name:<8} {:<10} objective {}  nodes {}  {:.3}s  verify {}",
                s.status.to_string(),
                show(&s.objective_vector),
                s.nodes,
                s.wall_seconds,
                verified_word(s.verified)
            )?;
            if !s.verify_detail.is_empty() {
                write!(f, " ({})", s.verify_detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            write!(f, "{r}")?;
        }
        writeln!(
            f,
            "{} instances: {} match, {} mismatch, {} inconclusive",
            self.records.len(),
            self.matched(),
            self.mismatched(),
            self.inconclusive()
        )
    }
}
