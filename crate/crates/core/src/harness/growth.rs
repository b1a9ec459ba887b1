//! Changeover constraint counts of both formulations over a grid of
//! instance sizes, checked against closed forms.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::HarnessError;
use crate::compact;
use crate::compile::{compile, CompileOptions, Formulation, WindowMode};
use crate::generate::{generate_family, FamilyParams};
use crate::instance::{Instance, TaskKind};
use crate::model::count;

/// `n_max` values crossed with tasks-per-unit values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthGrid {
    pub n_max: Vec<usize>,
    pub tasks: Vec<usize>,
    pub seed: u64,
}

impl GrowthGrid {
    pub fn new(n_max: Vec<usize>, tasks: Vec<usize>) -> Self {
        GrowthGrid { n_max, tasks, seed: 1 }
    }
}

impl Default for GrowthGrid {
    fn default() -> Self {
        GrowthGrid::new(vec![4, 8, 16], vec![3, 8])
    }
}

/// Parses `N1,N2,..xT1,T2,..`, e.g. `4,8,16x3,8`.
impl FromStr for GrowthGrid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (n, t) = s
            .split_once('x')
            .ok_or_else(|| format!("grid {s:?} should look like 4,8,16x3,8"))?;
        let list = |part: &str| -> Result<Vec<usize>, String> {
            part.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&v| v > 0)
                        .ok_or_else(|| format!("bad grid value {v:?}"))
                })
                .collect()
        };
        Ok(GrowthGrid::new(list(n)?, list(t)?))
    }
}

/// Expected per-unit sizes from the quantifier ranges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClosedForms {
    pub legacy_total: usize,
    pub legacy_x: usize,
    pub compact_total: usize,
    pub compact_x: usize,
    pub compact_new1: usize,
    pub compact_copy: usize,
    pub compact_act_p1p1: usize,
    pub compact_act_np1: usize,
    pub compact_act_p1np1: usize,
}

/// Sums the closed forms over the main units of `inst`.
pub fn closed_forms(inst: &Instance) -> ClosedForms {
    let n = inst.n_max;
    let mut cf = ClosedForms::default();
    for u in inst.main_units() {
        let proc = inst.processing_on(&u.id);
        let p1 = inst.class_on(&u.id, TaskKind::P1).len();
        let np1 = inst.class_on(&u.id, TaskKind::Np1).len();
        let positive: Vec<(usize, usize)> = proc
            .iter()
            .flat_map(|&a| proc.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| a != b && inst.ctime_idx(a, b) > 0.0)
            .collect();
        let pairs = positive.len();
        let c1_pairs = positive
            .iter()
            .filter(|&&(a, b)| inst.tasks[a].kind == TaskKind::P1 && inst.tasks[b].kind == TaskKind::Np1)
            .count();
        let has_c = usize::from(inst.changeover_task(&u.id, TaskKind::ChangeoverC).is_some());
        let has_c1 = usize::from(inst.changeover_task(&u.id, TaskKind::ChangeoverC1).is_some());
        let legacy_classes = has_c * usize::from(pairs > c1_pairs) + has_c1 * usize::from(c1_pairs > 0);
        cf.legacy_total += pairs * (n - 1) + 2 * pairs * n * (n - 1) / 2 + 2 * legacy_classes * (n - 1);
        cf.legacy_x += pairs * (n - 1);
        let act_p1p1 = has_c * p1 * (n - 1);
        let act_np1 = has_c * np1 * (n - 1);
        let act_p1np1 = has_c1 * p1 * (n - 1);
        cf.compact_new1 += proc.len() * n;
        cf.compact_copy += proc.len() * (n - 1);
        cf.compact_act_p1p1 += act_p1p1;
        cf.compact_act_np1 += act_np1;
        cf.compact_act_p1np1 += act_p1np1;
        cf.compact_total += proc.len() * (2 * n - 1) + 2 * (act_p1p1 + act_np1 + act_p1np1);
        cf.compact_x += proc.len() * n;
    }
    cf
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub n_max: usize,
    pub tasks: usize,
    pub p1: usize,
    pub np1: usize,
    pub legacy: usize,
    pub compact: usize,
    pub ratio: f64,
    pub legacy_x: usize,
    pub compact_x: usize,
    pub x_ratio: f64,
    pub legacy_ch2: usize,
    pub compact_new1: usize,
    pub expected: ClosedForms,
    /// Every compiled count equals its closed form.
    pub closed_form_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slope {
    pub tasks: usize,
    pub legacy: f64,
    pub compact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub points: Vec<GrowthPoint>,
    /// Log-log slope of changeover rows against `n_max`, per task count.
    pub slopes: Vec<Slope>,
}

fn point(n_max: usize, tasks: usize, seed: u64) -> Result<GrowthPoint, HarnessError> {
    let inst = generate_family(&FamilyParams {
        n_units: 1,
        tasks_per_unit: tasks,
        p1_fraction: 0.5,
        n_max,
        changeover_density: 1.0,
        seed,
    })?;
    let legacy = compile(&inst, CompileOptions::new(Formulation::Legacy, WindowMode::None))?;
    let compact = compile(&inst, CompileOptions::new(Formulation::Compact, WindowMode::None))?;
    let lc = count(&legacy.model);
    let cc = count(&compact.model);
    let expected = closed_forms(&inst);
    let l = lc.groups_with_prefix("legacy.");
    let c = cc.groups_with_prefix("compact.");
    let lx = legacy.legacy.as_ref().map_or(0, |v| v.num_vars());
    let cx = compact.compact.as_ref().map_or(0, |v| v.num_x());
    let closed_form_ok = l == expected.legacy_total
        && c == expected.compact_total
        && lx == expected.legacy_x
        && cx == expected.compact_x
        && cc.group(compact::G_NEW1) == expected.compact_new1
        && cc.group(compact::G_COPY) == expected.compact_copy
        && cc.group(compact::G_ACT_P1P1) == expected.compact_act_p1p1
        && cc.group(compact::G_DUR_P1P1) == expected.compact_act_p1p1
        && cc.group(compact::G_ACT_NP1) == expected.compact_act_np1
        && cc.group(compact::G_DUR_NP1) == expected.compact_act_np1
        && cc.group(compact::G_ACT_P1NP1) == expected.compact_act_p1np1
        && cc.group(compact::G_DUR_P1NP1) == expected.compact_act_p1np1;
    let p1 = inst.tasks.iter().filter(|t| t.kind == TaskKind::P1).count();
    Ok(GrowthPoint {
        n_max,
        tasks,
        p1,
        np1: tasks - p1,
        legacy: l,
        compact: c,
        ratio: l as f64 / c as f64,
        legacy_x: lx,
        compact_x: cx,
        x_ratio: lx as f64 / cx as f64,
        legacy_ch2: lc.group(crate::legacy::G_CH2),
        compact_new1: cc.group(compact::G_NEW1),
        expected,
        closed_form_ok,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Compiles both formulations at every grid point (density 1, one main
/// unit, half P1 rounded) in parallel. No solving.
pub fn measure_growth(grid: &GrowthGrid) -> Result<GrowthReport, HarnessError> {
    let cells: Vec<(usize, usize)> = grid
        .tasks
        .iter()
        .flat_map(|&t| grid.n_max.iter().map(move |&n| (n, t)))
        .collect();
    let points: Result<Vec<_>, _> = cells.par_iter().map(|&(n, t)| point(n, t, grid.seed)).collect();
    let points = points?;
    let mut slopes = Vec::new();
    for &t in &grid.tasks {
        let row: Vec<&GrowthPoint> = points.iter().filter(|p| p.tasks == t).collect();
        if row.len() < 2 {
            continue;
        }
        let l: Vec<(f64, f64)> = row.iter().map(|p| (p.n_max as f64, p.legacy as f64)).collect();
        let c: Vec<(f64, f64)> = row.iter().map(|p| (p.n_max as f64, p.compact as f64)).collect();
        slopes.push(Slope {
            tasks: t,
            legacy: log_log_slope(&l),
            compact: log_log_slope(&c),
        });
    }
    Ok(GrowthReport { points, slopes })
}

impl GrowthReport {
    pub fn point(&self, n_max: usize, tasks: usize) -> Option<&GrowthPoint> {
        self.points.iter().find(|p| p.n_max == n_max && p.tasks == tasks)
    }

    pub fn all_closed_forms_ok(&self) -> bool {
        self.points.iter().all(|p| p.closed_form_ok)
    }

    /// Header: `n_max,tasks,p1,np1,legacy,compact,ratio,legacy_x,
    /// compact_x,x_ratio,expected_legacy,expected_compact,closed_form_ok`.
    pub fn to_csv(&self) -> String {
        #[derive(Serialize)]
        struct Row {
            n_max: usize,
            tasks: usize,
            p1: usize,
            np1: usize,
            legacy: usize,
            compact: usize,
            ratio: f64,
            legacy_x: usize,
            compact_x: usize,
            x_ratio: f64,
            expected_legacy: usize,
            expected_compact: usize,
            closed_form_ok: bool,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in &self.points {
            w.serialize(Row {
                n_max: p.n_max,
                tasks: p.tasks,
                p1: p.p1,
                np1: p.np1,
                legacy: p.legacy,
                compact: p.compact,
                ratio: p.ratio,
                legacy_x: p.legacy_x,
                compact_x: p.compact_x,
                x_ratio: p.x_ratio,
                expected_legacy: p.expected.legacy_total,
                expected_compact: p.expected.compact_total,
                closed_form_ok: p.closed_form_ok,
            })
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

impl fmt::Display for GrowthReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>5} {:>5} {:>5} {:>8} {:>8} {:>7} {:>6} {:>6} {:>6}  closed-form",
            "n_max", "tasks", "split", "legacy", "compact", "ratio", "x_leg", "x_cmp", "x_rat"
        )?;
        for p in &self.points {
            writeln!(
                f,
                "{:>5} {:>5} {:>5} {:>8} {:>8} {:>7.2} {:>6} {:>6} {:>6.2}  {}",
                p.n_max,
                p.tasks,
                format!("{}/{}", p.p1, p.np1),
                p.legacy,
                p.compact,
                p.ratio,
                p.legacy_x,
                p.compact_x,
                p.x_ratio,
                if p.closed_form_ok { "ok" } else { "MISMATCH" }
            )?;
        }
        for s in &self.slopes {
            writeln!(
                f,
                "log-log slope vs n_max at {} tasks: legacy {:.3}, compact {:.3}",
                s.tasks, s.legacy, s.compact
            )?;
        }
        Ok(())
    }
}
