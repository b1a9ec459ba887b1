//! Two-index changeover formulation.
//!
//! `x(i,n)` is one when processing task `i` is the first active processing
//! task of its unit among event points `n..=n_max`. A changeover is forced
//! at `n + 1` whenever task `i` runs at `n` and a different task is the
//! first one from `n + 1` on. Rows per main unit grow as `|I_u| * n_max`.
//!
//! Changeover blockages use explicit window choice variables `z(i,k,n)`
//! ([`build_windows`]) instead of fixing event points to intervals.

use crate::core_constraints::CoreBuild;
use crate::instance::{Instance, TaskKind};
use crate::model::{LinearModel, ModelError, Sense, VarId};

pub const G_NEW1: &str = "compact.new1";
pub const G_COPY: &str = "compact.copy";
pub const G_ACT_P1P1: &str = "compact.act_p1p1";
pub const G_ACT_NP1: &str = "compact.act_np1";
pub const G_ACT_P1NP1: &str = "compact.act_p1np1";
pub const G_DUR_P1P1: &str = "compact.dur_p1p1";
pub const G_DUR_NP1: &str = "compact.dur_np1";
pub const G_DUR_P1NP1: &str = "compact.dur_p1np1";
pub const G_WIN_PICK: &str = "compact.win_pick";
pub const G_WIN_LO: &str = "compact.win_lo";
pub const G_WIN_HI: &str = "compact.win_hi";

#[derive(Debug, Clone, Default)]
pub struct CompactVars {
    /// `(task, x(task, 1..=n_max))` for processing tasks on main units.
    pub x: Vec<(usize, Vec<VarId>)>,
    /// `(changeover task, window k, z(task, k, 1..=n_max))`.
    pub z: Vec<(usize, usize, Vec<VarId>)>,
}

impl CompactVars {
    pub fn x_of(&self, task: usize) -> Option<&[VarId]> {
        self.x.iter().find(|(t, _)| *t == task).map(|(_, v)| v.as_slice())
    }

    pub fn num_x(&self) -> usize {
        self.x.iter().map(|(_, v)| v.len()).sum()
    }
}

pub fn build_compact(inst: &Instance, core: &CoreBuild, m: &mut LinearModel) -> Result<CompactVars, ModelError> {
    let n_max = inst.n_max;
    let h = inst.horizon_h;
    let mut vars = CompactVars::default();
    m.note_group(
        G_DUR_P1NP1,
        "quantified over the C1 changeover task of the unit, matching its left-hand side",
    );
    m.note_group(G_ACT_NP1, "sum over all processing tasks of the unit except i");

    for u in inst.main_units() {
        let proc = inst.processing_on(&u.id);
        let p1 = inst.class_on(&u.id, TaskKind::P1);
        let np1 = inst.class_on(&u.id, TaskKind::Np1);
        let first = vars.x.len();
        for &i in &proc {
            let x: Result<Vec<_>, _> = (1..=n_max)
                .map(|n| m.add_binary(format!("x({},{n})", inst.tasks[i].id)))
                .collect();
            vars.x.push((i, x?));
        }
        let xs = &vars.x[first..];
        let x = |task: usize, n: usize| xs.iter().find(|(t, _)| *t == task).expect("processing task").1[n - 1];

        for &i in &proc {
            let id = &inst.tasks[i].id;
            for n in 1..=n_max {
                m.add_constraint(
                    format!("{G_NEW1}({id},{n})"),
                    G_NEW1,
                    [(1.0, x(i, n)), (-1.0, core.wv(i, n))],
                    Sense::Ge,
                    0.0,
                )?;
            }
            for n in 1..n_max {
                // x(i,n) >= x(i,n+1) - sum_{i' != i} wv(i',n)
                let mut terms = vec![(1.0, x(i, n)), (-1.0, x(i, n + 1))];
                terms.extend(proc.iter().filter(|&&k| k != i).map(|&k| (1.0, core.wv(k, n))));
                m.add_constraint(format!("{G_COPY}({id},{n})"), G_COPY, terms, Sense::Ge, 0.0)?;
            }
        }

        // (predecessor set, successor set excluding the predecessor, class, groups)
        let cases: [(&[usize], &[usize], TaskKind, &str, &str); 3] = [
            (&p1, &p1, TaskKind::ChangeoverC, G_ACT_P1P1, G_DUR_P1P1),
            (&np1, &proc, TaskKind::ChangeoverC, G_ACT_NP1, G_DUR_NP1),
            (&p1, &np1, TaskKind::ChangeoverC1, G_ACT_P1NP1, G_DUR_P1NP1),
        ];
        for (preds, succs, class, act, dur) in cases {
            let Some(ch) = inst.changeover_task(&u.id, class) else {
                continue;
            };
            for &i in preds {
                let id = &inst.tasks[i].id;
                for n in 1..n_max {
                    let next: Vec<usize> = succs.iter().copied().filter(|&k| k != i).collect();
                    // wv(ch,n+1) >= sum x(i',n+1) + wv(i,n) - 1
                    let mut terms = vec![(1.0, core.wv(ch, n + 1)), (-1.0, core.wv(i, n))];
                    terms.extend(next.iter().map(|&k| (-1.0, x(k, n + 1))));
                    m.add_constraint(format!("{act}({id},{n})"), act, terms, Sense::Ge, -1.0)?;
                    // Tf - Ts >= sum Ctime x(i',n+1) - H (1 - wv(i,n))
                    let mut terms = vec![
                        (1.0, core.tf(ch, n + 1)),
                        (-1.0, core.ts(ch, n + 1)),
                        (-h, core.wv(i, n)),
                    ];
                    terms.extend(next.iter().map(|&k| (-inst.ctime_idx(i, k), x(k, n + 1))));
                    m.add_constraint(format!("{dur}({id},{n})"), dur, terms, Sense::Ge, -h)?;
                }
            }
        }
    }
    Ok(vars)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("no {0} windows given although the instance has {0} changeover tasks")]
pub struct MissingWindows(pub &'static str);

#[derive(Debug, thiserror::Error)]
pub enum CompactWindowError {
    #[error(transparent)]
    Missing(#[from] MissingWindows),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Explicit window placement: each active changeover picks exactly one
/// allowed interval of its class and runs inside it.
pub fn build_windows(
    inst: &Instance,
    core: &CoreBuild,
    vars: &mut CompactVars,
    m: &mut LinearModel,
) -> Result<(), CompactWindowError> {
    let h = inst.horizon_h;
    for (i, t) in inst.tasks.iter().enumerate() {
        if !t.kind.is_changeover() {
            continue;
        }
        let windows = inst.windows.for_class(t.kind);
        if windows.is_empty() {
            let class = if t.kind == TaskKind::ChangeoverC1 { "C1" } else { "C" };
            return Err(MissingWindows(class).into());
        }
        let first = vars.z.len();
        for k in 1..=windows.len() {
            let z: Result<Vec<_>, _> = (1..=inst.n_max)
                .map(|n| m.add_binary(format!("z({},{k},{n})", t.id)))
                .collect();
            vars.z.push((i, k - 1, z?));
        }
        for n in 1..=inst.n_max {
            let mut terms = vec![(-1.0, core.wv(i, n))];
            terms.extend(vars.z[first..].iter().map(|(_, _, z)| (1.0, z[n - 1])));
            m.add_constraint(format!("{G_WIN_PICK}({},{n})", t.id), G_WIN_PICK, terms, Sense::Eq, 0.0)?;
            for (_, k, z) in &vars.z[first..] {
                let [start, end] = windows[*k];
                m.add_constraint(
                    format!("{G_WIN_LO}({},{},{n})", t.id, k + 1),
                    G_WIN_LO,
                    [(1.0, core.ts(i, n)), (-start, z[n - 1])],
                    Sense::Ge,
                    0.0,
                )?;
                m.add_constraint(
                    format!("{G_WIN_HI}({},{},{n})", t.id, k + 1),
                    G_WIN_HI,
                    [(1.0, core.tf(i, n)), (h, z[n - 1])],
                    Sense::Le,
                    end + h,
                )?;
            }
        }
    }
    Ok(())
}
