//! Three-index changeover formulation.
//!
//! `x(i',i,n)` is one when processing task `i'` at event point `n` is
//! followed on its unit by processing task `i` at some later point with
//! only empty points in between. Ordered pairs with zero changeover time
//! get no variables or rows, and a changeover class with no positive pair
//! gets no activation or duration rows. Rows per main unit with `p` positive ordered
//! pairs grow as `p * n_max^2`.
//!
//! Changeover blockages use [`assign_event_windows`]: every event point is
//! tied to one allowed interval, and a changeover at that point must run
//! inside it.

use serde::Serialize;

use crate::core_constraints::CoreBuild;
use crate::instance::{Instance, TaskKind};
use crate::model::{LinearModel, ModelError, Sense, VarId};

pub const G_UPPER: &str = "legacy.upper";
pub const G_CH2: &str = "legacy.ch2";
pub const G_CH3: &str = "legacy.ch3";
pub const G_ACT_C: &str = "legacy.act_c";
pub const G_ACT_C1: &str = "legacy.act_c1";
pub const G_DUR_C: &str = "legacy.dur_c";
pub const G_DUR_C1: &str = "legacy.dur_c1";
pub const G_WIN_LO: &str = "legacy.win_lo";
pub const G_WIN_HI: &str = "legacy.win_hi";

/// Handles of `x(i',i,n)` for `n < n_max`.
#[derive(Debug, Clone, Default)]
pub struct LegacyVars {
    pub x: Vec<LegacyPair>,
}

#[derive(Debug, Clone)]
pub struct LegacyPair {
    pub from: usize,
    pub to: usize,
    pub ctime: f64,
    /// Indexed by `n - 1`, `n < n_max`.
    pub x: Vec<VarId>,
}

impl LegacyVars {
    pub fn num_vars(&self) -> usize {
        self.x.iter().map(|p| p.x.len()).sum()
    }
}

pub fn build_legacy(inst: &Instance, core: &CoreBuild, m: &mut LinearModel) -> Result<LegacyVars, ModelError> {
    let n_max = inst.n_max;
    let mut vars = LegacyVars::default();
    m.note_group(G_DUR_C, "summation guard i != i' as in the activation rows");
    m.note_group(G_DUR_C1, "summation guard i != i' as in the activation rows");

    for u in inst.main_units() {
        let proc = inst.processing_on(&u.id);
        let first = vars.x.len();
        for &from in &proc {
            for &to in &proc {
                if from == to {
                    continue;
                }
                let ctime = inst.ctime_idx(from, to);
                if ctime <= 0.0 {
                    continue;
                }
                let x: Result<Vec<_>, _> = (1..n_max)
                    .map(|n| m.add_binary(format!("x({},{},{n})", inst.tasks[from].id, inst.tasks[to].id)))
                    .collect();
                vars.x.push(LegacyPair { from, to, ctime, x: x? });
            }
        }
        let pairs = &vars.x[first..];

        for p in pairs {
            let (fid, tid) = (&inst.tasks[p.from].id, &inst.tasks[p.to].id);
            for n in 1..n_max {
                let x = p.x[n - 1];
                m.add_constraint(
                    format!("{G_UPPER}({fid},{tid},{n})"),
                    G_UPPER,
                    [(1.0, x), (-1.0, core.wv(p.from, n))],
                    Sense::Le,
                    0.0,
                )?;
                for n2 in n + 1..=n_max {
                    // Processing activity strictly between n and n2.
                    let between: Vec<(f64, VarId)> = (n + 1..n2)
                        .flat_map(|k| proc.iter().map(move |&t| (t, k)))
                        .map(|(t, k)| (1.0, core.wv(t, k)))
                        .collect();
                    // x <= wv(i,n2) + (1 - sum_p wv(.,n2)) + between
                    let mut ch2 = vec![(1.0, x), (-1.0, core.wv(p.to, n2))];
                    ch2.extend(proc.iter().map(|&t| (1.0, core.wv(t, n2))));
                    ch2.extend(between.iter().map(|&(a, v)| (-a, v)));
                    m.add_constraint(format!("{G_CH2}({fid},{tid},{n},{n2})"), G_CH2, ch2, Sense::Le, 1.0)?;
                    // x >= wv(i',n) + wv(i,n2) - 1 - between
                    let mut ch3 = vec![(1.0, x), (-1.0, core.wv(p.from, n)), (-1.0, core.wv(p.to, n2))];
                    ch3.extend(between);
                    m.add_constraint(format!("{G_CH3}({fid},{tid},{n},{n2})"), G_CH3, ch3, Sense::Ge, -1.0)?;
                }
            }
        }

        let kind_of = |t: usize| inst.tasks[t].kind;
        let is_c1_switch = |p: &LegacyPair| kind_of(p.from) == TaskKind::P1 && kind_of(p.to) == TaskKind::Np1;
        for (class, act, dur) in [
            (TaskKind::ChangeoverC, G_ACT_C, G_DUR_C),
            (TaskKind::ChangeoverC1, G_ACT_C1, G_DUR_C1),
        ] {
            let Some(ch) = inst.changeover_task(&u.id, class) else {
                continue;
            };
            let members: Vec<&LegacyPair> = pairs
                .iter()
                .filter(|p| (class == TaskKind::ChangeoverC1) == is_c1_switch(p))
                .collect();
            if members.is_empty() {
                continue;
            }
            for n in 1..n_max {
                let mut terms = vec![(1.0, core.wv(ch, n + 1))];
                terms.extend(members.iter().map(|p| (-1.0, p.x[n - 1])));
                m.add_constraint(format!("{act}({},{n})", u.id), act, terms, Sense::Eq, 0.0)?;
                let mut terms = vec![(1.0, core.tf(ch, n + 1)), (-1.0, core.ts(ch, n + 1))];
                terms.extend(members.iter().map(|p| (-p.ctime, p.x[n - 1])));
                m.add_constraint(format!("{dur}({},{n})", u.id), dur, terms, Sense::Eq, 0.0)?;
            }
        }
    }
    Ok(vars)
}

/// Event points assigned to the allowed intervals of one changeover class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassAssignment {
    pub windows: Vec<[f64; 2]>,
    /// Event points per interval.
    pub counts: Vec<usize>,
    /// Interval index of each event point, indexed by `n - 1`.
    pub interval_of: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EventWindowAssignment {
    pub c: Option<ClassAssignment>,
    pub c1: Option<ClassAssignment>,
}

impl EventWindowAssignment {
    pub fn for_class(&self, kind: TaskKind) -> Option<&ClassAssignment> {
        match kind {
            TaskKind::ChangeoverC1 => self.c1.as_ref(),
            _ => self.c.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WindowError {
    #[error("no {0} windows given although the instance has {0} changeover tasks")]
    Missing(&'static str),
    #[error("{intervals} {class} windows but only {n_max} event points")]
    TooManyIntervals {
        class: &'static str,
        intervals: usize,
        n_max: usize,
    },
}

/// Splits `n` event points over intervals proportionally to `durations`,
/// rounding each share to the closest integer. If the rounded counts do not
/// add up to `n`, the largest-remainder rule decides instead, so every
/// count stays within one of its exact share.
pub fn proportional_counts(durations: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = durations.iter().sum();
    let shares: Vec<f64> = durations.iter().map(|d| n as f64 * d / total).collect();
    let rounded: Vec<usize> = shares.iter().map(|s| s.round() as usize).collect();
    if rounded.iter().sum::<usize>() == n {
        return rounded;
    }
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let missing = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    // Largest fractional part first; later intervals win ties.
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.total_cmp(&fa).then(b.cmp(&a))
    });
    for &k in order.iter().take(missing) {
        counts[k] += 1;
    }
    counts
}

fn assign_class(windows: &[[f64; 2]], n_max: usize, class: &'static str) -> Result<ClassAssignment, WindowError> {
    if windows.is_empty() {
        return Err(WindowError::Missing(class));
    }
    if windows.len() > n_max {
        return Err(WindowError::TooManyIntervals {
            class,
            intervals: windows.len(),
            n_max,
        });
    }
    let durations: Vec<f64> = windows.iter().map(|w| w[1] - w[0]).collect();
    let counts = proportional_counts(&durations, n_max);
    let interval_of = counts
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat_n(k, c))
        .collect();
    Ok(ClassAssignment {
        windows: windows.to_vec(),
        counts,
        interval_of,
    })
}

/// Assigns event points to allowed changeover intervals for every class
/// that has a changeover task in the instance.
pub fn assign_event_windows(inst: &Instance) -> Result<EventWindowAssignment, WindowError> {
    let has = |kind| inst.tasks.iter().any(|t| t.kind == kind);
    let mut out = EventWindowAssignment::default();
    if has(TaskKind::ChangeoverC) {
        out.c = Some(assign_class(&inst.windows.c, inst.n_max, "C")?);
    }
    if has(TaskKind::ChangeoverC1) {
        out.c1 = Some(assign_class(&inst.windows.c1, inst.n_max, "C1")?);
    }
    Ok(out)
}

/// Emits the rows tying changeovers at event point `n` to the interval
/// assigned to `n`.
pub fn build_assigned_windows(
    inst: &Instance,
    core: &CoreBuild,
    assignment: &EventWindowAssignment,
    m: &mut LinearModel,
) -> Result<(), ModelError> {
    let h = inst.horizon_h;
    for (i, t) in inst.tasks.iter().enumerate() {
        if !t.kind.is_changeover() {
            continue;
        }
        let Some(a) = assignment.for_class(t.kind) else {
            continue;
        };
        for n in 1..=inst.n_max {
            let w = a.windows[a.interval_of[n - 1]];
            m.add_constraint(
                format!("{G_WIN_LO}({},{n})", t.id),
                G_WIN_LO,
                [(1.0, core.ts(i, n))],
                Sense::Ge,
                w[0],
            )?;
            m.add_constraint(
                format!("{G_WIN_HI}({},{n})", t.id),
                G_WIN_HI,
                [(1.0, core.tf(i, n)), (h, core.wv(i, n))],
                Sense::Le,
                w[1] + h,
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_hour_horizon_with_blocked_morning() {
        // [0,4] and [7,12]: 8 * 4 / 9 = 3.56 rounds to 4.
        assert_eq!(proportional_counts(&[4.0, 5.0], 8), vec![4, 4]);
    }

    #[test]
    fn three_points_two_intervals() {
        // 3 * 4 / 13 = 0.92 -> 1, remaining 2 on the second interval.
        assert_eq!(proportional_counts(&[4.0, 9.0], 3), vec![1, 2]);
    }

    #[test]
    fn naive_rounding_overshoot_falls_back_to_largest_remainder() {
        // Shares are 1.5 each; rounding gives 8 for 6 points.
        let c = proportional_counts(&[1.0, 1.0, 1.0, 1.0], 6);
        assert_eq!(c.iter().sum::<usize>(), 6);
        assert!(c.iter().all(|&k| k == 1 || k == 2));
    }

    #[test]
    fn single_interval_gets_everything() {
        assert_eq!(proportional_counts(&[12.0], 5), vec![5]);
    }

    #[test]
    fn too_many_intervals() {
        let err = assign_class(&[[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]], 2, "C").unwrap_err();
        assert!(matches!(
            err,
            WindowError::TooManyIntervals {
                intervals: 3,
                n_max: 2,
                ..
            }
        ));
        assert_eq!(assign_class(&[], 2, "C").unwrap_err(), WindowError::Missing("C"));
    }

    #[test]
    fn assignment_is_monotone() {
        let a = assign_class(&[[0.0, 4.0], [7.0, 12.0]], 8, "C").unwrap();
        assert_eq!(a.interval_of, vec![0, 0, 0, 0, 1, 1, 1, 1]);
    }

    proptest::proptest! {
        #[test]
        fn counts_track_shares(durs in proptest::collection::vec(0.1f64..10.0, 1..6), extra in 0usize..12) {
            let n = durs.len() + extra;
            let counts = proportional_counts(&durs, n);
            proptest::prop_assert_eq!(counts.iter().sum::<usize>(), n);
            let total: f64 = durs.iter().sum();
            for (c, d) in counts.iter().zip(&durs) {
                let share = n as f64 * d / total;
                proptest::prop_assert!((*c as f64 - share).abs() < 1.0);
            }
        }
    }
}
