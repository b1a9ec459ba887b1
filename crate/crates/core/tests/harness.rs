use std::collections::BTreeMap;

use evsched_core::harness::{
    check_equivalence, check_suite, equivalence_suite, fixture_ex1, horizon_instance, plan_horizons, run_rolling,
    semantic_x_oracle, synthetic_month, windows_suite,
};
use evsched_core::{compile, count, decode, solve, CompileOptions, Formulation, Limits, SolveStatus, WindowMode};

#[test]
fn ex1_formulations_agree() {
    let rec = check_equivalence("ex1", &fixture_ex1(), Limits::default()).unwrap();
    assert_eq!(rec.matched, Some(true), "{rec:?}");
    assert_eq!(rec.legacy.verified, Some(true));
    assert_eq!(rec.compact.verified, Some(true));
    assert_eq!(rec.legacy.objective_vector.len(), rec.compact.objective_vector.len());
}

#[test]
fn zero_changeover_times_reduce_to_core() {
    let mut inst = fixture_ex1();
    inst.changeovers.clear();
    let legacy = compile(&inst, CompileOptions::new(Formulation::Legacy, WindowMode::None)).unwrap();
    let report = count(&legacy.model);
    assert_eq!(report.groups_with_prefix("legacy."), 0);
    assert_eq!(
        legacy
            .model
            .variables()
            .iter()
            .filter(|v| v.name.starts_with("x("))
            .count(),
        0
    );

    let rec = check_equivalence("ex1-zero", &inst, Limits::default()).unwrap();
    assert_eq!(rec.matched, Some(true), "{rec:?}");
    assert_eq!(rec.legacy.objective_vector[0], 0.0);
    assert_eq!(rec.legacy.objective_vector[1], 0.0);
    assert_eq!(rec.legacy.verified, Some(true), "{}", rec.legacy.verify_detail);
    assert_eq!(rec.compact.verified, Some(true), "{}", rec.compact.verify_detail);
}

#[test]
fn small_suite_matches_and_verifies() {
    let report = check_suite(&equivalence_suite(100, 8), Limits::default()).unwrap();
    assert!(report.all_match(), "{}", report.to_csv());
    for r in &report.records {
        assert_ne!(r.legacy.verified, Some(false), "{}: {}", r.key, r.legacy.verify_detail);
        assert_ne!(
            r.compact.verified,
            Some(false),
            "{}: {}",
            r.key,
            r.compact.verify_detail
        );
    }
    assert_eq!(report.to_csv().lines().count(), 9);
}

#[test]
fn oracle_passes() {
    let rep = semantic_x_oracle().unwrap();
    assert!(rep.passed(), "{:?}", rep.failures);
    assert!(rep.patterns > 0);
}

#[test]
fn rolling_month_carries_stock_exactly() {
    let plan = plan_horizons(&synthetic_month()).unwrap();
    let res = run_rolling(
        &plan,
        CompileOptions::new(Formulation::Compact, WindowMode::None),
        Limits::default(),
    )
    .unwrap();
    assert!(res.complete);
    assert_eq!(res.horizons.len(), 4);
    for w in res.horizons.windows(2) {
        assert_eq!(w[0].stock_out, w[1].stock_in);
    }
    assert_eq!(res.horizons[0].stock_in, plan.initial_stock);
    // Horizon 3 cannot meet its demand alone; the shortfall rolls on.
    assert!(!res.horizons[2].unmet.is_empty());
    let carried = res.horizons[2].unmet.get("PC").copied().unwrap_or(0.0);
    let due4 = res.horizons[3].demands.get("PC").copied().unwrap_or(0.0);
    assert!((carried - due4).abs() < 1e-9);
}

#[test]
fn rolling_level_one_is_formulation_independent() {
    let plan = plan_horizons(&synthetic_month()).unwrap();
    let run = |f| run_rolling(&plan, CompileOptions::new(f, WindowMode::None), Limits::default()).unwrap();
    let (a, b) = (run(Formulation::Legacy), run(Formulation::Compact));
    for (x, y) in a.horizons.iter().zip(&b.horizons) {
        assert!(
            (x.objective_vector[0] - y.objective_vector[0]).abs() <= 1e-6,
            "horizon {}",
            x.index
        );
        assert_eq!(x.stock_out, y.stock_out, "horizon {}", x.index);
    }
}

#[test]
fn two_horizons_pass_stock_forward() {
    let recipe = {
        let mut r = fixture_ex1();
        for s in &mut r.states {
            s.demand = 0.0;
        }
        r
    };
    let stock: BTreeMap<String, f64> = recipe.states.iter().map(|s| (s.id.clone(), s.initial_stock)).collect();
    let demands = BTreeMap::from([("PB".to_string(), 20.0)]);
    let first = horizon_instance(&recipe, &demands, &stock);
    let c = compile(&first, CompileOptions::new(Formulation::Compact, WindowMode::None)).unwrap();
    let r = solve(&c.model, Limits::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    let mut next = stock.clone();
    for (si, s) in first.states.iter().enumerate() {
        next.insert(s.id.clone(), r.value(c.core.terminal_stock(si)) - s.demand);
    }
    let second = horizon_instance(&recipe, &BTreeMap::new(), &next);
    for s in &second.states {
        assert_eq!(s.initial_stock, next[&s.id]);
    }
    assert!(next["R"] < 1000.0);
}

#[test]
fn windows_are_respected_by_both_mechanisms() {
    for (key, inst) in windows_suite(300, 5) {
        for (f, w) in [
            (Formulation::Legacy, WindowMode::Assign),
            (Formulation::Compact, WindowMode::Explicit),
        ] {
            let c = compile(&inst, CompileOptions::new(f, w)).unwrap();
            let r = solve(&c.model, Limits::default()).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal, "{key} {f}");
            let s = decode(&inst, &c, &r).unwrap();
            let mut changeovers = 0;
            for e in s.unit("U1").iter().filter(|e| e.kind.is_changeover()) {
                changeovers += 1;
                let windows = if e.kind == evsched_core::TaskKind::ChangeoverC {
                    &inst.windows.c
                } else {
                    &inst.windows.c1
                };
                let inside = windows
                    .iter()
                    .filter(|[lo, hi]| e.ts >= lo - 1e-6 && e.tf <= hi + 1e-6)
                    .count();
                assert_eq!(inside, 1, "{key} {f}: {s}");
            }
            assert!(changeovers >= 1, "{key} {f}: {s}");
        }
    }
}
