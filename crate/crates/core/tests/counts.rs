use evsched_core::harness::{closed_forms, fixture_ex1, measure_growth, GrowthGrid};
use evsched_core::{compile, count, generate_family, CompileOptions, FamilyParams, Formulation, WindowMode};

fn counts(inst: &evsched_core::Instance, f: Formulation) -> evsched_core::CountReport {
    count(&compile(inst, CompileOptions::new(f, WindowMode::None)).unwrap().model)
}

fn family(tasks: usize, n_max: usize, density: f64, seed: u64) -> evsched_core::Instance {
    generate_family(&FamilyParams {
        n_units: 1,
        tasks_per_unit: tasks,
        p1_fraction: 0.5,
        n_max,
        changeover_density: density,
        seed,
    })
    .unwrap()
}

#[test]
fn ex1_legacy_groups() {
    let c = counts(&fixture_ex1(), Formulation::Legacy);
    let expect = [
        ("legacy.upper", 18),
        ("legacy.ch2", 36),
        ("legacy.ch3", 36),
        ("legacy.act_c", 3),
        ("legacy.act_c1", 3),
        ("legacy.dur_c", 3),
        ("legacy.dur_c1", 3),
    ];
    for (g, n) in expect {
        assert_eq!(c.group(g), n, "{g}");
    }
    assert_eq!(c.groups_with_prefix("legacy."), 102);
    assert_eq!(c.var_group("x"), 18);
}

#[test]
fn ex1_compact_groups() {
    let c = counts(&fixture_ex1(), Formulation::Compact);
    let expect = [
        ("compact.new1", 12),
        ("compact.copy", 9),
        ("compact.act_p1p1", 6),
        ("compact.act_np1", 3),
        ("compact.act_p1np1", 6),
        ("compact.dur_p1p1", 6),
        ("compact.dur_np1", 3),
        ("compact.dur_p1np1", 6),
    ];
    for (g, n) in expect {
        assert_eq!(c.group(g), n, "{g}");
    }
    assert_eq!(c.groups_with_prefix("compact."), 51);
    assert_eq!(c.var_group("x"), 12);
}

#[test]
fn core_groups_do_not_depend_on_formulation() {
    let inst = fixture_ex1();
    let (l, c) = (counts(&inst, Formulation::Legacy), counts(&inst, Formulation::Compact));
    assert_eq!(l.groups_with_prefix("core."), c.groups_with_prefix("core."));
    assert!(l.groups_with_prefix("core.") > 0);
}

#[test]
fn eight_tasks_sixteen_points() {
    let inst = family(8, 16, 1.0, 3);
    let l = counts(&inst, Formulation::Legacy);
    let c = counts(&inst, Formulation::Compact);
    assert_eq!(l.group("legacy.ch2"), 6720);
    assert_eq!(l.group("legacy.ch3"), 6720);
    assert_eq!(l.groups_with_prefix("legacy."), 14340);
    assert_eq!(l.var_group("x"), 840);
    assert_eq!(c.groups_with_prefix("compact."), 608);
    assert_eq!(c.var_group("x"), 128);
}

#[test]
fn new1_plus_copy_is_linear_in_points() {
    for (tasks, n_max) in [(3, 4), (5, 7), (8, 16), (2, 1)] {
        let c = counts(&family(tasks, n_max, 1.0, 9), Formulation::Compact);
        assert_eq!(
            c.group("compact.new1") + c.group("compact.copy"),
            tasks * (2 * n_max - 1)
        );
    }
}

#[test]
fn closed_forms_hold_at_partial_density() {
    for seed in 0..6 {
        for density in [0.0, 0.3, 0.7] {
            let inst = family(6, 5, density, seed);
            let cf = closed_forms(&inst);
            let l = counts(&inst, Formulation::Legacy);
            let c = counts(&inst, Formulation::Compact);
            assert_eq!(
                l.groups_with_prefix("legacy."),
                cf.legacy_total,
                "seed {seed} density {density}"
            );
            assert_eq!(l.var_group("x"), cf.legacy_x);
            assert_eq!(c.groups_with_prefix("compact."), cf.compact_total);
            assert_eq!(c.var_group("x"), cf.compact_x);
        }
    }
}

#[test]
fn zero_density_has_no_legacy_rows() {
    let inst = family(6, 8, 0.0, 1);
    let l = counts(&inst, Formulation::Legacy);
    assert_eq!(l.groups_with_prefix("legacy."), 0);
    assert_eq!(l.var_group("x"), 0);
}

#[test]
fn doubling_points_quadruples_ch2_and_doubles_new1() {
    let rep = measure_growth(&GrowthGrid::new(vec![8, 16], vec![8])).unwrap();
    let (a, b) = (rep.point(8, 8).unwrap(), rep.point(16, 8).unwrap());
    let f = b.legacy_ch2 as f64 / a.legacy_ch2 as f64;
    assert!((3.5..=4.5).contains(&f), "{f}");
    assert_eq!(b.compact_new1, 2 * a.compact_new1);
}

#[test]
fn slopes_on_a_wide_grid() {
    let rep = measure_growth(&GrowthGrid::new(vec![16, 32, 64], vec![3, 8])).unwrap();
    assert!(rep.all_closed_forms_ok());
    for s in &rep.slopes {
        assert!((1.8..=2.1).contains(&s.legacy), "{s:?}");
        assert!((0.9..=1.1).contains(&s.compact), "{s:?}");
    }
}

#[test]
fn grid_parses() {
    let g: GrowthGrid = "4,8,16x3,8".parse().unwrap();
    assert_eq!(g.n_max, vec![4, 8, 16]);
    assert_eq!(g.tasks, vec![3, 8]);
    assert!("4,8".parse::<GrowthGrid>().is_err());
    assert!("0x3".parse::<GrowthGrid>().is_err());
}
