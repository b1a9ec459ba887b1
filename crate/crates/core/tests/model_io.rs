mod common;

use evsched_core::harness::fixture_ex1;
use evsched_core::{compile, export_lp, export_mps, parse_mps, CompileOptions, Formulation, MpsError, WindowMode};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_models_round_trip(seed in any::<u64>()) {
        let m = common::random_model(seed);
        let text = export_mps(&m).unwrap();
        let back = parse_mps(&text).unwrap();
        prop_assert_eq!(back.canonical(), m.canonical());
        // A second pass is byte-identical.
        prop_assert_eq!(export_mps(&back).unwrap(), text);
    }
}

#[test]
fn ex1_compilations_round_trip() {
    let inst = fixture_ex1();
    for (f, w) in [
        (Formulation::Legacy, WindowMode::None),
        (Formulation::Compact, WindowMode::None),
        (Formulation::Legacy, WindowMode::Assign),
        (Formulation::Compact, WindowMode::Explicit),
    ] {
        let c = compile(&inst, CompileOptions::new(f, w)).unwrap();
        let back = parse_mps(&export_mps(&c.model).unwrap()).unwrap();
        assert_eq!(back.canonical(), c.model.canonical(), "{f} {w}");
        assert_eq!(back.objective().len(), c.model.objective().len());
    }
}

#[test]
fn lp_text_lists_every_row() {
    let inst = fixture_ex1();
    let c = compile(&inst, CompileOptions::new(Formulation::Compact, WindowMode::None)).unwrap();
    let text = export_lp(&c.model).unwrap();
    for con in c.model.constraints() {
        assert!(text.contains(&format!(" {}: ", con.name)), "{}", con.name);
    }
}

#[test]
fn garbage_is_a_parse_error() {
    assert!(matches!(
        parse_mps("NAME x\nROWS\n Q  bad\nENDATA\n"),
        Err(MpsError::Parse { .. })
    ));
}
