#![allow(dead_code)]

use evsched_core::{LinearModel, Sense, VarId, VarKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const COEFFICIENTS: [f64; 9] = [1.0, -1.0, 2.5, -0.125, 12.0, 1.0 / 3.0, -7.0 / 9.0, 1e-7, 4096.0];

/// Random model with binaries and continuous variables (finite, half-open
/// and free bounds), every row sense, up to three objective levels and a
/// few group notes.
pub fn random_model(seed: u64) -> LinearModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = LinearModel::new(format!("rand{seed}"));
    let n = rng.random_range(1..=12);
    let mut vars: Vec<VarId> = Vec::new();
    for j in 0..n {
        let v = if rng.random_bool(0.4) {
            m.add_variable(format!("b({j})"), VarKind::Binary, 0.0, 1.0)
        } else {
            let (lo, hi) = match rng.random_range(0..5) {
                0 => (0.0, f64::INFINITY),
                1 => (f64::NEG_INFINITY, f64::INFINITY),
                2 => (f64::NEG_INFINITY, rng.random_range(-5.0..5.0)),
                3 => (-2.5, -2.5),
                _ => {
                    let lo: f64 = rng.random_range(-10.0..10.0);
                    (lo, lo + rng.random_range(0.0..20.0))
                }
            };
            m.add_continuous(format!("y{j}_{}", "q".repeat(rng.random_range(0..20))), lo, hi)
        };
        vars.push(v.unwrap());
    }
    let rows = rng.random_range(0..=15);
    for r in 0..rows {
        let k = rng.random_range(0..=n.min(5));
        let terms: Vec<(f64, VarId)> = (0..k)
            .map(|_| {
                let c = COEFFICIENTS[rng.random_range(0..COEFFICIENTS.len())];
                (c, vars[rng.random_range(0..n)])
            })
            .collect();
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.random_range(0..3)];
        let group = ["core.alloc", "legacy.ch2", "compact.copy", "misc"][rng.random_range(0..4)];
        let rhs = [0.0, 1.0, -3.75, 1.0 / 7.0, 250.0][rng.random_range(0..5)];
        m.add_constraint(format!("r{r}({})", rng.random_range(0..100)), group, terms, sense, rhs)
            .unwrap();
    }
    let levels = rng.random_range(0..=3);
    for level in 1..=levels {
        let k = rng.random_range(1..=n.min(4));
        let terms: Vec<(f64, VarId)> = (0..k)
            .map(|_| {
                (
                    COEFFICIENTS[rng.random_range(0..COEFFICIENTS.len())],
                    vars[rng.random_range(0..n)],
                )
            })
            .collect();
        m.add_objective_terms(level, &format!("level{level}"), terms).unwrap();
    }
    if rng.random_bool(0.5) {
        m.note_group("legacy.ch2", "quantified over n < n2");
    }
    m
}
