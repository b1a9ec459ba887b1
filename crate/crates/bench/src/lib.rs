//! Shared inputs for the benchmarks.

use evsched_core::{generate_family, FamilyParams, Instance};

/// Density-1 family instance with one main unit and a 50/50 P1 split.
pub fn family(tasks_per_unit: usize, n_max: usize) -> Instance {
    generate_family(&FamilyParams {
        n_units: 1,
        tasks_per_unit,
        p1_fraction: 0.5,
        n_max,
        changeover_density: 1.0,
        seed: 7,
    })
    .expect("valid family parameters")
}
