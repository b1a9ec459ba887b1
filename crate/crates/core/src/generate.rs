//! Seeded synthetic instance families for size measurements and test suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{Changeover, Direction, Instance, State, StnArc, Task, TaskKind, Unit, WindowSet};

/// Horizon length used by generated families.
pub const FAMILY_HORIZON_H: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub n_units: usize,
    pub tasks_per_unit: usize,
    /// Share of processing tasks in class P1; the rest are NP1.
    pub p1_fraction: f64,
    pub n_max: usize,
    /// Share of ordered task pairs per unit with a positive changeover time.
    pub changeover_density: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerateError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{0} must lie in [0, 1]")]
    OutOfUnitRange(&'static str),
}

impl FamilyParams {
    pub fn check(&self) -> Result<(), GenerateError> {
        if self.n_units == 0 {
            return Err(GenerateError::NotPositive("n_units"));
        }
        if self.tasks_per_unit == 0 {
            return Err(GenerateError::NotPositive("tasks_per_unit"));
        }
        if self.n_max == 0 {
            return Err(GenerateError::NotPositive("n_max"));
        }
        if !(0.0..=1.0).contains(&self.p1_fraction) {
            return Err(GenerateError::OutOfUnitRange("p1_fraction"));
        }
        if !(0.0..=1.0).contains(&self.changeover_density) {
            return Err(GenerateError::OutOfUnitRange("changeover_density"));
        }
        Ok(())
    }

    /// Number of P1 tasks per unit.
    pub fn p1_count(&self) -> usize {
        ((self.p1_fraction * self.tasks_per_unit as f64).round() as usize).min(self.tasks_per_unit)
    }

    /// Number of positive changeover pairs per unit.
    pub fn pair_count(&self) -> usize {
        let k = self.tasks_per_unit;
        (self.changeover_density * (k * (k - 1)) as f64).round() as usize
    }
}

/// Builds one member of a family. Counts of units, tasks and positive
/// changeover pairs depend only on the parameters; the seed drives the
/// changeover times, which pairs are positive and the recipe wiring.
/// Demands are zero.
pub fn generate_family(p: &FamilyParams) -> Result<Instance, GenerateError> {
    p.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let k = p.tasks_per_unit;
    let p1 = p.p1_count();
    let pairs = p.pair_count();

    let mut units = Vec::new();
    let mut tasks = Vec::new();
    let mut states = vec![State::new("RAW", false, 0.0, 1.0e4)];
    let mut arcs = Vec::new();
    let mut changeovers = Vec::new();
    let mut products: Vec<String> = Vec::new();

    for u in 1..=p.n_units {
        let uid = format!("U{u}");
        units.push(Unit {
            id: uid.clone(),
            is_main: true,
        });
        let earlier_products = products.clone();
        let mut ids = Vec::new();
        for t in 1..=k {
            let id = format!("U{u}T{t}");
            let kind = if t <= p1 { TaskKind::P1 } else { TaskKind::Np1 };
            let b_min = if rng.random_bool(0.5) { 0.0 } else { 5.0 };
            tasks.push(Task::processing(&id, &uid, kind, 10.0, b_min, 20.0));
            let product = format!("S{id}");
            states.push(State::new(&product, true, 0.0, 0.0));
            let input = if earlier_products.is_empty() || rng.random_bool(0.5) {
                "RAW".to_string()
            } else {
                earlier_products[rng.random_range(0..earlier_products.len())].clone()
            };
            arcs.push(StnArc::new(&id, &input, Direction::Consumes, 1.0));
            arcs.push(StnArc::new(&id, &product, Direction::Produces, 1.0));
            products.push(product);
            ids.push((id, kind));
        }

        let mut ordered: Vec<(usize, usize)> = (0..k)
            .flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        ordered.shuffle(&mut rng);
        ordered.truncate(pairs);
        ordered.sort_unstable();
        for (a, b) in ordered {
            let ctime = rng.random_range(1..=8) as f64 * 0.25;
            changeovers.push(Changeover::new(&ids[a].0, &ids[b].0, ctime));
        }

        // Presence of changeover tasks depends on parameters only.
        if pairs > 0 {
            tasks.push(Task::changeover(&format!("U{u}C"), &uid, TaskKind::ChangeoverC));
            if p1 > 0 && p1 < k {
                tasks.push(Task::changeover(&format!("U{u}C1"), &uid, TaskKind::ChangeoverC1));
            }
        }
    }

    Ok(Instance {
        units,
        tasks,
        states,
        arcs,
        changeovers,
        horizon_h: FAMILY_HORIZON_H,
        n_max: p.n_max,
        windows: WindowSet {
            c: vec![[0.0, FAMILY_HORIZON_H]],
            c1: vec![[0.0, FAMILY_HORIZON_H]],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate;

    fn params(tasks: usize, density: f64, seed: u64) -> FamilyParams {
        FamilyParams {
            n_units: 1,
            tasks_per_unit: tasks,
            p1_fraction: 2.0 / 3.0,
            n_max: 4,
            changeover_density: density,
            seed,
        }
    }

    #[test]
    fn three_tasks_full_density() {
        let inst = generate_family(&params(3, 1.0, 7)).unwrap();
        assert!(validate(&inst).is_empty());
        assert_eq!(inst.changeovers.iter().filter(|c| c.ctime > 0.0).count(), 6);
    }

    #[test]
    fn eight_tasks_full_density() {
        let inst = generate_family(&params(8, 1.0, 1)).unwrap();
        assert_eq!(inst.changeovers.iter().filter(|c| c.ctime > 0.0).count(), 56);
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_family(&params(3, 1.0, 7)).unwrap().to_json();
        let b = generate_family(&params(3, 1.0, 7)).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut p = params(3, 1.0, 1);
        p.changeover_density = 1.5;
        assert_eq!(
            generate_family(&p),
            Err(GenerateError::OutOfUnitRange("changeover_density"))
        );
        p.changeover_density = 0.5;
        p.n_max = 0;
        assert_eq!(generate_family(&p), Err(GenerateError::NotPositive("n_max")));
    }

    proptest::proptest! {
        #[test]
        fn seed_changes_values_not_counts(
            units in 1usize..3, tasks in 1usize..7, density in 0.0f64..=1.0,
            frac in 0.0f64..=1.0, s1 in 0u64..1000, s2 in 0u64..1000,
        ) {
            let mk = |seed| FamilyParams {
                n_units: units, tasks_per_unit: tasks, p1_fraction: frac,
                n_max: 3, changeover_density: density, seed,
            };
            let a = generate_family(&mk(s1)).unwrap();
            let b = generate_family(&mk(s2)).unwrap();
            proptest::prop_assert!(validate(&a).is_empty(), "{:?}", validate(&a));
            proptest::prop_assert_eq!(a.units.len(), b.units.len());
            proptest::prop_assert_eq!(a.tasks.len(), b.tasks.len());
            proptest::prop_assert_eq!(a.changeovers.len(), b.changeovers.len());
            proptest::prop_assert_eq!(a.changeovers.len(), units * mk(0).pair_count());
        }
    }
}
