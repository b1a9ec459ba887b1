//! Hand-built and randomly generated test instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Changeover, Direction, Instance, State, StnArc, Task, TaskKind, Unit, WindowSet};

/// One main unit running A, B (P1) and C (NP1). C turns the intermediate
/// made by A into the demanded product PC, so any schedule meeting the
/// demand runs A, a C1 changeover, then C.
pub fn fixture_ex1() -> Instance {
    Instance {
        units: vec![Unit {
            id: "U1".into(),
            is_main: true,
        }],
        tasks: vec![
            Task::processing("A", "U1", TaskKind::P1, 10.0, 5.0, 20.0),
            Task::processing("B", "U1", TaskKind::P1, 10.0, 5.0, 20.0),
            Task::processing("C", "U1", TaskKind::Np1, 10.0, 5.0, 20.0),
            Task::changeover("CH", "U1", TaskKind::ChangeoverC),
            Task::changeover("CH1", "U1", TaskKind::ChangeoverC1),
        ],
        states: vec![
            State::new("R", false, 0.0, 1000.0),
            State::new("IA", false, 0.0, 0.0),
            State::new("PB", true, 0.0, 0.0),
            State::new("PC", true, 10.0, 0.0),
        ],
        arcs: vec![
            StnArc::new("A", "R", Direction::Consumes, 1.0),
            StnArc::new("A", "IA", Direction::Produces, 1.0),
            StnArc::new("B", "R", Direction::Consumes, 1.0),
            StnArc::new("B", "PB", Direction::Produces, 1.0),
            StnArc::new("C", "IA", Direction::Consumes, 1.0),
            StnArc::new("C", "PC", Direction::Produces, 1.0),
        ],
        changeovers: vec![
            Changeover::new("A", "B", 1.0),
            Changeover::new("B", "A", 1.5),
            Changeover::new("A", "C", 2.0),
            Changeover::new("C", "A", 1.0),
            Changeover::new("B", "C", 2.5),
            Changeover::new("C", "B", 0.5),
        ],
        horizon_h: 12.0,
        n_max: 4,
        windows: WindowSet {
            c: vec![[0.0, 4.0], [7.0, 12.0]],
            c1: vec![[7.5, 12.0]],
        },
    }
}

fn quarter_hours(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    f64::from(rng.random_range(lo..=hi)) * 0.25
}

struct Builder {
    inst: Instance,
    /// Processing task ids per unit, with their product state.
    products: Vec<(String, String)>,
}

impl Builder {
    fn new(n_max: usize) -> Self {
        Builder {
            inst: Instance {
                units: vec![],
                tasks: vec![],
                states: vec![State::new("RAW", false, 0.0, 10_000.0)],
                arcs: vec![],
                changeovers: vec![],
                horizon_h: 12.0,
                n_max,
                windows: WindowSet {
                    c: vec![[0.0, 12.0]],
                    c1: vec![[0.0, 12.0]],
                },
            },
            products: vec![],
        }
    }

    /// Adds a unit with the given processing classes; a task may draw on
    /// an earlier product instead of the raw material.
    fn unit(&mut self, rng: &mut ChaCha8Rng, u: usize, is_main: bool, kinds: &[TaskKind], chain_p: f64) {
        let uid = format!("U{u}");
        self.inst.units.push(Unit {
            id: uid.clone(),
            is_main,
        });
        let mut ids = Vec::new();
        for (t, &kind) in kinds.iter().enumerate() {
            let id = format!("U{u}T{}", t + 1);
            let rate = [5.0, 10.0, 20.0][rng.random_range(0..3)];
            let b_max = rate * [1.0, 1.5, 2.0][rng.random_range(0..3)];
            let b_min = b_max * [0.25, 0.5][rng.random_range(0..2)];
            self.inst
                .tasks
                .push(Task::processing(&id, &uid, kind, rate, b_min, b_max));
            let source = if !self.products.is_empty() && rng.random_bool(chain_p) {
                self.products[rng.random_range(0..self.products.len())].1.clone()
            } else {
                "RAW".to_string()
            };
            let product = format!("P{id}");
            self.inst.states.push(State::new(&product, true, 0.0, 0.0));
            self.inst.arcs.push(StnArc::new(&id, &source, Direction::Consumes, 1.0));
            self.inst
                .arcs
                .push(StnArc::new(&id, &product, Direction::Produces, 1.0));
            ids.push(id.clone());
            self.products.push((id, product));
        }
        if !is_main {
            return;
        }
        self.inst
            .tasks
            .push(Task::changeover(&format!("U{u}C"), &uid, TaskKind::ChangeoverC));
        if kinds.contains(&TaskKind::P1) && kinds.contains(&TaskKind::Np1) {
            self.inst
                .tasks
                .push(Task::changeover(&format!("U{u}C1"), &uid, TaskKind::ChangeoverC1));
        }
        for a in &ids {
            for b in &ids {
                if a != b {
                    let ct = quarter_hours(rng, 1, 10);
                    self.inst.changeovers.push(Changeover::new(a, b, ct));
                }
            }
        }
    }

    /// Sets each demand to a whole number of full batches.
    fn demand_batches(&mut self, task: &str, batches: usize) {
        let b_max = self.inst.task(task).expect("known task").b_max();
        let product = format!("P{task}");
        let s = self
            .inst
            .states
            .iter_mut()
            .find(|s| s.id == product)
            .expect("product state");
        s.demand += b_max * batches as f64;
    }
}

fn mixed_kinds(rng: &mut ChaCha8Rng, count: usize) -> Vec<TaskKind> {
    let mut kinds = vec![TaskKind::P1, TaskKind::Np1];
    while kinds.len() < count {
        kinds.push(if rng.random_bool(0.5) {
            TaskKind::P1
        } else {
            TaskKind::Np1
        });
    }
    kinds.truncate(count.max(1));
    kinds.shuffle(rng);
    kinds
}

/// Small random instance for formulation comparison: up to two units, up
/// to three processing tasks per unit (mixed classes), `n_max` of 3 or 4,
/// all changeover times positive, and demands worth 0 to 3 full batches.
pub fn equivalence_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_max = rng.random_range(3..=4);
    let mut b = Builder::new(n_max);
    let n_units = rng.random_range(1..=2);
    for u in 1..=n_units {
        let is_main = u == 1 || rng.random_bool(0.5);
        let count = rng.random_range(2..=3);
        let kinds = mixed_kinds(&mut rng, count);
        b.unit(&mut rng, u, is_main, &kinds, 0.3);
    }
    let activations = rng.random_range(0..=3);
    for _ in 0..activations {
        let k = rng.random_range(0..b.products.len());
        let task = b.products[k].0.clone();
        b.demand_batches(&task, 1);
    }
    b.inst
}

/// Seeds `base..base + count`, keyed by seed.
pub fn equivalence_suite(base: u64, count: usize) -> Vec<(String, Instance)> {
    (0..count as u64)
        .map(|k| (format!("eq-{}", base + k), equivalence_instance(base + k)))
        .collect()
}

/// One main unit with two or three processing tasks, a blocked interval
/// for each changeover class, and one full batch demanded from each of two
/// different tasks, so every schedule meeting demand needs a changeover.
pub fn windows_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new(4);
    let count = rng.random_range(2..=3);
    let kinds = mixed_kinds(&mut rng, count);
    b.unit(&mut rng, 1, true, &kinds, 0.0);
    let mut picks: Vec<usize> = (0..b.products.len()).collect();
    picks.shuffle(&mut rng);
    for &k in &picks[..2] {
        let task = b.products[k].0.clone();
        b.demand_batches(&task, 1);
    }
    let blocked = |rng: &mut ChaCha8Rng| {
        let start = quarter_hours(rng, 12, 24);
        let len = quarter_hours(rng, 4, 12);
        vec![[0.0, start], [start + len, 12.0]]
    };
    b.inst.windows = WindowSet {
        c: blocked(&mut rng),
        c1: blocked(&mut rng),
    };
    b.inst
}

pub fn windows_suite(base: u64, count: usize) -> Vec<(String, Instance)> {
    (0..count as u64)
        .map(|k| (format!("win-{}", base + k), windows_instance(base + k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate;

    #[test]
    fn ex1_is_valid() {
        assert_eq!(validate(&fixture_ex1()), vec![]);
    }

    #[test]
    fn ex1_round_trips_through_json() {
        let inst = fixture_ex1();
        assert_eq!(crate::instance::load(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn suites_are_valid_and_within_limits() {
        for (key, inst) in equivalence_suite(0, 60).into_iter().chain(windows_suite(0, 30)) {
            assert_eq!(validate(&inst), vec![], "{key}");
            assert!(inst.units.len() <= 2 && inst.n_max <= 4, "{key}");
            for u in &inst.units {
                let proc = inst.processing_on(&u.id);
                assert!((2..=3).contains(&proc.len()), "{key}");
                assert!(proc.iter().any(|&i| inst.tasks[i].kind == TaskKind::P1), "{key}");
                assert!(proc.iter().any(|&i| inst.tasks[i].kind == TaskKind::Np1), "{key}");
            }
            assert!(inst.changeovers.iter().all(|c| c.ctime > 0.0), "{key}");
        }
    }

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(equivalence_instance(11), equivalence_instance(11));
        assert_ne!(equivalence_instance(11), equivalence_instance(12));
    }

    #[test]
    fn windows_instances_demand_two_tasks() {
        for (key, inst) in windows_suite(0, 25) {
            let demanded = inst.states.iter().filter(|s| s.demand > 0.0).count();
            assert_eq!(demanded, 2, "{key}");
            assert_eq!(inst.windows.c.len(), 2, "{key}");
        }
    }
}
