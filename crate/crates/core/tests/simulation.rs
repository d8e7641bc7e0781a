use benford::sim::{self, Noise, ProcessKind, ProcessSpec};

fn small(kind: ProcessKind, noise: Noise, seed: u64) -> ProcessSpec {
    ProcessSpec {
        kind,
        noise,
        steps: 40,
        walkers: 2000,
        seed,
        ..ProcessSpec::default()
    }
}

fn lognormal() -> Noise {
    Noise::LogNormal { mu: 0.0, sigma: 1.0 }
}

#[test]
fn same_seed_same_bits() {
    let spec = small(ProcessKind::Multiplicative, lognormal(), 7);
    let a = sim::run_ensemble(&spec).unwrap();
    let b = sim::run_ensemble(&spec).unwrap();
    assert_eq!(a.censuses, b.censuses);
    let bits = |run: &sim::EnsembleRun| -> Vec<u64> {
        sim::curve_of(run).unwrap().iter().map(|p| p.d1.to_bits()).collect()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(spec.walker_trajectory(3).unwrap(), spec.walker_trajectory(3).unwrap());

    let other = sim::run_ensemble(&small(ProcessKind::Multiplicative, lognormal(), 8)).unwrap();
    assert_ne!(a.censuses, other.censuses);
}

#[test]
fn log_space_is_an_additive_walk() {
    let mult = small(ProcessKind::Multiplicative, lognormal(), 21);
    let add = ProcessSpec {
        kind: ProcessKind::Additive,
        noise: Noise::Ln {
            inner: Box::new(lognormal()),
        },
        initial_value: 0.0,
        ..mult.clone()
    };
    for walker in [0, 1, 17, 1999] {
        let ln_values = mult.walker_trajectory(walker).unwrap();
        let walk = add.walker_trajectory(walker).unwrap();
        assert_eq!(ln_values.len(), 40);
        for (x, y) in ln_values.iter().zip(&walk) {
            assert_eq!(x.to_bits(), y.to_bits(), "walker {walker}");
        }
    }
}

#[test]
fn multiplicative_beats_additive() {
    let mult = sim::convergence_curve(&small(ProcessKind::Multiplicative, lognormal(), 3)).unwrap();
    let add = sim::convergence_curve(&small(
        ProcessKind::Additive,
        Noise::Uniform { lo: 0.0, hi: 1.0 },
        3,
    ))
    .unwrap();
    assert!(mult.first().unwrap().d1 > mult.last().unwrap().d1);
    assert!(mult.last().unwrap().d1 < 0.05, "{}", mult.last().unwrap().d1);
    assert!(add.last().unwrap().d1 > 0.05, "{}", add.last().unwrap().d1);
}

#[test]
fn long_runs_use_checkpoints() {
    let spec = ProcessSpec {
        steps: 1000,
        walkers: 50,
        ..ProcessSpec::default()
    };
    let curve = sim::convergence_curve(&spec).unwrap();
    assert_eq!(curve.len(), 100);
    assert_eq!(curve.last().unwrap().step, 1000);
}
