use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sail::elites::{
    illuminate, illuminate_with, Evaluation, FeatureMap, FeatureSpec, IlluminationConfig, InsertOutcome, MutationConfig,
};
use sail::genome::Bounds;

const TARGET: [f64; 3] = [0.37, 0.61, 0.5];

fn separable(g: &[f64]) -> Option<Evaluation> {
    let value = -g.iter().zip(TARGET).map(|(x, t)| (x - t).abs()).sum::<f64>();
    Some(Evaluation {
        value,
        features: g[..2].to_vec(),
    })
}

fn spec5() -> FeatureSpec {
    FeatureSpec::uniform(&[("a", 0.0, 1.0), ("b", 0.0, 1.0)], 5).unwrap()
}

#[test]
fn reaches_brute_force_cell_optima() {
    let bounds = Bounds::unit(3);
    let spec = spec5();
    let cfg = IlluminationConfig {
        iterations: 50_000,
        mutation: MutationConfig {
            sigma: 0.1,
            probability: 0.2,
        },
        seed: 4,
        ..IlluminationConfig::default()
    };
    let map = illuminate(&separable, &bounds, &spec, &[vec![0.5; 3]], &cfg).unwrap();
    assert_eq!(map.filled(), 25);

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for cell in 0..spec.total_cells() {
        let w = spec.cell_window(&spec.cell_of(cell));
        let mut best = f64::NEG_INFINITY;
        for _ in 0..1_000_000 {
            let g = [
                rng.random_range(w[0].0..w[0].1),
                rng.random_range(w[1].0..w[1].1),
                rng.random::<f64>(),
            ];
            best = best.max(separable(&g).unwrap().value);
        }
        let got = map.get_flat(cell).unwrap().value;
        assert!((got - best).abs() < 1e-2, "cell {cell}: {got} vs {best}");
    }
}

#[test]
fn same_seed_same_map() {
    let bounds = Bounds::unit(3);
    let cfg = IlluminationConfig {
        iterations: 3000,
        seed: 8,
        ..IlluminationConfig::default()
    };
    let seeds = [vec![0.1; 3], vec![0.9; 3]];
    let a = illuminate(&separable, &bounds, &spec5(), &seeds, &cfg).unwrap();
    let b = illuminate(&separable, &bounds, &spec5(), &seeds, &cfg).unwrap();
    let cells = |m: &FeatureMap| {
        m.elites()
            .map(|(c, e)| (c, e.value.to_bits(), e.genome.clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(cells(&a), cells(&b));
    let other = illuminate(
        &separable,
        &bounds,
        &spec5(),
        &seeds,
        &IlluminationConfig { seed: 9, ..cfg },
    )
    .unwrap();
    assert_ne!(cells(&a), cells(&other));
}

#[test]
fn run_invariants_hold_after_every_batch() {
    let bounds = Bounds::unit(3);
    let spec = spec5();
    let cfg = IlluminationConfig {
        iterations: 2000,
        batch_size: 16,
        seed: 1,
        ..IlluminationConfig::default()
    };
    let mut previous: Vec<Option<f64>> = vec![None; spec.total_cells()];
    let mut coverage = 0;
    let mut batches = 0;
    illuminate_with(
        &separable,
        &bounds,
        FeatureMap::new(spec.clone()),
        &[vec![0.2; 3]],
        &cfg,
        |map, progress| {
            batches += 1;
            assert!(map.filled() >= coverage);
            coverage = map.filled();
            for (cell, e) in map.elites() {
                assert_eq!(spec.flat_index(&spec.niche(&e.features).unwrap()), cell);
                if let Some(p) = previous[cell] {
                    assert!(e.value >= p);
                }
                previous[cell] = Some(e.value);
            }
            assert!(progress.generated <= cfg.iterations);
        },
    )
    .unwrap();
    assert_eq!(batches, 1 + 2000 / 16);
}

proptest! {
    #[test]
    fn insertion_never_lowers_a_cell(values in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, -5.0f64..5.0), 1..60)) {
        let spec = spec5();
        let mut map = FeatureMap::new(spec.clone());
        for (a, b, v) in values {
            let flat = spec.flat_index(&spec.niche(&[a, b]).unwrap());
            let before = map.get_flat(flat).map(|e| e.value);
            let outcome = map.try_insert(vec![a, b], vec![a, b], v).unwrap();
            let after = map.get_flat(flat).unwrap().value;
            match before {
                None => prop_assert_eq!(outcome, InsertOutcome::InsertedNew),
                Some(p) if v > p => prop_assert_eq!(outcome, InsertOutcome::Replaced),
                Some(_) => prop_assert_eq!(outcome, InsertOutcome::Rejected),
            }
            prop_assert!(before.is_none_or(|p| after >= p));
        }
    }
}
