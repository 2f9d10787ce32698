use proptest::prelude::*;
use sail::airfoil::{AirfoilDomain, AirfoilGeometry, ParsecGenome};
use sail::benchmark::{cell_bounds, cell_optimum, fraction_reaching, true_fitness_median, CellOptimum};
use sail::elites::FeatureMap;
use sail::evaluation::{evaluate_base, Evaluator, SyntheticEvaluator, SYNTHETIC_DRAG_FLOOR};
use sail::sail::{precise_fitness, Domain};

fn domain() -> (AirfoilDomain, SyntheticEvaluator) {
    let bounds = ParsecGenome::default_bounds();
    let ev = SyntheticEvaluator::new(bounds.clone());
    let geometry = AirfoilGeometry::default();
    let base = evaluate_base(&ev, &geometry, &ParsecGenome::rae2822().to_vec()).unwrap();
    (AirfoilDomain { bounds, geometry, base }, ev)
}

#[test]
fn drag_floor_at_the_centers() {
    let (d, ev) = domain();
    let centers = ev.params().centers.clone();
    let c = ev
        .evaluate(&d.bounds.denormalize(&centers))
        .unwrap()
        .coefficients()
        .unwrap();
    assert_eq!(c.cd, SYNTHETIC_DRAG_FLOOR);
}

#[test]
fn cell_optimum_stays_in_its_cell() {
    let (d, ev) = domain();
    let spec = sail::airfoil::feature_spec(&d.bounds, 10).unwrap();
    let dims = [sail::airfoil::X_UP, sail::airfoil::Z_UP];
    let cell = spec.flat_index(&[5, 3]);
    let o = cell_optimum(&d, &ev, &spec, &dims, cell, 2000, 1).unwrap().unwrap();
    assert!(cell_bounds(&d.bounds, &spec, &dims, cell).contains(&o.genome));
    assert_eq!(spec.flat_index(&spec.niche(&d.features(&o.genome)).unwrap()), cell);
    assert_eq!(precise_fitness(&d, &ev, &o.genome).unwrap(), Some(o.fitness));
    let again = cell_optimum(&d, &ev, &spec, &dims, cell, 2000, 1).unwrap().unwrap();
    assert_eq!(again, o);
}

#[test]
fn scoring_helpers() {
    let (d, _) = domain();
    let spec = sail::airfoil::feature_spec(&d.bounds, 2).unwrap();
    let mut map = FeatureMap::new(spec.clone());
    let g = ParsecGenome::rae2822().to_vec();
    let features = d.features(&g);
    let cell = spec.flat_index(&spec.niche(&features).unwrap());
    map.try_insert(g.clone(), features, 9.6).unwrap();
    let optima: Vec<Option<CellOptimum>> = (0..4)
        .map(|c| {
            (c != 3).then(|| CellOptimum {
                cell: c,
                fitness: 10.0,
                genome: g.clone(),
            })
        })
        .collect();
    let reach = fraction_reaching(&map, &optima, 0.95);
    assert_eq!(reach, if cell == 3 { 0.0 } else { 1.0 / 3.0 });
    let mut truth = vec![None; 4];
    truth[0] = Some(4.0);
    truth[1] = Some(2.0);
    // reachable cells 0, 1, 2 hold 4, 2 and an empty 0
    assert_eq!(true_fitness_median(&truth, &optima), 2.0);
}

proptest! {
    #[test]
    fn synthetic_evaluator_is_pure(u in prop::collection::vec(0.0f64..1.0, 10)) {
        let (d, ev) = domain();
        let g = d.bounds.denormalize(&u);
        let a = ev.evaluate(&g).unwrap();
        let b = ev.evaluate(&g).unwrap();
        prop_assert_eq!(a, b);
        if let Some(c) = a.coefficients() {
            prop_assert!(c.cd >= SYNTHETIC_DRAG_FLOOR);
        }
    }
}
