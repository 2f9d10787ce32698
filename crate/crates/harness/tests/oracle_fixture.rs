use std::path::PathBuf;

use sail::airfoil::{PARAMETER_COUNT, X_UP, Z_UP};
use sail::benchmark::cell_optimum;
use sail::evaluation::SyntheticEvaluator;
use sail_harness::config::Config;
use sail_harness::io::read_optima;

#[test]
fn fixture_matches_a_regenerated_cell() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let cfg = Config::load(&root.join("configs/synthetic.cfg")).unwrap();
    let spec = cfg.feature_spec("oracle.bins").unwrap();
    let path = cfg.resolve(cfg.get("study.oracle"));
    let optima = read_optima(&path, &spec, PARAMETER_COUNT).unwrap();
    assert_eq!(optima.len(), 100);
    let reachable = optima.iter().flatten().count();
    assert!(reachable >= 90, "{reachable}");

    let domain = cfg.domain().unwrap();
    let ev = SyntheticEvaluator::new(domain.bounds.clone());
    let samples = cfg.usize("oracle.samples").unwrap();
    let seed = cfg.u64("oracle.seed").unwrap();
    for cell in [0, 47] {
        let fresh = cell_optimum(&domain, &ev, &spec, &[X_UP, Z_UP], cell, samples, seed).unwrap();
        assert_eq!(fresh, optima[cell], "cell {cell}");
    }
}
