use std::path::PathBuf;
use std::time::{Duration, Instant};

use sail::airfoil::{AirfoilGeometry, ParsecGenome};
use sail::evaluation::{Counting, EvaluationResult, Evaluator, EvaluatorError, ExternalConfig, ExternalEvaluator};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn stub(mode: &str) -> ExternalConfig {
    let script = fixture("stub_solver.sh");
    ExternalConfig::new(format!("sh {} {mode} {{input}} {{output}} {{aoa}}", script.display()))
}

fn evaluator(cfg: ExternalConfig) -> ExternalEvaluator {
    ExternalEvaluator::new(cfg, AirfoilGeometry::default()).unwrap()
}

fn base() -> Vec<f64> {
    ParsecGenome::rae2822().to_vec()
}

/// CD and CL from the fixture's result line, read without the regex.
fn fixture_values() -> (f64, f64) {
    let text = std::fs::read_to_string(fixture("stub_polar.txt")).unwrap();
    let line = text.lines().find(|l| l.contains("CD =")).unwrap();
    let toks: Vec<&str> = line.split_whitespace().collect();
    let after = |label: &str| {
        toks[toks.iter().position(|t| *t == label).unwrap() + 2]
            .parse()
            .unwrap()
    };
    (after("CD"), after("CL"))
}

#[test]
fn stub_values_are_parsed_exactly() {
    let (cd, cl) = fixture_values();
    let r = evaluator(stub("ok")).evaluate(&base()).unwrap();
    let c = r.coefficients().unwrap();
    assert_eq!((c.cd, c.cl), (cd, cl));
}

#[test]
fn flow_conditions_reach_the_command() {
    let mut cfg = stub("echo-aoa");
    cfg.flow.angle_of_attack = 4.25;
    let c = evaluator(cfg).evaluate(&base()).unwrap().coefficients().unwrap();
    assert_eq!(c.cl, 4.25);
}

#[test]
fn malformed_output_does_not_converge() {
    let r = evaluator(stub("garbage")).evaluate(&base()).unwrap();
    assert_eq!(r, EvaluationResult::NotConverged);
}

#[test]
fn timeout_does_not_converge() {
    let mut cfg = stub("hang");
    cfg.timeout = Duration::from_millis(300);
    let start = Instant::now();
    let r = evaluator(cfg).evaluate(&base()).unwrap();
    assert_eq!(r, EvaluationResult::NotConverged);
    assert!(start.elapsed() < Duration::from_secs(10));
}

#[test]
fn missing_tool_names_the_command() {
    let cfg = ExternalConfig::new("no-such-solver-7f3a {input} {output}");
    let err = evaluator(cfg).evaluate(&base()).unwrap_err();
    assert!(matches!(err, EvaluatorError::Spawn { .. }));
    assert!(err.to_string().contains("no-such-solver-7f3a"), "{err}");
}

#[test]
fn template_and_pattern_are_validated() {
    let geo = AirfoilGeometry::default();
    assert!(ExternalEvaluator::new(ExternalConfig::new("solver {input}"), geo.clone()).is_err());
    let mut cfg = stub("ok");
    cfg.polar_pattern = r"CD = (?P<drag>\S+)".into();
    assert!(ExternalEvaluator::new(cfg, geo.clone()).is_err());
    let mut cfg = stub("ok");
    cfg.max_concurrency = 0;
    assert!(ExternalEvaluator::new(cfg, geo).is_err());
}

#[test]
fn concurrent_batches_count_each_call_once() {
    let mut cfg = stub("ok");
    cfg.max_concurrency = 3;
    let counted = Counting::new(evaluator(cfg));
    let batch = vec![base(); 7];
    let results = counted.evaluate_batch(&batch);
    assert_eq!(results.len(), 7);
    assert!(results.iter().all(|r| r.as_ref().unwrap().converged()));
    assert_eq!(counted.calls(), 7);
}
