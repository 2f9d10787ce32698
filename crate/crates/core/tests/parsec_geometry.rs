use proptest::prelude::*;
use sail::airfoil::{
    area_penalty, fitness, lift_penalty, parse_selig, parsec_surfaces, parsec_to_coords, probabilistic_lift_penalty,
    write_selig, AirfoilGeometry, BaseFoilReference, ParsecGenome, TrailingEdge,
};

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[1].1 + w[0].1))
        .sum()
}

/// Integral of upper minus lower over the sampled stations.
fn trapezoid_area(g: &ParsecGenome, te: TrailingEdge, n: usize) -> f64 {
    let c = parsec_to_coords(g, te, n).unwrap();
    trapezoid(&c.upper()) - trapezoid(&c.lower())
}

fn genome_in_bounds() -> impl Strategy<Value = ParsecGenome> {
    let b = ParsecGenome::default_bounds();
    let ranges: Vec<_> = (0..10).map(|d| b.lower()[d]..b.upper()[d]).collect();
    ranges.prop_map(|v| ParsecGenome::from_slice(&v).unwrap())
}

#[test]
fn base_crest_and_trailing_edge() {
    let g = ParsecGenome::rae2822();
    for te in [
        TrailingEdge::default(),
        TrailingEdge {
            z: 0.01,
            thickness: 0.004,
        },
    ] {
        let f = parsec_surfaces(&g, te).unwrap();
        assert!((f.upper.z(g.x_up) - g.z_up).abs() < 1e-6);
        assert!(f.upper.slope(g.x_up).abs() < 1e-6);
        assert!((f.lower.z(g.x_lo) - g.z_lo).abs() < 1e-6);
        assert!(f.lower.slope(g.x_lo).abs() < 1e-6);
        let c = parsec_to_coords(&g, te, 151).unwrap();
        let pts = c.points();
        assert_eq!(pts[0], (1.0, te.z + 0.5 * te.thickness));
        assert_eq!(pts[pts.len() - 1], (1.0, te.z - 0.5 * te.thickness));
    }
}

#[test]
fn leading_edge_radius_from_sampled_curve() {
    let g = ParsecGenome::rae2822();
    let f = parsec_surfaces(&g, TrailingEdge::default()).unwrap();
    // near the nose z ≈ ±sqrt(2 r x); fit r over a few tiny x and average
    let xs = [1e-7, 2e-7, 4e-7, 8e-7];
    let fit = |z: &dyn Fn(f64) -> f64| xs.iter().map(|&x| z(x).powi(2) / (2.0 * x)).sum::<f64>() / xs.len() as f64;
    let r_up = fit(&|x| f.upper.z(x));
    let r_lo = fit(&|x| f.lower.z(x));
    assert!((r_up - g.r_le_up).abs() / g.r_le_up < 0.02, "{r_up}");
    assert!((r_lo - g.r_le_lo).abs() / g.r_le_lo < 0.02, "{r_lo}");
    assert!(f.upper.z(1e-6) > 0.0 && f.lower.z(1e-6) < 0.0);
}

#[test]
fn base_area_matches_trapezoid_and_is_refinement_stable() {
    let geo = AirfoilGeometry::default();
    let g = ParsecGenome::rae2822().to_vec();
    let (_, area) = geo.shape(&g).unwrap();
    let g = ParsecGenome::rae2822();
    let trap = trapezoid_area(&g, geo.trailing_edge, geo.surface_points);
    assert!((area - trap).abs() < 1e-6, "{area} vs {trap}");
    let fine = AirfoilGeometry {
        surface_points: 2 * geo.surface_points,
        ..geo
    };
    let fine_area = fine.area(&g.to_vec()).unwrap();
    assert!((fine_area - area).abs() / fine_area < 1e-4);
}

#[test]
fn penalty_examples() {
    assert_eq!(lift_penalty(0.5, 1.0), 0.25);
    assert_eq!(lift_penalty(1.2, 1.0), 1.0);
    assert!((area_penalty(1.1, 1.0) - 0.4782969).abs() < 1e-12);
    assert!((area_penalty(0.9, 1.0) - 0.4782969).abs() < 1e-12);
    assert_eq!(area_penalty(2.5, 1.0), 0.0);
    assert!((probabilistic_lift_penalty(0.7, 0.1, 0.7) - 0.5).abs() < 1e-12);
    assert_eq!(probabilistic_lift_penalty(0.35, 0.0, 0.7), 0.25);
    let base = BaseFoilReference::new(0.08, 0.6).unwrap();
    assert_eq!(fitness(5.0, 0.6, 0.08, &base), 5.0);
}

proptest! {
    #[test]
    fn lift_penalty_is_monotone_and_bounded(base in 0.1f64..2.0, a in -1.0f64..3.0, b in -1.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (pl, ph) = (lift_penalty(lo.max(0.0), base), lift_penalty(hi.max(0.0), base));
        prop_assert!(pl <= ph);
        prop_assert!((0.0..=1.0).contains(&pl) && (0.0..=1.0).contains(&ph));
    }

    #[test]
    fn area_penalty_peaks_at_base(base in 0.01f64..1.0, dev in -2.0f64..2.0) {
        let p = area_penalty(base * (1.0 + dev), base);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(p <= area_penalty(base, base));
        prop_assert!((area_penalty(base * (1.0 + dev.abs()), base) - area_penalty(base * (1.0 - dev.abs()), base)).abs() < 1e-12);
    }

    #[test]
    fn probabilistic_penalty_is_a_probability(mu in -1.0f64..2.0, sigma in 1e-6f64..1.0, base in 0.1f64..1.0) {
        let p = probabilistic_lift_penalty(mu, sigma, base);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(p <= probabilistic_lift_penalty(mu + 0.1, sigma, base));
    }

    #[test]
    fn crest_holds_for_valid_genomes(g in genome_in_bounds()) {
        if let Ok(f) = parsec_surfaces(&g, TrailingEdge::default()) {
            prop_assert!((f.upper.z(g.x_up) - g.z_up).abs() < 1e-6);
            prop_assert!(f.upper.slope(g.x_up).abs() < 1e-6);
            prop_assert!((f.lower.z(g.x_lo) - g.z_lo).abs() < 1e-6);
            prop_assert!(f.lower.slope(g.x_lo).abs() < 1e-6);
        }
    }

    #[test]
    fn selig_roundtrip(g in genome_in_bounds()) {
        let c = parsec_to_coords(&g, TrailingEdge::default(), 81).unwrap();
        let (name, back) = parse_selig(&write_selig("foil", &c)).unwrap();
        prop_assert_eq!(name, "foil");
        prop_assert_eq!(back.points().len(), c.points().len());
        for (a, b) in c.points().iter().zip(back.points()) {
            prop_assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
        }
    }

    #[test]
    fn valid_areas_are_positive_and_match_trapezoid(g in genome_in_bounds()) {
        let geo = AirfoilGeometry::default();
        if let Some(area) = geo.area(&g.to_vec()) {
            prop_assert!(area > 0.0);
            let trap = trapezoid_area(&g, geo.trailing_edge, geo.surface_points);
            prop_assert!((area - trap).abs() < 1e-9);
        }
    }
}
