use proptest::prelude::*;
use sail::lds::SobolState;

#[test]
fn dyadic_balance_in_every_coordinate() {
    for d in [1, 2, 5, 10, 32] {
        for k in 0..=4u32 {
            let n = 1usize << k;
            let mut s = SobolState::new(d).unwrap();
            // the leading all-zeros point is skipped, so the first 2^k
            // emitted points are points 1..=2^k; prepend the origin
            let mut pts = vec![vec![0.0; d]];
            pts.extend((0..n - 1).map(|_| s.next_point()));
            for c in 0..d {
                let mut hits = vec![0; n];
                for p in &pts {
                    hits[(p[c] * n as f64) as usize] += 1;
                }
                assert!(hits.iter().all(|&h| h == 1), "d {d} k {k} coord {c}: {hits:?}");
            }
        }
    }
}

#[test]
fn emitted_prefix_is_balanced_after_the_origin() {
    // the first 2^k - 1 emitted points fill every interval but the one
    // holding the omitted origin
    let mut s = SobolState::new(3).unwrap();
    let pts: Vec<Vec<f64>> = (0..15).map(|_| s.next_point()).collect();
    for c in 0..3 {
        let mut hits = [0; 16];
        for p in &pts {
            hits[(p[c] * 16.0) as usize] += 1;
        }
        assert_eq!(hits.iter().filter(|&&h| h == 0).count(), 1);
        assert_eq!(hits[0], 0);
    }
}

proptest! {
    #[test]
    fn points_stay_in_unit_cube(d in 1usize..=32, n in 0u64..5000) {
        let mut s = SobolState::new(d).unwrap().skipped(n);
        for _ in 0..4 {
            let p = s.next_point();
            prop_assert_eq!(p.len(), d);
            prop_assert!(p.iter().all(|&v| (0.0..1.0).contains(&v)));
        }
    }

    #[test]
    fn skipping_equals_drawing(d in 1usize..=8, n in 0u64..300) {
        let mut drawn = SobolState::new(d).unwrap();
        for _ in 0..n {
            drawn.next_point();
        }
        let mut skipped = SobolState::new(d).unwrap();
        skipped.advance(n);
        prop_assert_eq!(skipped.index(), drawn.index());
        prop_assert_eq!(skipped.next_point(), drawn.next_point());
    }
}
