use dnapix::quantize::{dequantize_subband, quantize_subband};
use proptest::prelude::*;

#[test]
fn enumerated_level_count() {
    // raw levels -4..=5 at q=2
    let coeffs: Vec<f64> = (-4..=5).map(|r| r as f64 * 2.0 + 0.3).collect();
    let q = quantize_subband(&coeffs, 10, 1, 2.0).unwrap();
    assert_eq!((q.spec.k, q.spec.min_index), (10, -4));
    assert_eq!(dequantize_subband(&q).unwrap()[0], -8.0);
}

#[test]
fn non_positive_step_rejected() {
    assert!(quantize_subband(&[1.0f64], 1, 1, 0.0).is_err());
    assert!(quantize_subband(&[1.0f64], 1, 1, -1.0).is_err());
}

proptest! {
    #[test]
    fn error_bounded_by_half_step(xs in prop::collection::vec(-500.0f64..500.0, 1..64), q in 0.01f64..50.0) {
        let qsb = quantize_subband(&xs, xs.len(), 1, q).unwrap();
        let back = dequantize_subband(&qsb).unwrap();
        for (x, y) in xs.iter().zip(&back) {
            prop_assert!((x - y).abs() <= q / 2.0 + 1e-9 * q.max(x.abs()));
        }
    }

    #[test]
    fn indices_in_range_and_surjective(xs in prop::collection::vec(-100.0f64..100.0, 1..64), q in 0.5f64..20.0) {
        let qsb = quantize_subband(&xs, xs.len(), 1, q).unwrap();
        prop_assert!(qsb.indices.iter().all(|&i| i >= 1 && i <= qsb.spec.k));
        prop_assert!(qsb.indices.contains(&1));
        prop_assert!(qsb.indices.contains(&qsb.spec.k));
    }

    #[test]
    fn monotone(a in -100.0f64..100.0, b in -100.0f64..100.0, q in 0.1f64..10.0) {
        let qsb = quantize_subband(&[a, b], 2, 1, q).unwrap();
        if a <= b {
            prop_assert!(qsb.indices[0] <= qsb.indices[1]);
        }
    }
}
