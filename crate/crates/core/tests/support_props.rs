mod common;

use proptest::prelude::*;
use qfa_core::algebra::{spectral_data, SpectralData};
use qfa_core::corpus::sample_rng;
use qfa_core::support::{smooth_support, smooth_support_spectral, ww_support_size, ww_support_size_exhaustive};
use qfa_core::{AlgebraElement, AlgebraShape, TAU_NUM};

fn witness_residual(spec: &SpectralData, h: &[f64], p: f64) -> f64 {
    let terms = spec.pairs().iter().zip(h).map(|(q, &hj)| ((1.0 - hj) * q.value, q.weight));
    if p.is_infinite() {
        terms.map(|(v, _)| v).fold(0.0, f64::max)
    } else {
        terms.map(|(v, w)| w * v.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ordering_chain(seed in any::<u64>()) {
        for g in common::ordering_chain(seed, 0) {
            prop_assert!(g >= -TAU_NUM, "gap {}", g);
        }
    }

    #[test]
    fn continuity_sandwich(seed in any::<u64>()) {
        for g in common::continuity_sandwich(seed, 0) {
            prop_assert!(g >= -TAU_NUM, "gap {}", g);
        }
    }

    #[test]
    fn nonincreasing_in_eps(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 4.0, f64::INFINITY])) {
        let mut rng = sample_rng(seed, 0);
        let shape = common::pick_shape(&mut rng);
        let x = common::scaled_element(&shape, &mut rng);
        let values: Vec<f64> = (0..=10).map(|i| smooth_support(&x, p, i as f64 / 10.0).unwrap().value).collect();
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0] + TAU_NUM), "{:?}", values);
    }

    #[test]
    fn witness_is_feasible(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY]), eps in 0.0f64..=1.0) {
        let mut rng = sample_rng(seed, 0);
        let shape = common::pick_shape(&mut rng);
        let x = common::scaled_element(&shape, &mut rng);
        let spec = spectral_data(&x);
        let r = smooth_support(&x, p, eps).unwrap();
        prop_assert!(r.witness_h.iter().all(|&h| (-TAU_NUM..=1.0 + TAU_NUM).contains(&h)));
        let residual = witness_residual(&spec, &r.witness_h, p);
        prop_assert!(residual <= eps * spec.p_norm(p) + TAU_NUM, "{} > {}", residual, eps * spec.p_norm(p));
        let cost: f64 = spec.pairs().iter().zip(&r.witness_h).map(|(q, h)| q.weight * h).sum();
        prop_assert!((cost - r.value).abs() < 1e-9);
        prop_assert!(r.lower_certificate <= r.value + TAU_NUM);
    }

    #[test]
    fn dominated_by_support_size(values in prop::collection::vec(-3.0f64..3.0, 1..10), p in prop::sample::select(vec![1.0, 2.0, 3.0, f64::INFINITY]), eps in 0.0f64..=1.0) {
        prop_assume!(values.iter().any(|v| v.abs() > 1e-3));
        let x = AlgebraElement::real_vector(&values);
        let size = ww_support_size(&x, p, eps).unwrap();
        prop_assert_eq!(size, ww_support_size_exhaustive(&x, p, eps).unwrap());
        prop_assert!(smooth_support(&x, p, eps).unwrap().value <= size as f64 + TAU_NUM);
    }

    #[test]
    fn two_norm_solution_beats_feasible_perturbations(
        pairs in prop::collection::vec((0.01f64..2.0, 0.2f64..3.0), 1..6),
        eps in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let spec = SpectralData::from_tuples(&pairs).unwrap();
        let r = smooth_support_spectral(&spec, 2.0, eps).unwrap();
        let budget = eps * spec.p_norm(2.0);
        let mut rng = sample_rng(seed, 0);
        for _ in 0..50 {
            let h: Vec<f64> = r.witness_h.iter().map(|&h| (h + rng.random_range(-0.1..0.1)).clamp(0.0, 1.0)).collect();
            if witness_residual(&spec, &h, 2.0) <= budget {
                let cost: f64 = spec.pairs().iter().zip(&h).map(|(q, h)| q.weight * h).sum();
                prop_assert!(cost >= r.value - 1e-9);
            }
        }
    }
}

#[test]
fn zero_element_needs_zero_eps() {
    let z = AlgebraElement::zeros(&AlgebraShape::counting(3));
    assert_eq!(smooth_support(&z, 2.0, 0.0).unwrap().value, 0.0);
    assert!(smooth_support(&z, 2.0, 0.1).is_err());
}
