use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::numerics::{conj_reflect_eval, eval_poly_from_roots, CVar, DiffTape};

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn close(a: Complex, b: Complex, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn finite_blaschke_empty_is_one() {
    assert_eq!(eval_finite_blaschke(&[], 0, c(0.3, -2.0)).unwrap(), c(1.0, 0.0));
}

#[test]
fn finite_blaschke_unimodular_on_axis() {
    let v = eval_finite_blaschke(&[c(2.0, 0.0)], 0, c(0.0, 0.7)).unwrap();
    assert!((v.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn finite_blaschke_factor_by_factor() {
    // ((1+z)/(1-z)) · (-j)(0.894…-0.447…j)(-0.1159…-0.6867…j) · (-1)(1)(-0.1765…+0.2941…j)
    let v = eval_finite_blaschke(&[c(1.0, 1.0), c(0.5, 0.0)], 1, c(0.3, 0.2)).unwrap();
    assert!(close(v, c(-0.144_140_337_690_185_33, 0.406_772_583_858_285_63), 1e-14));
}

#[test]
fn finite_blaschke_rejects_bad_inputs() {
    assert_eq!(
        eval_finite_blaschke(&[c(1.0, 0.0)], 0, c(0.0, 1.0)),
        Err(BlaschkeError::RootAtUnit { index: 0 })
    );
    assert!(eval_finite_blaschke(&[c(-1.0, 0.0)], 0, c(0.0, 1.0)).is_err());
    assert_eq!(
        eval_finite_blaschke(&[c(0.5, 0.0), c(-0.1, 0.0)], 0, c(0.0, 1.0)),
        Err(BlaschkeError::NegativeRealPart { index: 1 })
    );
    let a = c(0.5, 2.0);
    assert!(matches!(
        eval_finite_blaschke(&[a], 0, -a.conj()),
        Err(BlaschkeError::Pole { .. })
    ));
    assert!(matches!(
        eval_finite_blaschke(&[], 2, c(1.0, 0.0)),
        Err(BlaschkeError::Pole { .. })
    ));
}

#[test]
fn constant_phase_models() {
    let grid = [-1.0, -0.2, 0.4, 3.0];
    let m = BlaschkePhaseModel::new(vec![], 0.0, FrequencyMap::identity()).unwrap();
    assert!(m.eval_phase(&grid).unwrap().iter().all(|&b| b == c(1.0, 0.0)));
    let m = BlaschkePhaseModel::new(vec![], FRAC_PI_2, FrequencyMap::identity()).unwrap();
    assert!(m.eval_phase(&grid).unwrap().iter().all(|&b| close(b, c(0.0, 1.0), 1e-15)));
}

#[test]
fn single_root_phase() {
    // (j-1)/(-j-1) = -j
    let m = BlaschkePhaseModel::new(vec![c(1.0, 0.0)], 0.0, FrequencyMap::identity()).unwrap();
    assert!(close(m.phase_at(1.0).unwrap(), c(0.0, -1.0), 1e-15));
}

#[test]
fn phase_pole_on_axis() {
    let m = BlaschkePhaseModel::new(vec![c(0.0, 0.25)], 0.0, FrequencyMap::identity()).unwrap();
    assert!(matches!(m.phase_at(0.25), Err(BlaschkeError::Pole { .. })));
    assert!(m.phase_at(0.3).is_ok());
}

#[test]
fn model_rejects_non_finite() {
    assert!(BlaschkePhaseModel::new(vec![c(f64::NAN, 0.0)], 0.0, FrequencyMap::identity()).is_err());
    assert!(BlaschkePhaseModel::new(vec![], f64::INFINITY, FrequencyMap::identity()).is_err());
}

#[test]
fn phase_is_ratio_of_polynomial_and_reflection() {
    let roots = vec![c(0.3, -0.8), c(-1.2, 0.4), c(0.05, 2.0)];
    let m = BlaschkePhaseModel::new(roots.clone(), 0.7, FrequencyMap::identity()).unwrap();
    for w in [-1.5, -0.3, 0.0, 0.9] {
        let z = c(0.0, w);
        let direct = Complex::from_polar(1.0, 0.7) * eval_poly_from_roots(&roots, z) / conj_reflect_eval(&roots, z);
        assert!(close(m.phase_at(w).unwrap(), direct, 1e-12));
    }
}

#[test]
fn frequency_map_spans_band() {
    let f = FrequencyMap::spanning(100.0, 500.0).unwrap();
    assert_eq!(f.normalize(100.0), -1.0);
    assert_eq!(f.normalize(500.0), 1.0);
    assert_eq!(f.normalize(300.0), 0.0);
    assert!(FrequencyMap::spanning(2.0, 1.0).is_err());
    assert_eq!(FrequencyMap::spanning(3.0, 3.0).unwrap().normalize(3.0), 0.0);
}

#[test]
fn single_segment_is_bit_identical() {
    let grid: Vec<f64> = (0..57).map(|i| 100.0 + 7.0 * i as f64).collect();
    let part = GridPartition::new(grid.clone(), 1).unwrap();
    let params = [0.3, -0.4, -0.8, 0.1, 1.3];
    let plain = BlaschkePhaseModel::from_flat(&params, part.map(0)).unwrap();
    let seg = part.segmented_model(&params, 2).unwrap();
    let a = plain.eval_phase(&grid).unwrap();
    let b = seg.eval_phase_segmented(&grid).unwrap();
    assert_eq!(a, b);
}

#[test]
fn two_identical_segments_stay_unimodular() {
    let grid: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
    let part = GridPartition::new(grid.clone(), 2).unwrap();
    let block = [0.2, 0.9, -0.5];
    let params: Vec<f64> = block.iter().chain(&block).copied().collect();
    let seg = part.segmented_model(&params, 1).unwrap();
    for b in seg.eval_phase_segmented(&grid).unwrap() {
        assert!((b.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn twenty_segments_of_three_roots() {
    let grid: Vec<f64> = (0..2001).map(|i| 100.0 + 0.2 * i as f64).collect();
    let part = GridPartition::new(grid.clone(), 20).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params: Vec<f64> = (0..20 * 7).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let out = part.segmented_model(&params, 3).unwrap().eval_phase_segmented(&grid).unwrap();
    assert_eq!(out.len(), 2001);
    assert!(out.iter().all(|b| (b.norm() - 1.0).abs() < 1e-12));
}

#[test]
fn segment_lookup_and_coverage() {
    let models = vec![BlaschkePhaseModel::new(vec![], 0.0, FrequencyMap::identity()).unwrap(); 2];
    let seg = SegmentedPhaseModel::new(vec![0.0, 1.0, 2.0], models).unwrap();
    assert_eq!(seg.segment_of(0.0).unwrap(), 0);
    assert_eq!(seg.segment_of(0.999).unwrap(), 0);
    assert_eq!(seg.segment_of(1.0).unwrap(), 1);
    assert_eq!(seg.segment_of(2.0).unwrap(), 1);
    assert_eq!(seg.segment_of(2.5), Err(BlaschkeError::Uncovered(2.5)));
    assert!(seg.eval_phase_segmented(&[-0.1]).is_err());
    let models = vec![BlaschkePhaseModel::new(vec![], 0.0, FrequencyMap::identity()).unwrap(); 2];
    assert!(SegmentedPhaseModel::new(vec![0.0, 0.0, 1.0], models).is_err());
}

#[test]
fn partition_lengths() {
    let r = equal_partition(10, 3).unwrap();
    assert_eq!(r, vec![0..4, 4..7, 7..10]);
    assert!(equal_partition(3, 4).is_err());
    assert!(equal_partition(3, 0).is_err());
}

#[test]
fn reconstruct_examples() {
    let phase = vec![c(0.0, 1.0), c(0.6, 0.8)];
    assert_eq!(reconstruct(&[0.0, 0.0], &phase).unwrap(), vec![c(0.0, 0.0); 2]);
    assert_eq!(
        reconstruct(&[1.5, 2.0], &[c(1.0, 0.0); 2]).unwrap(),
        vec![c(1.5, 0.0), c(2.0, 0.0)]
    );
    assert_eq!(reconstruct(&[2.0], &[c(0.0, 1.0)]).unwrap(), vec![c(0.0, 2.0)]);
    assert_eq!(reconstruct(&[1.0, -0.5], &phase), Err(BlaschkeError::NegativeMagnitude(1)));
    assert!(reconstruct(&[1.0], &phase).is_err());
}

#[test]
fn spectrum_validation() {
    assert!(ComplexSpectrum::new(vec![0.0, 1.0], vec![c(1.0, 0.0)]).is_err());
    assert_eq!(
        ComplexSpectrum::new(vec![0.0, 0.0], vec![c(1.0, 0.0); 2]),
        Err(BlaschkeError::NotIncreasing(1))
    );
    let s = ComplexSpectrum::new(vec![0.0, 1.0], vec![c(3.0, 4.0), c(0.0, -2.0)]).unwrap();
    assert_eq!(s.magnitudes(), vec![5.0, 2.0]);
}

#[test]
fn unimodular_over_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let m = rng.gen_range(0..8);
        let roots: Vec<Complex> = (0..m)
            .map(|_| c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
            .collect();
        let model = BlaschkePhaseModel::new(roots, rng.gen_range(-4.0..4.0), FrequencyMap::identity()).unwrap();
        let w = rng.gen_range(-5.0..5.0);
        let b = model.phase_at(w).unwrap();
        assert!((b.norm() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn angle_gradient_matches_tape() {
    // dual route: closed-form ∂θ vs a tape recording of the same product
    let params = [0.4, -0.3, -0.7, 1.1, 0.05, 0.2, 0.9];
    let w = 0.35;
    let model = BlaschkePhaseModel::from_flat(&params, FrequencyMap::identity()).unwrap();
    let mut dtheta = vec![0.0; params.len()];
    let b = model.phase_with_angle_gradient(w, &mut dtheta).unwrap();
    assert!(close(b, model.phase_at(w).unwrap(), 1e-15));

    // ∂Re b̃/∂p = -sin θ ∂θ/∂p, ∂Im b̃/∂p = cos θ ∂θ/∂p
    for part in 0..2 {
        let mut t = DiffTape::new();
        let phi = t.param(6);
        let mut acc = t.cis(phi);
        for k in 0..3 {
            let ar = t.param(2 * k);
            let ai = t.param(2 * k + 1);
            let wv = t.constant(w);
            let u = CVar {
                re: t.neg(ar),
                im: t.sub(wv, ai),
            };
            let uc = t.conj(u);
            let g = t.cdiv(u, uc);
            acc = t.cmul(acc, g);
        }
        if part == 0 {
            let one = t.constant(1.0);
            t.mul(acc.re, one);
        } else {
            let one = t.constant(1.0);
            t.mul(acc.im, one);
        }
        t.forward(&params).unwrap();
        let g = t.backward().unwrap();
        for (i, gi) in g.iter().enumerate() {
            let expect = if part == 0 { -b.im * dtheta[i] } else { b.re * dtheta[i] };
            assert!((gi - expect).abs() < 1e-12, "param {i}: {gi} vs {expect}");
        }
    }
}

proptest! {
    #[test]
    fn finite_blaschke_unimodular_for_right_half_plane_roots(
        raw in proptest::collection::vec((0.0f64..3.0, -3.0f64..3.0), 0..6),
        n in 0i32..3,
        w in -10.0f64..10.0,
    ) {
        let roots: Vec<Complex> = raw.iter().map(|&(r, i)| c(r + 1e-3, i)).collect();
        let v = eval_finite_blaschke(&roots, n, c(0.0, w)).unwrap();
        prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn conjugate_roots_mirror_the_phase(
        raw in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 0..6),
        phi in -3.0f64..3.0,
        w in -2.0f64..2.0,
    ) {
        let roots: Vec<Complex> = raw.iter().map(|&(r, i)| c(r, i)).collect();
        let mirrored: Vec<Complex> = roots.iter().map(|a| a.conj()).collect();
        let m1 = BlaschkePhaseModel::new(roots, phi, FrequencyMap::identity()).unwrap();
        let m2 = BlaschkePhaseModel::new(mirrored, -phi, FrequencyMap::identity()).unwrap();
        let lhs = m2.phase_at(-w).unwrap();
        let rhs = m1.phase_at(w).unwrap().conj();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn reconstruct_preserves_magnitude(
        mags in proptest::collection::vec(0.0f64..50.0, 1..20),
        phi in -3.0f64..3.0,
    ) {
        let model = BlaschkePhaseModel::new(vec![c(0.3, 0.1)], phi, FrequencyMap::identity()).unwrap();
        let grid: Vec<f64> = (0..mags.len()).map(|i| i as f64 * 0.1 + 0.01).collect();
        let out = reconstruct(&mags, &model.eval_phase(&grid).unwrap()).unwrap();
        for (o, m) in out.iter().zip(&mags) {
            prop_assert!((o.norm() - m).abs() <= 1e-12 * m.max(1.0));
        }
    }
}
