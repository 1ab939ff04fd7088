use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::music::peaks;
use super::*;
use crate::bpnn::{bpnn_batch_loss, bpnn_forward, DirectHead, Mlp, SpectraBatch};
use crate::datasets::{Sample, SpectralDataset};
use crate::numerics::Complex;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn toy_dataset(n_freq: usize, count: usize, seed: u64) -> SpectralDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omegas: Vec<f64> = (0..n_freq).map(|i| 1.0 + i as f64 * 0.1).collect();
    let samples = (0..count)
        .map(|_| {
            let a: f64 = rng.gen_range(0.5..2.0);
            let k: f64 = rng.gen_range(0.5..3.0);
            let values = omegas.iter().map(|&w| Complex::from_polar(a + 0.2 * (w * k).sin(), k * w)).collect();
            Sample::new(values, vec![])
        })
        .collect();
    SpectralDataset::new(omegas, samples).unwrap()
}

#[test]
fn kk_constant_magnitude_gives_zero_phase() {
    let omegas: Vec<f64> = (0..50).map(|i| 10.0 + i as f64).collect();
    let phase = kk_phase(&[2.5; 50], &omegas).unwrap();
    assert!(phase.iter().all(|&p| p == 0.0));
}

#[test]
fn kk_reconstruction_keeps_modulus() {
    let omegas: Vec<f64> = (0..40).map(|i| i as f64 * 0.3).collect();
    let mags: Vec<f64> = omegas.iter().map(|w| 1.0 + 0.5 * w.sin()).collect();
    let rec = kk_reconstruct(&mags, &omegas).unwrap();
    for (r, a) in rec.iter().zip(&mags) {
        assert!((r.norm() - a).abs() <= 1e-15 * a);
    }
}

#[test]
fn kk_rejects_bad_input() {
    let omegas = [1.0, 2.0, 3.0];
    assert!(matches!(kk_phase(&[1.0, 0.0, 1.0], &omegas), Err(BaselineError::ZeroMagnitude(1))));
    assert!(matches!(kk_phase(&[1.0, 1.0, 1.0], &[1.0, 1.0, 2.0]), Err(BaselineError::Grid)));
    assert!(kk_phase(&[1.0, 1.0], &omegas).is_err());
}

#[test]
fn hilbert_pair_applied_twice_negates() {
    // cos → sin → −cos at the band centre; error shrinks as the band widens
    // and the grid gets denser
    let centre_error = |half_periods: usize, per_unit: usize| {
        let half = half_periods as f64 * std::f64::consts::PI;
        let n = 2 * (half * per_unit as f64) as usize + 1;
        let omegas: Vec<f64> = (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
        let u: Vec<f64> = omegas.iter().map(|w| w.cos()).collect();
        let v = hilbert_transform(&u, &omegas).unwrap();
        let w = hilbert_transform(&v, &omegas).unwrap();
        let mid = n / 2;
        (v[mid] - omegas[mid].sin()).abs().max((w[mid] + u[mid]).abs())
    };
    let coarse = centre_error(20, 4);
    let fine = centre_error(80, 16);
    assert!(fine < coarse, "{fine} vs {coarse}");
    assert!(fine < 0.05, "{fine}");
}

#[test]
fn aaa_recovers_simple_pole() {
    let z: Vec<Complex> = (0..50).map(|i| c(0.0, -1.0 + 2.0 * i as f64 / 49.0)).collect();
    let f: Vec<Complex> = z.iter().map(|z| 1.0 / (z - 2.0)).collect();
    let model = aaa_fit(&z, &f, 10, 1e-13).unwrap();
    assert!(model.len() <= 2, "{} supports", model.len());
    for (zi, fi) in z.iter().zip(&f) {
        assert!((model.eval(*zi) - fi).norm() < 1e-12);
    }
}

#[test]
fn aaa_constant_target_uses_one_support() {
    let z: Vec<Complex> = (0..10).map(|i| c(i as f64, 0.0)).collect();
    let f = vec![c(3.0, -1.0); 10];
    let model = aaa_fit(&z, &f, 5, 1e-13).unwrap();
    assert_eq!(model.len(), 1);
    for zi in &z {
        assert_eq!(model.eval(*zi), c(3.0, -1.0));
    }
}

#[test]
fn aaa_interpolates_its_support_points() {
    let z: Vec<Complex> = (0..80).map(|i| c(0.0, -1.0 + 2.0 * i as f64 / 79.0)).collect();
    let f: Vec<Complex> = z.iter().map(|z| (z * 3.0).exp() / (1.0 + z * z * 0.5)).collect();
    let model = aaa_fit(&z, &f, 7, 1e-13).unwrap();
    assert_eq!(model.len(), 7);
    for (zj, fj) in model.support().iter().zip(model.values()) {
        let i = z.iter().position(|p| p == zj).unwrap();
        assert!((model.eval(*zj) - f[i]).norm() <= 1e-12);
        assert_eq!(fj, &f[i]);
    }
}

#[test]
fn aaa_type_two_two_is_exact() {
    let z: Vec<Complex> = (0..60).map(|i| c(0.0, -1.0 + 2.0 * i as f64 / 59.0)).collect();
    let target = |z: Complex| (z * z + c(0.5, 1.0) * z - 2.0) / ((z - c(1.5, 0.3)) * (z + c(2.0, -1.0)));
    let f: Vec<Complex> = z.iter().map(|&z| target(z)).collect();
    let model = aaa_fit(&z, &f, 5, 1e-13).unwrap();
    assert!(model.len() <= 5);
    let worst = z.iter().zip(&f).map(|(zi, fi)| (model.eval(*zi) - fi).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn aaa_rejects_degenerate_input() {
    let z: Vec<Complex> = (0..5).map(|i| c(i as f64, 0.0)).collect();
    assert!(matches!(aaa_fit(&z, &[c(0.0, 0.0); 5], 2, 1e-13), Err(BaselineError::Degenerate)));
    assert!(matches!(
        aaa_fit(&z, &[c(1.0, 0.0); 5], 5, 1e-13),
        Err(BaselineError::TooFewPoints { needed: 6, got: 5 })
    ));
    let dup = vec![c(1.0, 0.0); 5];
    assert!(aaa_fit(&dup, &[c(1.0, 0.0); 5], 1, 1e-13).is_err());
}

#[test]
fn barycentric_flat_round_trip() {
    let m = BarycentricModel::new(
        vec![c(0.0, 0.1), c(0.0, 0.5)],
        vec![c(0.3, -0.2), c(-1.0, 0.4)],
        vec![c(1.0, 2.0), c(-0.5, 0.0)],
    )
    .unwrap();
    let back = BarycentricModel::from_flat(&m.to_flat()).unwrap();
    assert_eq!(back, m);
    assert!(BarycentricModel::from_flat(&[0.0; 7]).is_err());
    assert!(BarycentricModel::new(vec![c(1.0, 0.0); 2], vec![c(1.0, 0.0); 2], vec![c(1.0, 0.0); 2]).is_err());
}

#[test]
fn aaa_pipeline_decomposes_into_stages() {
    let data = toy_dataset(40, 6, 1);
    let stages = AaaStages::new(data.omegas(), 4, 1e-13).unwrap();
    // injecting the stage-1 parameters leaves only the fit residual
    let mut stage1 = Vec::new();
    for s in data.samples() {
        let model = stages.fit(&s.values).unwrap();
        assert_eq!(model.len(), 4);
        let injected = BarycentricModel::from_flat(&model.to_flat()).unwrap();
        let direct = stages.error(&model, &s.magnitudes, &s.values);
        assert_eq!(stages.error(&injected, &s.magnitudes, &s.values), direct);
        let residual: f64 = stages
            .points()
            .iter()
            .zip(&s.values)
            .map(|(z, f)| (f - model.eval(*z) * f.norm()).norm_sqr())
            .sum::<f64>()
            / 40.0;
        assert!((direct - residual).abs() <= 1e-15 * residual.max(1.0));
        stage1.push(direct);
    }
    let cfg = AaaNetConfig {
        epochs: 50,
        hidden: vec![16, 16],
        ..AaaNetConfig::default()
    };
    let report = aaa_network_pipeline(&cfg, &data, &data).unwrap();
    assert_eq!(report.per_sample.len(), 6);
    assert!(report.best_mse >= mean(&stage1));
}

fn exponentials(freqs: &[f64], m: usize, n: usize, seed: u64) -> DMatrix<Complex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, m);
    for i in 0..n {
        for &w in freqs {
            let amp = Complex::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU));
            for k in 0..m {
                x[(i, k)] += amp * Complex::from_polar(1.0, k as f64 * w);
            }
        }
    }
    x
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

#[test]
fn music_finds_single_exponential() {
    let x = exponentials(&[1.234], 32, 4, 0);
    let cell = std::f64::consts::TAU / 320.0;
    let w = music_frequencies(&x, 1, 320).unwrap();
    assert!(circular_gap(w[0], 1.234) <= cell, "{w:?}");
}

#[test]
fn music_finds_two_exponentials() {
    let truth = [0.7, 2.9];
    let x = exponentials(&truth, 64, 8, 1);
    let grid = 640;
    let cell = std::f64::consts::TAU / grid as f64;
    let mut w = music_frequencies(&x, 2, grid).unwrap();
    w.sort_by(f64::total_cmp);
    for (a, b) in w.iter().zip(&truth) {
        assert!(circular_gap(*a, *b) <= cell, "{w:?}");
    }
}

#[test]
fn music_noise_subspace_is_orthogonal_to_signals() {
    let truth = [0.4, 1.9, 4.4];
    let x = exponentials(&truth, 24, 6, 2);
    let noise = noise_subspace(&x, 3).unwrap();
    let grid = pseudospectrum_denominator(&noise, 240).unwrap();
    let med = crate::bpnn::median(&grid);
    for w in truth {
        assert!(music_distance(&noise, w) < 1e-8 * med);
    }
    // the FFT grid agrees with direct evaluation
    for g in [0, 17, 100, 239] {
        let w = std::f64::consts::TAU * g as f64 / 240.0;
        assert!((grid[g] - music_distance(&noise, w)).abs() < 1e-10 * med);
    }
}

#[test]
fn music_rejects_full_order() {
    let x = exponentials(&[1.0], 8, 2, 0);
    assert!(matches!(music_frequencies(&x, 8, 80), Err(BaselineError::Order { p: 8, m: 8 })));
}

#[test]
fn peak_picking_handles_plateaus_and_wraparound() {
    // minima of d are peaks of 1/d
    let d = [0.5, 3.0, 1.0, 1.0, 2.0, 0.2, 4.0, 0.9];
    assert_eq!(peaks(&d), vec![5, 0, 2]);
    assert!(peaks(&[1.0; 6]).is_empty());
}

#[test]
fn music_retrieve_zero_target() {
    let a = steering_matrix(&[0.3, 1.1], 16);
    let opts = RetrieveOptions {
        restarts: 4,
        epochs: 300,
        ..RetrieveOptions::default()
    };
    let (x, loss) = music_retrieve(&a, &[0.0; 16], &opts).unwrap();
    assert!(loss < 1e-6, "{loss}");
    assert!(x.iter().all(|z| z.norm() < 1e-3));
}

#[test]
fn music_retrieve_fits_planted_magnitudes() {
    let a = steering_matrix(&[0.5, 2.0], 32);
    let s0 = DMatrix::from_column_slice(2, 1, &[c(1.0, 0.5), c(-0.3, 0.8)]);
    let target: Vec<f64> = (&a * s0).iter().map(|z| z.norm()).collect();
    let opts = RetrieveOptions {
        restarts: 64,
        ..RetrieveOptions::default()
    };
    let (x, loss) = music_retrieve(&a, &target, &opts).unwrap();
    assert!(loss < 1e-6, "{loss}");
    let recomputed: f64 = x.iter().zip(&target).map(|(z, y)| (z.norm() - y).powi(2)).sum();
    assert!((recomputed - loss).abs() < 1e-12);
}

#[test]
fn music_pipeline_runs_capped() {
    let data = toy_dataset(24, 5, 3);
    let cfg = MusicConfig {
        p: 2,
        test_cap: Some(2),
        retrieve: RetrieveOptions {
            restarts: 8,
            epochs: 20,
            ..RetrieveOptions::default()
        },
        ..MusicConfig::default()
    };
    let report = music_pipeline(&cfg, &data, &data).unwrap();
    assert_eq!(report.per_sample.len(), 2);
    assert!(report.best_mse.is_finite());
}

#[test]
fn linear_bp_equals_depth_zero_bpnn() {
    let train = toy_dataset(12, 4, 5);
    let test = toy_dataset(12, 3, 6);
    let cfg = BpnnConfig {
        epochs: 30,
        hidden: vec![8, 8],
        ..BpnnConfig::default()
    };
    let (r1, m1) = linear_bp(&cfg, &train, &test).unwrap();
    let depth0 = BpnnConfig { hidden: vec![], ..cfg };
    let (r2, m2) = train_bpnn(&depth0, &train, &test).unwrap();
    assert!(r1.same_trajectory(&r2));
    assert_eq!(m1.mlp, m2.mlp);
    assert_eq!(m1.mlp.widths(), &[12, 9]);
}

#[test]
fn linear_bp_gradient_matches_finite_differences() {
    let data = toy_dataset(8, 3, 7);
    let cfg = BpnnConfig {
        roots_per_segment: 2,
        hidden: vec![],
        seed: 3,
        ..BpnnConfig::default()
    };
    let model = BpnnModel::new(cfg, data.omegas().to_vec()).unwrap();
    let batch = SpectraBatch::from_dataset(&data);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (out, cache) = model.mlp.forward_train(&batch.inputs, &mut rng).unwrap();
    let mut g_out = DMatrix::zeros(out.nrows(), out.ncols());
    crate::bpnn::Head::loss(&model.head(), &out, &batch, Some(&mut g_out)).unwrap();
    let grad = model.mlp.backward(&cache, &g_out);
    let truth: Vec<_> = data.samples().iter().map(|s| s.values.clone()).collect();
    let loss_at = |p: &[f64]| {
        let mlp = Mlp::from_params(model.mlp.widths().to_vec(), p.to_vec(), 0.0).unwrap();
        let preds: Vec<_> = data
            .samples()
            .iter()
            .map(|s| bpnn_forward(&mlp, &model.partition, &s.magnitudes, &model.config).unwrap())
            .collect();
        bpnn_batch_loss(&preds, &truth).unwrap()
    };
    let mut p = model.mlp.params().to_vec();
    for k in 0..p.len() {
        let orig = p[k];
        p[k] = orig + 1e-6;
        let hi = loss_at(&p);
        p[k] = orig - 1e-6;
        let lo = loss_at(&p);
        p[k] = orig;
        let fd = (hi - lo) / 2e-6;
        assert!((grad[k] - fd).abs() <= 1e-4 * fd.abs().max(1e-3), "param {k}: {} vs {fd}", grad[k]);
    }
}

#[test]
fn fcnn_predictions_are_not_magnitude_consistent() {
    let data = toy_dataset(10, 2, 8);
    let n = data.n_freq();
    let mlp = Mlp::init(&[n, 16, 2 * n], 0.0, 0).unwrap();
    let batch = SpectraBatch::from_dataset(&data);
    let out = mlp.forward(&batch.inputs).unwrap();
    assert_eq!(out.nrows(), 2 * n);
    let preds = DirectHead::new(n).predict(&out);
    let worst = preds
        .iter()
        .zip(data.samples())
        .flat_map(|(p, s)| p.iter().zip(&s.magnitudes).map(|(z, a)| (z.norm() - a).abs()))
        .fold(0.0, f64::max);
    assert!(worst > 0.1);
}

#[test]
fn fcnn_single_point_grid_is_one_run() {
    let train = toy_dataset(10, 3, 9);
    let test = toy_dataset(10, 2, 10);
    let grid = FcnnGrid {
        widths: vec![8],
        depths: vec![1],
        dropouts: vec![0.0],
        learning_rates: vec![1e-3],
        seeds: vec![4],
        epochs: 25,
    };
    let result = fcnn_baseline(&grid, &train, &test).unwrap();
    assert_eq!(result.runs.len(), 1);
    let single = fcnn_run(&grid.runs()[0], 25, &train, &test).unwrap();
    let best = result.best().unwrap().outcome.as_ref().unwrap();
    assert_eq!(best.best_mse, single.best_mse);
    assert_eq!(best.per_sample, single.per_sample);
    assert_eq!(best.best_epoch, single.best_epoch);
}

#[test]
fn fcnn_grid_enumeration() {
    let grid = FcnnGrid::default();
    assert_eq!(grid.runs().len(), 4 * 4 * 5 * 5 * 3);
    assert_eq!(grid.architectures().len(), 16);
    assert_eq!(grid.epochs, 6000);
    let empty = FcnnGrid {
        seeds: vec![],
        ..FcnnGrid::default()
    };
    assert!(empty.validate().is_err());
}

#[test]
fn fcnn_divergence_is_recorded() {
    let train = toy_dataset(10, 3, 11);
    let grid = FcnnGrid {
        widths: vec![8],
        depths: vec![1],
        dropouts: vec![0.0],
        learning_rates: vec![1e-3, 1e300],
        seeds: vec![0],
        epochs: 5,
    };
    let result = fcnn_baseline(&grid, &train, &train).unwrap();
    assert!(result.runs[0].outcome.is_ok());
    assert!(result.runs[1].outcome.is_err());
    let per_arch = result.best_per_architecture();
    assert_eq!(per_arch.len(), 1);
    assert_eq!(per_arch[0].1.unwrap().hparams.learning_rate, 1e-3);
}
