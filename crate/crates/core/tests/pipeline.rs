//! End-to-end checks of the estimation pipeline against exhaustive
//! oracles and structural invariants.

use lrtc_core::completion::{
    complete, hosvd_init, power_iterations, CompletionConfig, InitMethod, LambdaMode,
};
use lrtc_core::obs::{full_dataset, n_exact, sample_dataset, t_init, NoiseSpec};
use lrtc_core::oracle::{expect_n_hat_exhaustive, expect_t_init_exhaustive};
use lrtc_core::rng::{pack_stream, stream_rng};
use lrtc_core::spectra::{singular_values, subspace_distance};
use lrtc_core::synth::{generate, generate_with, relative_error, ModelSpec};
use lrtc_core::tensor::{project_multilinear, Tensor};
use rand::Rng;

fn random_tensor(dims: &[usize], seed: u64) -> Tensor {
    let mut rng = stream_rng(seed, 9);
    let len: usize = dims.iter().product();
    let vals: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
    Tensor::new(dims.to_vec(), vals).unwrap()
}

#[test]
fn estimators_are_unbiased_exhaustively() {
    for dims in [vec![2usize, 2, 2], vec![2, 3, 2]] {
        let t = random_tensor(&dims, 41);
        let mean_t = expect_t_init_exhaustive(&t).unwrap();
        for (a, b) in mean_t.values().iter().zip(t.values()) {
            assert!((a - b).abs() <= 1e-10, "t_init expectation off: {a} vs {b}");
        }
        for mode in 0..dims.len() {
            let mean_n = expect_n_hat_exhaustive(&t, mode).unwrap();
            let exact = n_exact(&t, mode).unwrap();
            for (a, b) in mean_n.values().iter().zip(exact.values()) {
                assert!((a - b).abs() <= 1e-10, "n_hat expectation off: {a} vs {b}");
            }
        }
    }
}

#[test]
fn estimate_respects_target_ranks() {
    let spec = ModelSpec::tucker(vec![10, 9, 8], vec![3, 2, 2], 7);
    let (t, _) = generate(&spec).unwrap();
    let mut rng = stream_rng(70, 0);
    let noise = NoiseSpec::new(0.05 * t.max_abs()).unwrap();
    let data = sample_dataset(&t, 6 * t.len(), &noise, &mut rng).unwrap();
    let mut cfg = CompletionConfig::new(vec![3, 2, 2]);
    cfg.lambda = LambdaMode::Fixed(0.0);
    let est = complete(&data, &cfg).unwrap();
    let norm = est.t_hat.l2_norm();
    for (j, &r) in cfg.ranks.iter().enumerate() {
        let sigma = singular_values(&est.t_hat.matricize(j).unwrap()).unwrap();
        assert!(
            sigma[r] <= 1e-8 * norm,
            "mode {j}: sigma_{} = {} exceeds rank bound",
            r + 1,
            sigma[r]
        );
    }
}

#[test]
fn power_iteration_objective_is_monotone() {
    // ||project(t0, factors_after_sweep_s)|| is nondecreasing in s.
    for seed in 0..5u64 {
        let spec = ModelSpec::tucker(vec![8, 8, 8], vec![2, 2, 2], 100 + seed);
        let (t, _) = generate(&spec).unwrap();
        let mut rng = stream_rng(200 + seed, 0);
        let noise = NoiseSpec::new(0.2 * t.max_abs()).unwrap();
        let data = sample_dataset(&t, 4 * t.len(), &noise, &mut rng).unwrap();
        let t0 = t_init(&data);
        let init = hosvd_init(&t0, &[2, 2, 2]).unwrap();
        let mut prev_energy = project_multilinear(&t0, &init).unwrap().l2_norm();
        let mut factors = init;
        for _sweep in 0..6 {
            let (next, t_hat, _) = power_iterations(&t0, &factors, &[2, 2, 2], 1, 0.0).unwrap();
            let energy = t_hat.l2_norm();
            assert!(
                energy >= prev_energy - 1e-9 * (1.0 + prev_energy),
                "objective dropped: {prev_energy} -> {energy}"
            );
            prev_energy = energy;
            factors = next;
        }
    }
}

#[test]
fn sweep_from_fixed_point_does_not_move() {
    let spec = ModelSpec::tucker(vec![9, 7, 8], vec![3, 2, 2], 55);
    let (t, _) = generate(&spec).unwrap();
    let exact = hosvd_init(&t, &[3, 2, 2]).unwrap();
    let (after, _, trace) = power_iterations(&t, &exact, &[3, 2, 2], 1, 0.0).unwrap();
    assert_eq!(trace.len(), 1);
    for j in 0..3 {
        let d = subspace_distance(after.factor(j), exact.factor(j)).unwrap();
        assert!(d <= 1e-10, "mode {j} moved by {d}");
    }
}

#[test]
fn power_sweeps_beat_projection_only() {
    // d = 50, r = 5, sigma = 0.2, n = r d^2.2: ten sweeps reduce the
    // mean relative error over 20 seeds compared with projecting onto
    // the initialization alone. This is the regime where the
    // initialization sits inside the distance-1/2 basin; at small d and
    // n ~ r d^1.5 the init error exceeds 1/2 and the comparison is not
    // informative.
    let d = 50usize;
    let r = 5usize;
    let n = (r as f64 * (d as f64).powf(2.2)).round() as usize;
    let mut err_proj = 0.0;
    let mut err_power = 0.0;
    let reps = 20u32;
    for rep in 0..reps {
        let mut rng = stream_rng(4242, pack_stream(0, rep));
        let spec = ModelSpec::cp_ortho(d, 3, r, None, 0);
        let (t, _) = generate_with(&spec, &mut rng).unwrap();
        let data = sample_dataset(&t, n, &NoiseSpec::new(0.2).unwrap(), &mut rng).unwrap();
        let mut cfg = CompletionConfig::new(vec![r; 3]);
        cfg.lambda = LambdaMode::Fixed(0.0);
        cfg.iter_max = 0;
        let proj = complete(&data, &cfg).unwrap();
        cfg.iter_max = 10;
        let power = complete(&data, &cfg).unwrap();
        err_proj += relative_error(&proj.t_hat, &t).unwrap();
        err_power += relative_error(&power.t_hat, &t).unwrap();
    }
    err_proj /= reps as f64;
    err_power /= reps as f64;
    assert!(
        err_power < err_proj,
        "power {err_power} not better than projection {err_proj}"
    );
}

#[test]
fn order_two_tensors_complete_like_matrices() {
    // the pipeline is written for general k >= 2; a matrix is the base case
    let spec = ModelSpec::tucker(vec![12, 9], vec![2, 2], 61);
    let (t, _) = generate(&spec).unwrap();
    let mut rng = stream_rng(610, 0);
    let noise = NoiseSpec::new(0.01 * t.max_abs()).unwrap();
    // with-replacement sampling at 32x oversampling leaves ~18% per-entry
    // occupancy noise; the rank-2 projection brings it near 0.1
    let data = sample_dataset(&t, 32 * t.len(), &noise, &mut rng).unwrap();
    let mut cfg = CompletionConfig::new(vec![2, 2]);
    cfg.lambda = LambdaMode::Fixed(0.0);
    cfg.iter_max = 20;
    let est = complete(&data, &cfg).unwrap();
    let re = relative_error(&est.t_hat, &t).unwrap();
    assert!(re < 0.2, "matrix-case relative error {re}");
}

#[test]
fn full_noiseless_recovery_both_inits() {
    let spec = ModelSpec::tucker(vec![8, 8, 8], vec![2, 2, 2], 77);
    let (t, _) = generate(&spec).unwrap();
    let data = full_dataset(&t);
    for init in [InitMethod::Spectral, InitMethod::Hosvd] {
        let mut cfg = CompletionConfig::new(vec![2, 2, 2]);
        cfg.init_method = init;
        cfg.iter_max = 30;
        let est = complete(&data, &cfg).unwrap();
        let re = relative_error(&est.t_hat, &t).unwrap();
        assert!(re <= 1e-8, "{init:?}: relative error {re}");
    }
}
