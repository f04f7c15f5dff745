use qsurrogate_core::ann::{mlp_fit, mlp_param_count, AnnConfig, MlpModel};
use qsurrogate_core::optimize::{adam_minimize, cobyla_minimize, AdamConfig, CobylaConfig, OptStatus};
use qsurrogate_core::rng::SeededRng;
use qsurrogate_core::scaler::{FeatureScaler, TargetScaler};

fn rosenbrock(x: &[f64]) -> f64 {
    100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
}

#[test]
fn cobyla_reaches_rosenbrock_minimum_with_larger_budget() {
    let cfg = CobylaConfig {
        rhobeg: 0.5,
        rhoend: 1e-7,
        max_evals: 20_000,
    };
    let res = cobyla_minimize(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
    let err = ((res.best_point[0] - 1.0).powi(2) + (res.best_point[1] - 1.0).powi(2)).sqrt();
    assert!(err <= 1e-3, "{:?} after {} evals", res.best_point, res.n_evaluations);
}

#[test]
fn cobyla_converges_on_shifted_quadratic() {
    let f = |x: &[f64]| {
        x.iter()
            .enumerate()
            .map(|(i, v)| (i as f64 + 1.0) * (v - 0.5 * i as f64).powi(2))
            .sum()
    };
    let res = cobyla_minimize(
        f,
        &[3.0, -2.0, 1.0, 0.0],
        &CobylaConfig {
            rhoend: 1e-6,
            max_evals: 5000,
            ..CobylaConfig::default()
        },
    )
    .unwrap();
    assert_eq!(res.status, OptStatus::Converged);
    for (i, v) in res.best_point.iter().enumerate() {
        assert!((v - 0.5 * i as f64).abs() < 1e-4, "{:?}", res.best_point);
    }
}

#[test]
fn adam_on_rosenbrock_descends() {
    let grad = |x: &[f64]| {
        vec![
            -400.0 * x[0] * (x[1] - x[0] * x[0]) - 2.0 * (1.0 - x[0]),
            200.0 * (x[1] - x[0] * x[0]),
        ]
    };
    let cfg = AdamConfig {
        learning_rate: 0.02,
        n_steps: 20_000,
        ..AdamConfig::default()
    };
    let res = adam_minimize(grad, rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
    assert!(res.best_value < 1e-4, "{}", res.best_value);
}

fn random_model(d: usize, rng: &mut SeededRng) -> MlpModel {
    let params: Vec<f64> = (0..mlp_param_count(d)).map(|_| rng.uniform_in(-1.5, 1.5)).collect();
    MlpModel::from_parts(
        params,
        FeatureScaler {
            min: vec![-1.0; d],
            max: vec![2.0; d],
        },
        TargetScaler { min: -4.0, max: 3.0 },
    )
    .unwrap()
}

fn random_rows(n: usize, d: usize, rng: &mut SeededRng) -> (Vec<Vec<f64>>, Vec<f64>) {
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.uniform_in(-1.0, 2.0)).collect())
        .collect();
    let y = (0..n).map(|_| rng.uniform_in(-4.0, 3.0)).collect();
    (x, y)
}

#[test]
fn backprop_matches_finite_differences() {
    let mut rng = SeededRng::new(99);
    let h = 1e-6;
    for d in 1..=3 {
        for _ in 0..5 {
            let model = random_model(d, &mut rng);
            let (x, y) = random_rows(7, d, &mut rng);
            let (_, grad) = model.loss_and_grad(&x, &y).unwrap();
            for k in 0..grad.len() {
                let mut p = model.params().to_vec();
                p[k] += h;
                let plus = MlpModel::from_parts(p.clone(), model.input_scaler().clone(), *model.output_scaler())
                    .unwrap()
                    .loss_and_grad(&x, &y)
                    .unwrap()
                    .0;
                p[k] -= 2.0 * h;
                let minus = MlpModel::from_parts(p, model.input_scaler().clone(), *model.output_scaler())
                    .unwrap()
                    .loss_and_grad(&x, &y)
                    .unwrap()
                    .0;
                let fd = (plus - minus) / (2.0 * h);
                let rel = (grad[k] - fd).abs() / fd.abs().max(grad[k].abs()).max(1e-3);
                assert!(rel <= 1e-5, "d={d} k={k}: {} vs {fd}", grad[k]);
            }
        }
    }
}

/// Independent forward pass with explicit matrices.
fn matrix_forward(model: &MlpModel, x: &[f64]) -> f64 {
    let d = model.n_inputs();
    let p = model.params();
    let s = model.input_scaler();
    let u: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(j, v)| (v - s.min[j]) / (s.max[j] - s.min[j]))
        .collect();
    let w1: Vec<&[f64]> = p[..10 * d].chunks(d).collect();
    let b1 = &p[10 * d..10 * d + 10];
    let w2: Vec<&[f64]> = p[10 * d + 10..10 * d + 40].chunks(10).collect();
    let b2 = &p[10 * d + 40..10 * d + 43];
    let w3 = &p[10 * d + 43..10 * d + 46];
    let b3 = p[10 * d + 46];
    let a1: Vec<f64> = (0..10)
        .map(|i| 1.0 / (1.0 + (-(b1[i] + (0..d).map(|k| w1[i][k] * u[k]).sum::<f64>())).exp()))
        .collect();
    let a2: Vec<f64> = (0..3)
        .map(|i| (b2[i] + (0..10).map(|k| w2[i][k] * a1[k]).sum::<f64>()).tanh())
        .collect();
    let out = b3 + (0..3).map(|k| w3[k] * a2[k]).sum::<f64>();
    let t = model.output_scaler();
    t.min + 0.5 * (out + 1.0) * (t.max - t.min)
}

#[test]
fn forward_matches_matrix_oracle() {
    let mut rng = SeededRng::new(5);
    for d in 1..=4 {
        let model = random_model(d, &mut rng);
        let (x, _) = random_rows(10, d, &mut rng);
        for row in &x {
            let a = model.predict(row).unwrap();
            let b = matrix_forward(&model, row);
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn jittered_constant_target_scores_near_zero() {
    let mut rng = SeededRng::new(12);
    let x: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64 / 59.0]).collect();
    let y: Vec<f64> = (0..60).map(|_| 3.0 + 1e-6 * rng.normal()).collect();
    let (model, _) = mlp_fit(
        &x,
        &y,
        &AnnConfig {
            epochs: 500,
            ..AnnConfig::default()
        },
    )
    .unwrap();
    let r2 = qsurrogate_core::metrics::r2_score(&y, &model.predict_many(&x).unwrap()).unwrap();
    assert!(r2.abs() < 0.2, "{r2}");
}
