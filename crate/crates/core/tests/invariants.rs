use proptest::prelude::*;
use qsurrogate_core::bench::{add_output_noise, grid_sample, normalize_inputs, Benchmark, NoiseSpec};
use qsurrogate_core::hardware::{required_two_qubit_error, survival_rate, HardwareProfile};
use qsurrogate_core::metrics::r2_score;
use qsurrogate_core::scaler::{FeatureScaler, TargetScaler};

fn non_constant(v: &[f64]) -> bool {
    v.iter().any(|x| (x - v[0]).abs() > 1e-3)
}

proptest! {
    #[test]
    fn r2_perfect_is_one(y in prop::collection::vec(-100.0f64..100.0, 2..40)) {
        prop_assume!(non_constant(&y));
        prop_assert_eq!(r2_score(&y, &y).unwrap(), 1.0);
    }

    #[test]
    fn r2_shift_invariant(
        pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30),
        c in -50.0f64..50.0,
    ) {
        let y: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let yh: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        prop_assume!(non_constant(&y));
        let a = r2_score(&y, &yh).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v + c).collect();
        let yhs: Vec<f64> = yh.iter().map(|v| v + c).collect();
        let b = r2_score(&ys, &yhs).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        prop_assert!(a <= 1.0);
    }

    #[test]
    fn feature_scaler_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..20)) {
        prop_assume!((0..3).all(|j| non_constant(&rows.iter().map(|r| r[j]).collect::<Vec<_>>())));
        let s = FeatureScaler::fit(&rows).unwrap();
        for r in &rows {
            let u = s.encode(r).unwrap();
            prop_assert!(u.iter().all(|v| (0.0..=1.0).contains(v)));
            let back = s.decode(&u).unwrap();
            for (a, b) in r.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()) * 1e3);
            }
        }
    }

    #[test]
    fn target_scaler_round_trip(y in prop::collection::vec(-1e3f64..1e3, 2..20)) {
        prop_assume!(non_constant(&y));
        let s = TargetScaler::fit(&y).unwrap();
        for &v in &y {
            let e = s.encode(v);
            prop_assert!((-1.0 - 1e-15..=1.0 + 1e-15).contains(&e));
            prop_assert!((s.decode(e) - v).abs() <= 1e-12 * 1e3);
        }
    }

    #[test]
    fn survival_decreases(
        e1 in 0.0f64..0.01, e2 in 0.0f64..0.05, er in 0.0f64..0.05,
        n in 2usize..20, l in 1usize..30, bump in 1e-4f64..1e-2,
    ) {
        let p = HardwareProfile::new("p", e1, e2, er).unwrap();
        let s = survival_rate(&p, n, l).unwrap();
        prop_assert!(s > 0.0 && s <= 1.0);
        prop_assert!(survival_rate(&p, n + 1, l).unwrap() < s);
        prop_assert!(survival_rate(&p, n, l + 1).unwrap() <= s);
        for q in [
            HardwareProfile::new("p", e1 + bump, e2, er).unwrap(),
            HardwareProfile::new("p", e1, e2 + bump, er).unwrap(),
            HardwareProfile::new("p", e1, e2, er + bump).unwrap(),
        ] {
            prop_assert!(survival_rate(&q, n, l).unwrap() < s);
        }
    }

    #[test]
    fn solve_inverts_survival(e2 in 1e-4f64..0.02, ratio in 0.5f64..3.0, n in 2usize..10, l in 1usize..20) {
        let p = HardwareProfile::new("p", 0.0004, e2, ratio * e2).unwrap();
        let s = survival_rate(&p, n, l).unwrap();
        let solved = required_two_qubit_error(s, n, l, 0.0004, ratio).unwrap();
        prop_assert!((solved - e2).abs() <= 1e-8);
    }

    #[test]
    fn styblinski_tang_is_symmetric(a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let f = Benchmark::StyblinskiTang;
        prop_assert_eq!(f.eval(&[a, b]), f.eval(&[b, a]));
    }

    #[test]
    fn griewank_product_term_is_positional(a in 0.5f64..5.0) {
        // cos(x_i / sqrt(i)) weights coordinates differently
        let f = Benchmark::Griewank;
        prop_assert!(f.eval(&[a, 0.0]) != f.eval(&[0.0, a]));
        prop_assert!(f.eval(&[a, -a]) == f.eval(&[-a, a]));
    }

    #[test]
    fn noise_is_reproducible(delta in 0.0f64..1.0, seed in any::<u64>()) {
        let ds = grid_sample(Benchmark::Griewank, -5.0, 5.0, 6, 2).unwrap();
        let spec = NoiseSpec { delta, seed };
        prop_assert_eq!(add_output_noise(&ds, spec).unwrap(), add_output_noise(&ds, spec).unwrap());
    }
}

#[test]
fn benchmark_reference_values() {
    let m = -2.903534;
    assert!((Benchmark::StyblinskiTang.eval(&[m, m]) + 78.33233).abs() < 1e-4);
    assert!((Benchmark::Schwefel.eval(&[0.0, 0.0]) - 837.9658).abs() < 1e-9);
    assert!(Benchmark::Schwefel.eval(&[420.9687, 420.9687]).abs() < 1e-3);
    assert_eq!(Benchmark::Griewank.eval(&[0.0, 0.0, 0.0]), 0.0);
    // 1 + 2*pi^2/4000 - cos(pi) cos(pi/sqrt 2)
    let g = Benchmark::Griewank.eval(&[std::f64::consts::PI, std::f64::consts::PI]);
    let expected = 1.0 + 2.0 * std::f64::consts::PI.powi(2) / 4000.0 + (std::f64::consts::PI / 2f64.sqrt()).cos();
    assert!((g - expected).abs() < 1e-12);
}

#[test]
fn normalized_grid_spans_unit_box() {
    for bench in Benchmark::ALL {
        let (lo, hi) = bench.default_interval();
        let ds = grid_sample(bench, lo, hi, 7, 3).unwrap();
        assert_eq!(ds.inputs.first().unwrap(), &vec![lo; 3]);
        assert_eq!(ds.inputs.last().unwrap(), &vec![hi; 3]);
        let (norm, _) = normalize_inputs(&ds).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = norm.inputs.iter().map(|r| r[j]).collect();
            assert_eq!(col.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
            assert_eq!(col.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
    }
}
