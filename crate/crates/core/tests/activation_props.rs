mod common;

use common::{dense_spread, random_network, rel_close};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use wordassoc_core::{normalize_matrix, spread, spread_batch, ActivationMatrix, Norm, Normalization, SpreadParams};

fn retention() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.25), Just(0.5), Just(1.0), 0.0..=1.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_activation_is_conserved(seed in any::<u64>(), n in 2usize..80, r in retention(), steps in 1u32..60) {
        let mut rng = StdRng::seed_from_u64(seed);
        let net = random_network(&mut rng, n, n, 9);
        let init = n as f64;
        let params = SpreadParams::new(r, steps, init).unwrap();
        let a = spread(&net, net.label(0), &params).unwrap();
        let total: f64 = a.iter().sum();
        prop_assert!(rel_close(total, init, 1e-9), "total {total} vs {init}");
        prop_assert!(a.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn spread_is_linear_in_initial_activation(seed in any::<u64>(), n in 2usize..40, r in retention(), c in 0.01f64..100.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let net = random_network(&mut rng, n, n / 2, 9);
        let base = SpreadParams::new(r, 15, 1.0).unwrap();
        let scaled = SpreadParams { initial_activation: c, ..base };
        let a = spread(&net, net.label(n - 1), &base).unwrap();
        let b = spread(&net, net.label(n - 1), &scaled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((c * x - y).abs() <= 1e-12 * c.max(1.0));
        }
    }

    #[test]
    fn sparse_spread_matches_dense_power(seed in any::<u64>(), n in 2usize..30, r in retention(), steps in 1u32..40) {
        let mut rng = StdRng::seed_from_u64(seed);
        let net = random_network(&mut rng, n, n, 9);
        let params = SpreadParams::new(r, steps, n as f64).unwrap();
        let src = n / 2;
        let sparse = spread(&net, net.label(src), &params).unwrap();
        let dense = dense_spread(&net, src, &params);
        for (x, y) in sparse.iter().zip(&dense) {
            prop_assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn long_runs_reach_the_strength_distribution(seed in any::<u64>(), n in 2usize..25, r in 0.1f64..0.9) {
        let mut rng = StdRng::seed_from_u64(seed);
        let net = random_network(&mut rng, n, n, 9);
        let init = n as f64;
        let params = SpreadParams::new(r, 20_000, init).unwrap();
        let a = spread(&net, net.label(0), &params).unwrap();
        let total: f64 = net.strengths().iter().sum();
        for (j, x) in a.iter().enumerate() {
            let expected = init * net.strength(j) / total;
            prop_assert!((x - expected).abs() < 1e-6, "node {j}: {x} vs {expected}");
        }
    }

    #[test]
    fn normalization_ignores_processing_order(
        rows in 1usize..12,
        cols in 1usize..6,
        seed in any::<u64>(),
        l2 in any::<bool>(),
    ) {
        use rand::Rng;
        let mut rng = StdRng::seed_from_u64(seed);
        let values: Vec<f64> = (0..rows * cols)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..10.0) })
            .collect();
        let labels = |p: &str, k: usize| (0..k).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let m = ActivationMatrix::from_parts(labels("n", rows), labels("p", cols), values.clone(), Normalization::Raw).unwrap();
        let norm = if l2 { Norm::L2 } else { Norm::L1 };
        let out = normalize_matrix(&m, norm).unwrap();
        prop_assert_eq!(&out, &normalize_matrix(&m, norm).unwrap());

        // Oracle: columns right to left, then rows bottom to top.
        let size = |xs: &mut dyn Iterator<Item = f64>| -> f64 {
            if l2 { xs.map(|x| x * x).sum::<f64>().sqrt() } else { xs.map(f64::abs).sum() }
        };
        let mut v = values;
        for c in (0..cols).rev() {
            let s = size(&mut (0..rows).map(|r| v[r * cols + c]));
            if s > 0.0 {
                for r in 0..rows { v[r * cols + c] /= s; }
            }
        }
        for r in (0..rows).rev() {
            let s = size(&mut v[r * cols..(r + 1) * cols].iter().copied());
            if s > 0.0 {
                for c in 0..cols { v[r * cols + c] /= s; }
            }
        }
        prop_assert_eq!(out.values(), &v[..]);
    }
}

#[test]
fn batch_columns_equal_single_spreads() {
    let mut rng = StdRng::seed_from_u64(5);
    let net = random_network(&mut rng, 60, 90, 9);
    let params = SpreadParams::defaults_for(&net).unwrap();
    let primes: Vec<&str> = (0..60).step_by(7).map(|i| net.label(i)).collect();
    let m = spread_batch(&net, &primes, &params).unwrap();
    for (k, p) in primes.iter().enumerate() {
        let single = spread(&net, p, &params).unwrap();
        assert_eq!(m.column(k).collect::<Vec<_>>(), single);
    }
}
