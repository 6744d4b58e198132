mod common;

use lowcorr::fractal::{
    basic_stats, box_count_dimension, lacunarity, multifractal_spectrum, shannon_entropy, ScaleGrid, ThresholdPolicy,
};
use lowcorr::pca::decompose_matrix;
use lowcorr::stats::{kolmogorov_q, ks_two_sample, two_sample_statistic};
use lowcorr::RealMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

/// Values k/16 keep affine maps with power-of-two scale exact.
fn quantized(side: usize) -> impl Strategy<Value = RealMatrix> {
    prop::collection::vec(0u8..=16, side * side)
        .prop_map(move |v| RealMatrix::new(side, side, v.into_iter().map(|k| k as f64 / 16.0).collect()).unwrap())
}

fn positive_measure(side: usize) -> impl Strategy<Value = RealMatrix> {
    prop::collection::vec(0.05f64..1.0, side * side).prop_map(move |v| RealMatrix::new(side, side, v).unwrap())
}

fn int_sample_of(min: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-6i32..=6).prop_map(f64::from), min..40)
}

fn int_sample() -> impl Strategy<Value = Vec<f64>> {
    int_sample_of(1)
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn pca_components_are_orthonormal(rows in 2usize..24, cols in 2usize..24, seed in any::<u64>()) {
        let pca = decompose_matrix(&common::random_matrix(rows, cols, seed)).unwrap();
        for i in 0..pca.component_count() {
            for j in 0..=i {
                let (a, b) = (pca.component(i), pca.component(j));
                let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-9, "<v{i}, v{j}> = {dot}");
            }
        }
    }

    #[test]
    fn pca_residual_energy_matches_discarded_eigenvalues(rows in 2usize..24, cols in 2usize..24, seed in any::<u64>()) {
        let x = common::random_matrix(rows, cols, seed);
        let pca = decompose_matrix(&x).unwrap();
        let lambda = pca.eigenvalues();
        prop_assert!(lambda.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(lambda.iter().all(|&l| l >= 0.0));
        let mut previous = f64::INFINITY;
        for n in 0..=pca.component_count() {
            let energy = pca.residual_of(&x, n).unwrap().data.frobenius_norm().powi(2);
            let discarded: f64 = lambda[n..].iter().sum::<f64>() * rows as f64;
            prop_assert!((energy - discarded).abs() <= 1e-9 * (1.0 + discarded));
            prop_assert!(energy <= previous + 1e-12);
            previous = energy;
        }
    }

    #[test]
    fn pca_pythagoras_and_trace(rows in 2usize..24, cols in 2usize..24, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let x = common::random_matrix(rows, cols, seed);
        let pca = decompose_matrix(&x).unwrap();
        let mean = pca.column_mean().to_vec();
        let total = RealMatrix::from_fn(rows, cols, |r, c| x.get(r, c) - mean[c]).frobenius_norm().powi(2);
        let trace: f64 = pca.eigenvalues().iter().sum();
        prop_assert!((trace * rows as f64 - total).abs() <= 1e-9 * total);

        let n = (frac * pca.component_count() as f64) as usize;
        let recon = pca.reconstruct(n).unwrap();
        let kept = RealMatrix::from_fn(rows, cols, |r, c| recon.get(r, c) - mean[c]).frobenius_norm().powi(2);
        let res = pca.residual_of(&x, n).unwrap().data.frobenius_norm().powi(2);
        prop_assert!((kept + res - total).abs() <= 1e-9 * total);
    }

    #[test]
    fn box_counts_match_enumeration(m in quantized(32), t in prop::sample::select(vec![0.25, 0.5, 0.75])) {
        let grid = ScaleGrid::powers_of_two(32).unwrap();
        let counts = box_count_dimension(&m, &grid, ThresholdPolicy::Positive).unwrap().counts;
        for (&eps, &n) in grid.scales().iter().zip(&counts) {
            prop_assert_eq!(n, common::brute_force_boxes(&m, eps, |v| v > 0.0));
        }
        let (lo, hi) = m.min_max();
        if hi > lo {
            let counts = box_count_dimension(&m, &grid, ThresholdPolicy::Fixed(t)).unwrap().counts;
            for (&eps, &n) in grid.scales().iter().zip(&counts) {
                prop_assert_eq!(n, common::brute_force_boxes(&m, eps, |v| (v - lo) / (hi - lo) > t));
            }
        }
    }

    #[test]
    fn fd_and_entropy_ignore_affine_rescaling(
        m in quantized(32),
        scale in prop::sample::select(vec![0.25, 0.5, 2.0, 8.0]),
        shift in prop::sample::select(vec![-3.0, 0.0, 1.0, 5.0]),
    ) {
        let grid = ScaleGrid::powers_of_two(32).unwrap();
        let moved = m.map(|v| v * scale + shift);
        let a = box_count_dimension(&m, &grid, ThresholdPolicy::Mean).unwrap();
        let b = box_count_dimension(&moved, &grid, ThresholdPolicy::Mean).unwrap();
        prop_assert_eq!(a.counts, b.counts);
        let (ea, eb) = (shannon_entropy(&m, 17).unwrap(), shannon_entropy(&moved, 17).unwrap());
        prop_assert!((ea - eb).abs() < 1e-12);
    }

    #[test]
    fn fd_lies_in_the_plane_range(m in quantized(32)) {
        let r = box_count_dimension(&m, &ScaleGrid::powers_of_two(32).unwrap(), ThresholdPolicy::Mean).unwrap();
        prop_assert!(r.fd >= -1e-12 && r.fd <= 2.0 + 1e-12, "fd = {}", r.fd);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.r2));
    }

    #[test]
    fn entropy_is_bounded(m in quantized(16), levels in 2usize..300) {
        let h = shannon_entropy(&m, levels).unwrap();
        prop_assert!(h >= 0.0 && h <= (levels as f64).log2() + 1e-12);
        prop_assert!(h <= (m.len() as f64).log2() + 1e-12);
    }

    #[test]
    fn lacunarity_ignores_mass_scale(m in positive_measure(32), c in 0.01f64..100.0) {
        let grid = ScaleGrid::powers_of_two(32).unwrap();
        let a = lacunarity(&m, &grid).unwrap();
        let b = lacunarity(&m.map(|v| v * c), &grid).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            let (x, y) = (x.unwrap(), y.unwrap());
            prop_assert!(x >= 1.0 - 1e-12);
            prop_assert!((x - y).abs() <= 1e-10 * x);
        }
    }

    #[test]
    fn multifractal_spectrum_is_consistent(m in positive_measure(32)) {
        let q: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.5).collect();
        let mfs = multifractal_spectrum(&m, &q, &ScaleGrid::powers_of_two(32).unwrap()).unwrap();
        let i1 = q.iter().position(|&v| v == 1.0).unwrap();
        let i0 = q.iter().position(|&v| v == 0.0).unwrap();
        prop_assert!(mfs.tau[i1].abs() < 1e-9);
        prop_assert!((mfs.d_q[i0] + mfs.tau[i0]).abs() < 1e-12);
        for i in 0..q.len() {
            prop_assert!((mfs.f_alpha[i] - (q[i] * mfs.alpha[i] - mfs.tau[i])).abs() < 1e-12);
        }
        for w in mfs.tau.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] <= 0.05, "tau not concave: {:?}", w);
        }
        for w in mfs.alpha.windows(2) {
            prop_assert!(w[1] <= w[0] + 0.05, "alpha rises: {:?}", w);
        }
    }

    #[test]
    fn basic_stats_match_naive_accumulation(m in positive_measure(12)) {
        let s = basic_stats(&m).unwrap();
        let (mean, var) = common::naive_mean_var(m.as_slice());
        prop_assert!((s.mean - mean).abs() < 1e-12);
        prop_assert!((s.std - var.max(0.0).sqrt()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn ks_matches_brute_force(a in int_sample(), b in int_sample()) {
        prop_assert_eq!(two_sample_statistic(&a, &b).unwrap(), common::brute_force_ks(&a, &b));
    }

    #[test]
    fn ks_is_symmetric(a in int_sample_of(2), b in int_sample_of(2)) {
        let (ab, ba) = (ks_two_sample(&a, &b).unwrap(), ks_two_sample(&b, &a).unwrap());
        prop_assert_eq!(ab.statistic_d, ba.statistic_d);
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-15);
    }

    #[test]
    fn ks_ignores_monotone_transforms(a in int_sample(), b in int_sample()) {
        let f = |v: &Vec<f64>| v.iter().map(|x| x * x * x + 2.0 * x).collect::<Vec<_>>();
        prop_assert_eq!(two_sample_statistic(&a, &b).unwrap(), two_sample_statistic(&f(&a), &f(&b)).unwrap());
    }

    #[test]
    fn ks_p_value_falls_as_lambda_grows(x in 0.0f64..4.0, dx in 0.0f64..1.0) {
        let (p, q) = (kolmogorov_q(x), kolmogorov_q(x + dx));
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(q <= p + 1e-12, "Q({x}) = {p} < Q({}) = {q}", x + dx);
    }
}
