//! Weight formulas recomputed directly from the count vector and the
//! design, independently of the library's intermediate quantities.

use nalgebra::DMatrix;
use ndarray::Array1;
use poisson_dict::dictionary::{
    group_by_scale, DesignGrid, DesignMatrix, DictionarySpec, GroupPartition,
};
use poisson_dict::simulation::{dj_intensity, sample_counts, Shape};
use poisson_dict::weights::{
    group_weights, lasso_weights, naive_group_weights, IntensityBound, VarianceMode, WeightConfig,
};
use proptest::prelude::*;

fn setup(
    n: usize,
    levels: u32,
    seed: u64,
) -> (
    poisson_dict::dictionary::Dictionary,
    DesignMatrix,
    Array1<f64>,
) {
    let grid = DesignGrid::midpoints(n).unwrap();
    let dict = format!("haar:J={levels}")
        .parse::<DictionarySpec>()
        .unwrap()
        .build(&grid)
        .unwrap();
    let a = dict.evaluate(&grid).unwrap();
    let f0 = Array1::from(dj_intensity(Shape::Heavisine, &grid, 4.0));
    let y = sample_counts(&f0, seed).unwrap();
    (dict, a, y)
}

fn col_stats(a: &DesignMatrix, y: &Array1<f64>, j: usize) -> (f64, f64) {
    let col = a.column(j);
    let vhat: f64 = col.iter().zip(y).map(|(phi, y)| phi * phi * y).sum();
    let max_abs = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (vhat, max_abs)
}

#[test]
fn lasso_weights_match_closed_form() {
    let (_, a, y) = setup(64, 6, 3);
    let p = a.ncols() as f64;
    for gamma in [1.01, 1.5, 3.0] {
        let u = gamma * p.ln();
        for mode in [
            VarianceMode::Tilde,
            VarianceMode::Hat,
            VarianceMode::Practical,
        ] {
            let w = lasso_weights(
                &a,
                &y,
                &WeightConfig::default().with_gamma(gamma).with_mode(mode),
            )
            .unwrap();
            for j in 0..a.ncols() {
                let (vhat, m) = col_stats(&a, &y, j);
                let v = match mode {
                    VarianceMode::Tilde => vhat + (2.0 * u * vhat * m * m).sqrt() + 3.0 * u * m * m,
                    _ => vhat,
                };
                let expected = (2.0 * u * v).sqrt() + u / 3.0 * m;
                assert!(
                    (w.lambda[j] - expected).abs() <= 1e-12 * expected,
                    "{mode:?} gamma={gamma} j={j}"
                );
            }
        }
    }
}

fn spectral_norm_sq(a: &DesignMatrix, g: &[usize]) -> f64 {
    let sub = a.submatrix(g);
    let m = DMatrix::from_fn(sub.nrows(), sub.ncols(), |i, j| sub[[i, j]]);
    (m.transpose() * &m).symmetric_eigen().eigenvalues.max()
}

#[test]
fn group_weights_match_closed_form() {
    let (dict, a, y) = setup(64, 6, 5);
    let p = a.ncols() as f64;
    let gamma = 1.01;
    let u = gamma * p.ln();
    let bound = 40.0;
    for size in [1usize, 2, 4, 8] {
        let groups = group_by_scale(&dict, size).unwrap();
        for mode in [
            VarianceMode::Tilde,
            VarianceMode::Hat,
            VarianceMode::Practical,
        ] {
            let mut cfg = WeightConfig::default().with_gamma(gamma).with_mode(mode);
            cfg.intensity_bound = IntensityBound::Fixed(bound);
            let w = group_weights(&a, &y, &groups, &cfg).unwrap();
            for (k, g) in groups.iter().enumerate() {
                let ug = u + (g.len() as f64).ln();
                let b_sq = (0..a.nrows())
                    .map(|i| g.iter().map(|&j| a.matrix()[[i, j]].powi(2)).sum::<f64>())
                    .fold(0.0, f64::max);
                let d = 8.0 * bound * spectral_norm_sq(&a, g) + 16.0 * b_sq * u;
                let mut vhat_sum = 0.0;
                let mut vtilde_sum = 0.0;
                for &j in g {
                    let (vhat, m) = col_stats(&a, &y, j);
                    vhat_sum += vhat;
                    vtilde_sum += vhat + (2.0 * ug * vhat * m * m).sqrt() + 3.0 * ug * m * m;
                }
                let expected = match mode {
                    VarianceMode::Tilde => {
                        (1.0 + 1.0 / (2.0 * (2.0 * u).sqrt())) * vtilde_sum.sqrt()
                            + 2.0 * (u * d).sqrt()
                    }
                    VarianceMode::Hat => vhat_sum.sqrt() + 2.0 * (u * d).sqrt(),
                    // An empty group would get a zero weight; it falls back
                    // to the heavy-tail term alone.
                    VarianceMode::Practical if vhat_sum == 0.0 => u / 3.0 * b_sq.sqrt(),
                    VarianceMode::Practical => 2.0 * vhat_sum.sqrt(),
                };
                assert!(
                    (w.lambda[k] - expected).abs() <= 1e-8 * expected,
                    "{mode:?} size={size} k={k}: {} vs {expected}",
                    w.lambda[k]
                );
            }
        }
    }
}

#[test]
fn naive_weights_are_root_sum_of_squares() {
    let (dict, a, y) = setup(64, 6, 7);
    let lasso = lasso_weights(&a, &y, &WeightConfig::default()).unwrap();
    let groups = group_by_scale(&dict, 4).unwrap();
    let naive = naive_group_weights(&lasso, &groups);
    for (k, g) in groups.iter().enumerate() {
        let direct: f64 = g
            .iter()
            .map(|&j| lasso.lambda[j] * lasso.lambda[j])
            .sum::<f64>()
            .sqrt();
        assert!((naive[k] - direct).abs() <= 1e-12 * direct);
    }
    let singletons = naive_group_weights(&lasso, &GroupPartition::singletons(a.ncols()));
    assert_eq!(singletons, lasso.lambda.to_vec());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inflated_variance_dominates(seed in 0u64..10_000, gamma in 1.0f64..4.0) {
        let (_, a, y) = setup(32, 5, seed);
        let cfg = WeightConfig::default().with_gamma(gamma);
        let tilde = lasso_weights(&a, &y, &cfg).unwrap();
        let hat = lasso_weights(&a, &y, &cfg.with_mode(VarianceMode::Hat)).unwrap();
        for j in 0..a.ncols() {
            prop_assert!(tilde.vtilde[j] >= tilde.vhat[j]);
            prop_assert!(tilde.lambda[j] >= hat.lambda[j]);
            prop_assert!(hat.lambda[j] > 0.0);
        }
        let higher = lasso_weights(&a, &y, &cfg.with_gamma(gamma + 0.5)).unwrap();
        for j in 0..a.ncols() {
            prop_assert!(higher.lambda[j] >= tilde.lambda[j]);
        }
    }
}
