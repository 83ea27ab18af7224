//! Half-fold cross-validation of a single Lasso level with scale-dependent
//! thresholds `2^{s/2} lambda`.

use ndarray::Array1;

use crate::dictionary::{DesignGrid, Dictionary};
use crate::error::{Error, Result};
use crate::solver::{fit, FitConfig, FitResult, PenalizedProblem, Penalty};

/// Number of candidates in the default grid.
pub const DEFAULT_GRID_LEN: usize = 20;
/// Smallest default candidate as a fraction of the reference level.
pub const DEFAULT_GRID_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub lambda: f64,
    /// Candidates in the order they were scored (decreasing).
    pub grid: Vec<f64>,
    /// Symmetrized held-out deviance of each candidate.
    pub scores: Vec<f64>,
    /// Refit on all observations at the selected level.
    pub fit: FitResult,
}

/// `2^{s_j / 2}` for each atom.
pub fn scale_factors(dict: &Dictionary) -> Array1<f64> {
    dict.atoms()
        .iter()
        .map(|a| 2f64.powf(f64::from(a.scale()) / 2.0))
        .collect()
}

/// Poisson deviance `2 sum [y log(y / mu) - (y - mu)]`, with `0 log 0 = 0`.
pub fn poisson_deviance(y: &[f64], mu: &[f64]) -> f64 {
    2.0 * y
        .iter()
        .zip(mu)
        .map(|(&y, &m)| {
            if y > 0.0 {
                y * (y / m).ln() - (y - m)
            } else {
                m
            }
        })
        .sum::<f64>()
}

/// Smallest `lambda` at which `beta = 0` satisfies the optimality conditions.
pub fn reference_lambda(dict: &Dictionary, grid: &DesignGrid, y: &Array1<f64>) -> Result<f64> {
    let a = dict.evaluate(grid)?;
    let grad = a.tmul(&y.mapv(|v| v - 1.0));
    Ok(grad
        .iter()
        .zip(&scale_factors(dict))
        .fold(0.0, |m, (g, s)| m.max(g.abs() / s)))
}

/// `len` geometric values from `lambda_ref` down to `floor * lambda_ref`.
pub fn default_grid(lambda_ref: f64, len: usize, floor: f64) -> Vec<f64> {
    if len <= 1 {
        return vec![lambda_ref];
    }
    let ratio = floor.powf(1.0 / (len - 1) as f64);
    (0..len)
        .map(|k| lambda_ref * ratio.powi(k as i32))
        .collect()
}

/// Predicts held-out points from the fitted log-intensity of the other half
/// by averaging its two neighbours (one at the ends).
fn interpolate(train: &[f64], train_is_even: bool, n: usize) -> Vec<f64> {
    let half = train.len();
    (0..n / 2)
        .map(|k| {
            // Held-out index i has training neighbours i - 1 and i + 1.
            let (left, right) = if train_is_even {
                (Some(k), (k + 1 < half).then_some(k + 1))
            } else {
                (k.checked_sub(1), Some(k))
            };
            match (left, right) {
                (Some(l), Some(r)) => 0.5 * (train[l] + train[r]),
                (Some(i), None) | (None, Some(i)) => train[i],
                (None, None) => unreachable!("halves are nonempty"),
            }
        })
        .collect()
}

fn split(y: &Array1<f64>) -> (Array1<f64>, Array1<f64>) {
    let even = y.iter().copied().step_by(2).collect();
    let odd = y.iter().copied().skip(1).step_by(2).collect();
    (even, odd)
}

/// Fits on even points, scores on odd ones and vice versa for each
/// candidate (warm-started along the decreasing grid), keeps the minimizer
/// of the summed deviance (first on ties) and refits on all points.
pub fn half_fold_cv_threshold(
    y: &Array1<f64>,
    dict: &Dictionary,
    grid: &DesignGrid,
    lambda_grid: Option<&[f64]>,
    config: &FitConfig,
) -> Result<CvOutcome> {
    let n = y.len();
    if n != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: n,
        });
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Shape(format!(
            "half-fold cross-validation needs a power-of-two length, got {n}"
        )));
    }
    let mut candidates = match lambda_grid {
        Some(g) => g.to_vec(),
        None => default_grid(
            reference_lambda(dict, grid, y)?,
            DEFAULT_GRID_LEN,
            DEFAULT_GRID_FLOOR,
        ),
    };
    if candidates.is_empty() {
        return Err(Error::Config(
            "cross-validation needs at least one candidate level".into(),
        ));
    }
    if let Some(bad) = candidates.iter().find(|l| l.is_nan() || **l < 0.0) {
        return Err(Error::Config(format!(
            "candidate levels must be nonnegative, got {bad}"
        )));
    }
    candidates.sort_by(|a, b| b.total_cmp(a));

    let factors = scale_factors(dict);
    let thresholds = |lambda: f64| {
        factors.mapv(|s| {
            if lambda.is_infinite() {
                f64::INFINITY
            } else {
                s * lambda
            }
        })
    };
    let (y_even, y_odd) = split(y);
    let a_even = dict.evaluate(&grid.even_half())?;
    let a_odd = dict.evaluate(&grid.odd_half())?;

    let mut warm: [Option<Vec<f64>>; 2] = [None, None];
    let mut scores = Vec::with_capacity(candidates.len());
    for &lambda in &candidates {
        let mut score = 0.0;
        for (slot, (a_train, y_train, y_test, train_is_even)) in [
            (&a_even, &y_even, &y_odd, true),
            (&a_odd, &y_odd, &y_even, false),
        ]
        .into_iter()
        .enumerate()
        {
            let problem =
                PenalizedProblem::new(a_train, y_train, Penalty::Lasso(thresholds(lambda)))?;
            let cfg = FitConfig {
                initial: warm[slot].take(),
                ..config.clone()
            };
            let res = fit(&problem, &cfg)?;
            let eta = interpolate(
                res.fitted_log_intensity.as_slice().expect("contiguous"),
                train_is_even,
                n,
            );
            let mu: Vec<f64> = eta.iter().map(|e| e.exp()).collect();
            score += poisson_deviance(y_test.as_slice().expect("contiguous"), &mu);
            warm[slot] = (!res.degenerate).then(|| res.beta.to_vec());
        }
        scores.push(score);
    }
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |best, (k, s)| if *s < scores[best] { k } else { best });
    let lambda = candidates[best];
    let a = dict.evaluate(grid)?;
    let problem = PenalizedProblem::new(&a, y, Penalty::Lasso(thresholds(lambda)))?;
    let fit = fit(&problem, config)?;
    Ok(CvOutcome {
        lambda,
        grid: candidates,
        scores,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::build_haar;
    use approx::assert_relative_eq;

    #[test]
    fn deviance_examples() {
        assert_eq!(poisson_deviance(&[2.0, 0.0], &[2.0, 0.0]), 0.0);
        assert_relative_eq!(poisson_deviance(&[0.0], &[1.5]), 3.0);
        assert_relative_eq!(
            poisson_deviance(&[1.0], &[std::f64::consts::E]),
            2.0 * (-1.0 - 1.0 + std::f64::consts::E)
        );
    }

    #[test]
    fn neighbour_interpolation() {
        // Training on even points 0, 2, 4, 6 predicts 1, 3, 5, 7.
        assert_eq!(
            interpolate(&[0.0, 2.0, 4.0, 6.0], true, 8),
            vec![1.0, 3.0, 5.0, 6.0]
        );
        // Training on odd points 1, 3, 5, 7 predicts 0, 2, 4, 6.
        assert_eq!(
            interpolate(&[1.0, 3.0, 5.0, 7.0], false, 8),
            vec![1.0, 2.0, 4.0, 6.0]
        );
    }

    #[test]
    fn geometric_grid() {
        let g = default_grid(100.0, 3, 0.01);
        assert_relative_eq!(g[1], 10.0, epsilon = 1e-12);
        assert_relative_eq!(g[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_and_infinite_candidates() {
        let grid = DesignGrid::midpoints(16).unwrap();
        let dict = build_haar(&grid, 3).unwrap();
        let y = Array1::from_iter((0..16).map(|i| (i % 5) as f64 + 1.0));
        let cfg = FitConfig::default();
        let one = half_fold_cv_threshold(&y, &dict, &grid, Some(&[2.5]), &cfg).unwrap();
        assert_eq!(one.lambda, 2.5);
        let inf = half_fold_cv_threshold(&y, &dict, &grid, Some(&[f64::INFINITY]), &cfg).unwrap();
        assert!(inf.scores[0].is_finite());
        assert!(inf.fit.beta.iter().all(|b| *b == 0.0));
        assert!(half_fold_cv_threshold(&y, &dict, &grid, Some(&[]), &cfg).is_err());
    }
}
