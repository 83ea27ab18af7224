//! Monte-Carlo check of the concentration events the weights are built to control.

use ndarray::Array1;
use rayon::prelude::*;

use super::{group_weights_with, lasso_weights_from_vhat, vhat, GroupGeometry, WeightConfig};
use crate::dictionary::{DesignMatrix, GroupPartition};
use crate::error::{Error, Result};
use crate::simulation::sample_counts;

/// How thresholds are obtained for each simulated replicate.
#[derive(Debug, Clone)]
pub enum ThresholdRule<'a> {
    /// Lasso weights recomputed from each replicate.
    Lasso(WeightConfig),
    /// Group weights recomputed from each replicate.
    Group {
        groups: &'a GroupPartition,
        cfg: WeightConfig,
    },
    /// Fixed per-coefficient thresholds.
    FixedLasso(Array1<f64>),
    /// Fixed per-group thresholds.
    FixedGroup {
        groups: &'a GroupPartition,
        lambda: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    /// Per coefficient (Lasso rules) or per group, the fraction of
    /// replicates where the noise statistic reached its threshold.
    pub frequencies: Vec<f64>,
    pub replicates: usize,
    /// Guaranteed exceedance probability, `3/p^gamma` (Lasso) or
    /// `2/p^gamma` (group); `None` for fixed thresholds.
    pub bound: Option<f64>,
}

impl CoverageReport {
    /// `bound + z sqrt(q (1 - q) / R)` with `q` the bound.
    pub fn tolerance(&self, z: f64) -> Option<f64> {
        let q = self.bound?;
        let r = self.replicates.max(1) as f64;
        Some(q + z * (q * (1.0 - q) / r).sqrt())
    }

    pub fn max_frequency(&self) -> f64 {
        self.frequencies.iter().fold(0.0, |m, f| m.max(*f))
    }
}

/// `3/p^gamma` for the Lasso, `2/p^gamma` for groups.
pub fn theoretical_bound(constant: f64, p: usize, gamma: f64) -> f64 {
    constant / (p as f64).powf(gamma)
}

/// Draws `replicates` count vectors with mean `expected` (seed `seed + r`
/// for replicate `r`) and records, per index, how often
/// `|A_j^T (Y - E Y)| >= lambda_j` (or the group norm version) occurs.
pub fn coverage_check(
    rule: &ThresholdRule<'_>,
    a: &DesignMatrix,
    expected: &Array1<f64>,
    replicates: usize,
    seed: u64,
) -> Result<CoverageReport> {
    if expected.len() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: expected.len(),
        });
    }
    let p_eff = |cfg: &WeightConfig| cfg.p.unwrap_or(a.ncols());
    let (len, bound, geometry) = match rule {
        ThresholdRule::Lasso(cfg) => {
            cfg.gamma_log_p(a.ncols())?;
            (
                a.ncols(),
                Some(theoretical_bound(3.0, p_eff(cfg), cfg.gamma)),
                None,
            )
        }
        ThresholdRule::Group { groups, cfg } => {
            cfg.gamma_log_p(a.ncols())?;
            let geometry = GroupGeometry::new(a, groups, cfg.operator_method)?;
            (
                groups.len(),
                Some(theoretical_bound(2.0, p_eff(cfg), cfg.gamma)),
                Some(geometry),
            )
        }
        ThresholdRule::FixedLasso(lambda) => {
            if lambda.len() != a.ncols() {
                return Err(Error::Dimension {
                    expected: a.ncols(),
                    got: lambda.len(),
                });
            }
            (a.ncols(), None, None)
        }
        ThresholdRule::FixedGroup { groups, lambda } => {
            if lambda.len() != groups.len() || groups.dim() != a.ncols() {
                return Err(Error::Dimension {
                    expected: groups.len(),
                    got: lambda.len(),
                });
            }
            (groups.len(), None, None)
        }
    };

    let exceed = |r: usize| -> Result<Vec<bool>> {
        let y = sample_counts(expected, seed.wrapping_add(r as u64))?;
        let noise = a.tmul(&(&y - expected));
        let group_norms = |groups: &GroupPartition| -> Vec<f64> {
            groups
                .iter()
                .map(|g| g.iter().map(|&j| noise[j] * noise[j]).sum::<f64>().sqrt())
                .collect()
        };
        Ok(match rule {
            ThresholdRule::Lasso(cfg) => {
                let w = lasso_weights_from_vhat(a, vhat(a, &y)?, cfg)?;
                noise
                    .iter()
                    .zip(&w.lambda)
                    .map(|(z, l)| z.abs() >= *l)
                    .collect()
            }
            ThresholdRule::Group { groups, cfg } => {
                let max_y = y.iter().fold(0.0_f64, |m, v| m.max(*v));
                let geometry = geometry.as_ref().expect("geometry built for group rules");
                let w = group_weights_with(a, &vhat(a, &y)?, max_y, groups, geometry, cfg)?;
                group_norms(groups)
                    .iter()
                    .zip(&w.lambda)
                    .map(|(z, l)| *z >= *l)
                    .collect()
            }
            ThresholdRule::FixedLasso(lambda) => noise
                .iter()
                .zip(lambda)
                .map(|(z, l)| z.abs() >= *l)
                .collect(),
            ThresholdRule::FixedGroup { groups, lambda } => group_norms(groups)
                .iter()
                .zip(lambda)
                .map(|(z, l)| *z >= *l)
                .collect(),
        })
    };

    let counts = (0..replicates)
        .into_par_iter()
        .map(exceed)
        .try_fold(
            || vec![0usize; len],
            |mut acc, hits| {
                for (a, h) in acc.iter_mut().zip(hits?) {
                    *a += usize::from(h);
                }
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![0usize; len],
            |mut x, y| {
                for (a, b) in x.iter_mut().zip(y) {
                    *a += b;
                }
                Ok(x)
            },
        )?;
    let frequencies = if replicates == 0 {
        Vec::new()
    } else {
        counts
            .into_iter()
            .map(|c| c as f64 / replicates as f64)
            .collect()
    };
    Ok(CoverageReport {
        frequencies,
        replicates,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_haar, DesignGrid};

    fn haar16() -> DesignMatrix {
        let grid = DesignGrid::midpoints(16).unwrap();
        build_haar(&grid, 4).unwrap().evaluate(&grid).unwrap()
    }

    #[test]
    fn infinite_thresholds_never_exceeded() {
        let a = haar16();
        let mean = Array1::from_elem(16, 5.0);
        let rule = ThresholdRule::FixedLasso(Array1::from_elem(16, f64::INFINITY));
        let rep = coverage_check(&rule, &a, &mean, 50, 3).unwrap();
        assert!(rep.frequencies.iter().all(|f| *f == 0.0));
        assert!(rep.bound.is_none());
    }

    #[test]
    fn zero_thresholds_always_exceeded() {
        let a = haar16();
        let mean = Array1::from_elem(16, 5.0);
        let groups = GroupPartition::singletons(16);
        let rule = ThresholdRule::FixedGroup {
            groups: &groups,
            lambda: vec![0.0; 16],
        };
        let rep = coverage_check(&rule, &a, &mean, 50, 3).unwrap();
        assert!(rep.frequencies.iter().all(|f| *f == 1.0));
    }

    #[test]
    fn no_replicates_gives_empty_table() {
        let a = haar16();
        let mean = Array1::from_elem(16, 5.0);
        let rep = coverage_check(
            &ThresholdRule::Lasso(WeightConfig::default()),
            &a,
            &mean,
            0,
            1,
        )
        .unwrap();
        assert!(rep.frequencies.is_empty());
    }

    #[test]
    fn bounds_by_arithmetic() {
        assert!((theoretical_bound(3.0, 256, 1.5) - 3.0 / 4096.0).abs() < 1e-18);
        assert!((theoretical_bound(2.0, 256, 1.5) - 4.8828125e-4).abs() < 1e-15);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = haar16();
        let mean = Array1::from_iter((0..16).map(|i| 1.0 + i as f64));
        let rule = ThresholdRule::FixedLasso(Array1::from_elem(16, 6.0));
        let r1 = coverage_check(&rule, &a, &mean, 40, 9).unwrap();
        let r2 = coverage_check(&rule, &a, &mean, 40, 9).unwrap();
        assert_eq!(r1, r2);
    }
}
