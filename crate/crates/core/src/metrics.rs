//! Loss functions and support-recovery statistics against a known truth.

use std::collections::BTreeSet;

use ndarray::Array1;

use crate::dictionary::{DesignGrid, Dictionary, GroupPartition};
use crate::error::{Error, Result};

/// Empirical Kullback-Leibler divergence
/// `K(f0, f) = sum_i f0_i (e^{u_i} - u_i - 1)`, `u_i = log(f_i / f0_i)`.
pub fn empirical_kl(f0: &[f64], f: &[f64]) -> Result<f64> {
    if f0.len() != f.len() {
        return Err(Error::Dimension {
            expected: f0.len(),
            got: f.len(),
        });
    }
    let mut total = 0.0;
    for (&a, &b) in f0.iter().zip(f) {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!(
                "KL divergence needs positive values, got ({a}, {b})"
            )));
        }
        let u = (b / a).ln();
        // e^u - u - 1 without cancellation for small u.
        total += a * (u.exp_m1() - u);
    }
    Ok(total)
}

/// `||f_hat - f0||^2 / ||f0||^2` on the design points.
pub fn nmse(f_hat: &[f64], f0: &[f64]) -> Result<f64> {
    if f_hat.len() != f0.len() {
        return Err(Error::Dimension {
            expected: f0.len(),
            got: f_hat.len(),
        });
    }
    let denom: f64 = f0.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return Err(Error::Domain(
            "normalized MSE needs a nonzero reference".into(),
        ));
    }
    let num: f64 = f_hat.iter().zip(f0).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(num / denom)
}

/// Estimated and reference supports inside a universe of `size` indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSets {
    pub estimated: BTreeSet<usize>,
    pub reference: BTreeSet<usize>,
    pub size: usize,
}

impl SupportSets {
    pub fn new(
        estimated: impl IntoIterator<Item = usize>,
        reference: impl IntoIterator<Item = usize>,
        size: usize,
    ) -> Result<Self> {
        let estimated: BTreeSet<usize> = estimated.into_iter().collect();
        let reference: BTreeSet<usize> = reference.into_iter().collect();
        if let Some(j) = estimated.iter().chain(&reference).find(|j| **j >= size) {
            return Err(Error::Domain(format!(
                "support index {j} outside 0..{size}"
            )));
        }
        Ok(Self {
            estimated,
            reference,
            size,
        })
    }

    /// Maps coefficient supports to the groups they touch.
    pub fn to_groups(&self, groups: &GroupPartition) -> Self {
        let lift = |s: &BTreeSet<usize>| s.iter().map(|&j| groups.group_of(j)).collect();
        Self {
            estimated: lift(&self.estimated),
            reference: lift(&self.reference),
            size: groups.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportMetrics {
    pub accuracy: f64,
    /// `None` when the reference support is empty.
    pub sensitivity: Option<f64>,
    /// `None` when the reference support is everything.
    pub specificity: Option<f64>,
}

pub fn support_metrics(sets: &SupportSets) -> SupportMetrics {
    let true_pos = sets.estimated.intersection(&sets.reference).count();
    let est_neg_ref_neg = sets.size - sets.estimated.union(&sets.reference).count();
    let ref_pos = sets.reference.len();
    let ref_neg = sets.size - ref_pos;
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    SupportMetrics {
        accuracy: ratio(true_pos + est_neg_ref_neg, sets.size).unwrap_or(1.0),
        sensitivity: ratio(true_pos, ref_pos),
        specificity: ratio(est_neg_ref_neg, ref_neg),
    }
}

/// Relative magnitude below which a reference coefficient counts as null.
pub const REFERENCE_SUPPORT_THRESHOLD: f64 = 1e-8;

/// Coefficients of `log f0` on each system of the dictionary, computed
/// system by system as discrete inner products `(1/n) sum_i log f0(x_i) phi_j(x_i)`.
pub fn reference_coefficients(
    dict: &Dictionary,
    grid: &DesignGrid,
    log_f0: &[f64],
) -> Result<Array1<f64>> {
    if log_f0.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: log_f0.len(),
        });
    }
    let n = grid.len() as f64;
    Ok(dict
        .atoms()
        .iter()
        .map(|atom| {
            grid.points()
                .iter()
                .zip(log_f0)
                .map(|(&x, g)| atom.eval(x) * g)
                .sum::<f64>()
                / n
        })
        .collect())
}

/// Indices whose magnitude exceeds `REFERENCE_SUPPORT_THRESHOLD` times the largest.
pub fn reference_support(coefs: &Array1<f64>) -> Vec<usize> {
    let max = coefs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    coefs
        .iter()
        .enumerate()
        .filter(|(_, c)| max > 0.0 && c.abs() > REFERENCE_SUPPORT_THRESHOLD * max)
        .map(|(j, _)| j)
        .collect()
}
