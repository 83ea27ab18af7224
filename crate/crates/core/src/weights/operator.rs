//! The group operator constant `c_k` and the row-norm constants `b_k`.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::dictionary::{DesignMatrix, GroupPartition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OperatorMethod {
    /// Largest singular value of the group submatrix (power iteration).
    #[default]
    Exact,
    /// `sqrt(max_j sum_j' |<A_j, A_j'>|)`, an upper bound on the exact value.
    CoherenceBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            rel_tol: 1e-10,
        }
    }
}

/// Largest eigenvalue of a symmetric positive semi-definite matrix.
///
/// Starts from the normalized row-sum vector, nudged by a fixed irregular
/// vector so it cannot sit exactly on a lower eigenvector, and stops when
/// successive Rayleigh quotients agree to `rel_tol`.
pub fn top_eigenvalue(gram: &Array2<f64>, opts: PowerIteration) -> Result<f64> {
    let m = gram.nrows();
    if m == 1 {
        return Ok(gram[[0, 0]]);
    }
    let mut v: Array1<f64> = gram.sum_axis(Axis(1));
    let scale = v
        .dot(&v)
        .sqrt()
        .max(gram.diag().iter().fold(0.0_f64, |a, b| a.max(b.abs())));
    for (i, vi) in v.iter_mut().enumerate() {
        *vi += 1e-2 * scale * (1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract());
    }
    let mut norm = v.dot(&v).sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    v /= norm;
    let mut rayleigh = f64::NAN;
    for _ in 0..opts.max_iter {
        let w = gram.dot(&v);
        let next = v.dot(&w);
        norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = w / norm;
        if (next - rayleigh).abs() <= opts.rel_tol * next.abs() {
            return Ok(next);
        }
        rayleigh = next;
    }
    Err(Error::NoConvergence { cap: opts.max_iter })
}

/// `c_k = sup_x ||A_G A_G^T x|| / ||A_G^T x||`, the spectral norm of `A_G`.
pub fn operator_constant(sub: &Array2<f64>, method: OperatorMethod) -> Result<f64> {
    if sub.ncols() == 1 {
        let col = sub.column(0);
        return Ok(col.dot(&col).sqrt());
    }
    let gram = sub.t().dot(sub);
    match method {
        OperatorMethod::Exact => Ok(top_eigenvalue(&gram, PowerIteration::default())?
            .max(0.0)
            .sqrt()),
        OperatorMethod::CoherenceBound => Ok(coherence_bound_sq(&gram).sqrt()),
    }
}

/// `max_j sum_j' |G_jj'|` for the Gram matrix `G = A_G^T A_G`.
pub fn coherence_bound_sq(gram: &Array2<f64>) -> f64 {
    gram.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Per-group `b_k^i = sqrt(sum_{j in G_k} phi_j(x_i)^2)` and `b_k = max_i b_k^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNorms {
    pub b: Vec<f64>,
    pub rows: Vec<Array1<f64>>,
}

pub fn block_norms(a: &DesignMatrix, groups: &GroupPartition) -> BlockNorms {
    let rows: Vec<Array1<f64>> = groups
        .iter()
        .map(|g| {
            let sub = a.submatrix(g);
            sub.map_axis(Axis(1), |r| r.dot(&r).sqrt())
        })
        .collect();
    let b = rows
        .iter()
        .map(|r| r.iter().fold(0.0_f64, |m, v| m.max(*v)))
        .collect();
    BlockNorms { b, rows }
}

/// The data-independent part of the group weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupGeometry {
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub method: OperatorMethod,
}

impl GroupGeometry {
    pub fn new(a: &DesignMatrix, groups: &GroupPartition, method: OperatorMethod) -> Result<Self> {
        if groups.dim() != a.ncols() {
            return Err(Error::Dimension {
                expected: a.ncols(),
                got: groups.dim(),
            });
        }
        let b = block_norms(a, groups).b;
        let c = groups
            .iter()
            .map(|g| operator_constant(&a.submatrix(g), method))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { b, c, method })
    }
}
