//! Data-driven penalty weights.
//!
//! Lasso weights control `|A_j^T (Y - E Y)|` with probability at least
//! `1 - 3 p^-gamma` per coefficient:
//!
//! ```text
//! lambda_j = sqrt(2 gamma log p V~_j) + (gamma log p / 3) max_i |phi_j(x_i)|
//! V~_j     = V^_j + sqrt(2 gamma log p V^_j max_i phi_j^2) + 3 gamma log p max_i phi_j^2
//! V^_j     = sum_i phi_j(x_i)^2 Y_i
//! ```
//!
//! Group weights control `||A_G^T (Y - E Y)||_2` with probability at least
//! `1 - 2 p^-gamma` per group:
//!
//! ```text
//! lambda_k = (1 + 1/(2 sqrt(2 gamma log p))) sqrt(sum_{j in G_k} V~g_j) + 2 sqrt(gamma log p D_k)
//! D_k      = 8 M c_k^2 + 16 b_k^2 gamma log p
//! ```
//!
//! where `V~g_j` replaces `gamma log p` by `gamma log p + log |G_k|` in `V~_j`.

mod coverage;
mod operator;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

pub use coverage::{coverage_check, CoverageReport, ThresholdRule};
pub use operator::{
    block_norms, coherence_bound_sq, operator_constant, top_eigenvalue, BlockNorms, GroupGeometry,
    OperatorMethod, PowerIteration,
};

use crate::dictionary::{DesignMatrix, GroupPartition};
use crate::error::{Error, Result};

/// Which variance proxy enters the weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMode {
    /// Inflated proxies `V~_j`, `V~g_j`: the calibrated weights.
    Tilde,
    /// `V^_j` in place of the inflated proxies; the group weight keeps the
    /// `D_k` term and drops the leading `1 + 1/(2 sqrt(2 gamma log p))`.
    Hat,
    /// As `Hat` for the Lasso; group weights are `2 sqrt(sum_{G_k} V^_j)`.
    Practical,
}

impl VarianceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Tilde => "tilde",
            Self::Hat => "hat",
            Self::Practical => "practical",
        }
    }
}

impl std::str::FromStr for VarianceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tilde" => Ok(Self::Tilde),
            "hat" => Ok(Self::Hat),
            "practical" => Ok(Self::Practical),
            _ => Err(Error::Config(format!("unknown weight mode `{s}`"))),
        }
    }
}

/// Upper bound `M` on the intensity used by the group weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntensityBound {
    /// `max_i Y_i`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub gamma: f64,
    /// Dictionary size inside `log p`; defaults to the number of columns.
    pub p: Option<usize>,
    pub intensity_bound: IntensityBound,
    pub variance_mode: VarianceMode,
    pub operator_method: OperatorMethod,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            gamma: 1.01,
            p: None,
            intensity_bound: IntensityBound::Auto,
            variance_mode: VarianceMode::Tilde,
            operator_method: OperatorMethod::Exact,
        }
    }
}

impl WeightConfig {
    pub fn with_mode(mut self, mode: VarianceMode) -> Self {
        self.variance_mode = mode;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// `gamma log p` with the natural logarithm; requires `gamma > 0`, `p >= 2`.
    pub fn gamma_log_p(&self, ncols: usize) -> Result<f64> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        let p = self.p.unwrap_or(ncols);
        if p < 2 {
            return Err(Error::Config(format!("log p needs p >= 2, got p = {p}")));
        }
        Ok(self.gamma * (p as f64).ln())
    }
}

fn check_counts(a: &DesignMatrix, y: &Array1<f64>) -> Result<()> {
    if y.len() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: y.len(),
        });
    }
    if let Some(bad) = y.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!(
            "counts must be finite and nonnegative, got {bad}"
        )));
    }
    Ok(())
}

/// `V^_j = sum_i phi_j(x_i)^2 Y_i`.
pub fn vhat(a: &DesignMatrix, y: &Array1<f64>) -> Result<Array1<f64>> {
    check_counts(a, y)?;
    let sq = a.matrix().mapv(|v| v * v);
    Ok(sq.t().dot(y))
}

/// `V^ + sqrt(2 t V^ m) + 3 t m` with `t` the log-scale term and `m = max_i phi^2`.
fn inflate(vhat: f64, max_sq: f64, t: f64) -> f64 {
    vhat + (2.0 * t * vhat * max_sq).sqrt() + 3.0 * t * max_sq
}

/// `V~_j` given `V^_j`, `max_i phi_j^2(x_i)` and `gamma log p`.
pub fn vtilde(vhat: f64, max_sq: f64, gamma_log_p: f64) -> f64 {
    inflate(vhat, max_sq, gamma_log_p)
}

/// `V~g_j`: as [`vtilde`] with `gamma log p + log |G_k|`.
pub fn vtilde_group(vhat: f64, max_sq: f64, gamma_log_p: f64, group_size: usize) -> f64 {
    inflate(vhat, max_sq, gamma_log_p + (group_size as f64).ln())
}

/// `sqrt(2 gamma log p V) + (gamma log p / 3) max_abs`.
pub fn lasso_lambda(variance: f64, max_abs: f64, gamma_log_p: f64) -> f64 {
    (2.0 * gamma_log_p * variance).sqrt() + gamma_log_p / 3.0 * max_abs
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoWeights {
    pub vhat: Array1<f64>,
    pub vtilde: Array1<f64>,
    pub max_abs: Array1<f64>,
    pub lambda: Array1<f64>,
    pub mode: VarianceMode,
    pub gamma_log_p: f64,
}

pub fn lasso_weights(
    a: &DesignMatrix,
    y: &Array1<f64>,
    cfg: &WeightConfig,
) -> Result<LassoWeights> {
    let v = vhat(a, y)?;
    lasso_weights_from_vhat(a, v, cfg)
}

/// Lasso weights from a precomputed `V^`.
pub fn lasso_weights_from_vhat(
    a: &DesignMatrix,
    vhat: Array1<f64>,
    cfg: &WeightConfig,
) -> Result<LassoWeights> {
    let t = cfg.gamma_log_p(a.ncols())?;
    let max_sq = a.max_sq();
    let vtilde: Array1<f64> = vhat
        .iter()
        .zip(&max_sq)
        .map(|(v, m)| self::vtilde(*v, *m, t))
        .collect();
    let max_abs = max_sq.mapv(f64::sqrt);
    let variance = match cfg.variance_mode {
        VarianceMode::Tilde => &vtilde,
        VarianceMode::Hat | VarianceMode::Practical => &vhat,
    };
    let lambda = variance
        .iter()
        .zip(&max_abs)
        .map(|(v, m)| lasso_lambda(*v, *m, t))
        .collect();
    Ok(LassoWeights {
        vhat,
        vtilde,
        max_abs,
        lambda,
        mode: cfg.variance_mode,
        gamma_log_p: t,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupWeights {
    /// `V~g_j` per coefficient.
    pub vtilde_g: Array1<f64>,
    /// `sum_{j in G_k} V^_j` per group.
    pub vhat_sum: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mode: VarianceMode,
    pub c_method: OperatorMethod,
    pub intensity_bound: f64,
    /// Auto bound resolved to `max_i Y_i = 0`.
    pub degenerate_bound: bool,
    /// Practical-mode groups with `sum V^_j = 0`, which fall back to
    /// `(gamma log p / 3) b_k`.
    pub zero_variance: Vec<bool>,
    pub gamma_log_p: f64,
}

impl GroupWeights {
    pub fn vtilde_sum(&self, groups: &GroupPartition) -> Vec<f64> {
        groups
            .iter()
            .map(|g| g.iter().map(|&j| self.vtilde_g[j]).sum())
            .collect()
    }
}

pub fn group_weights(
    a: &DesignMatrix,
    y: &Array1<f64>,
    groups: &GroupPartition,
    cfg: &WeightConfig,
) -> Result<GroupWeights> {
    let geometry = GroupGeometry::new(a, groups, cfg.operator_method)?;
    let v = vhat(a, y)?;
    let max_y = y.iter().fold(0.0_f64, |m, v| m.max(*v));
    group_weights_with(a, &v, max_y, groups, &geometry, cfg)
}

/// Group weights from a precomputed `V^`, `max_i Y_i` and group geometry.
pub fn group_weights_with(
    a: &DesignMatrix,
    vhat: &Array1<f64>,
    max_y: f64,
    groups: &GroupPartition,
    geometry: &GroupGeometry,
    cfg: &WeightConfig,
) -> Result<GroupWeights> {
    if groups.dim() != a.ncols() || vhat.len() != a.ncols() {
        return Err(Error::Dimension {
            expected: a.ncols(),
            got: groups.dim().min(vhat.len()),
        });
    }
    let t = cfg.gamma_log_p(a.ncols())?;
    let (m, degenerate_bound) = match cfg.intensity_bound {
        IntensityBound::Fixed(m) if m > 0.0 && m.is_finite() => (m, false),
        IntensityBound::Fixed(m) => {
            return Err(Error::Config(format!(
                "intensity bound M must be positive, got {m}"
            )))
        }
        IntensityBound::Auto => (max_y, max_y <= 0.0),
    };
    if degenerate_bound {
        log::warn!("all counts are zero: intensity bound M resolves to 0");
    }
    let max_sq = a.max_sq();
    let mut vtilde_g = Array1::zeros(a.ncols());
    for g in groups.iter() {
        for &j in g {
            vtilde_g[j] = vtilde_group(vhat[j], max_sq[j], t, g.len());
        }
    }
    let lead = 1.0 + 1.0 / (2.0 * (2.0 * t).sqrt());
    let mut out = GroupWeights {
        vtilde_g,
        vhat_sum: Vec::with_capacity(groups.len()),
        b: geometry.b.clone(),
        c: geometry.c.clone(),
        d: Vec::with_capacity(groups.len()),
        lambda: Vec::with_capacity(groups.len()),
        mode: cfg.variance_mode,
        c_method: geometry.method,
        intensity_bound: m,
        degenerate_bound,
        zero_variance: vec![false; groups.len()],
        gamma_log_p: t,
    };
    for (k, g) in groups.iter().enumerate() {
        let (b, c) = (geometry.b[k], geometry.c[k]);
        let d = 8.0 * m * c * c + 16.0 * b * b * t;
        let vh: f64 = g.iter().map(|&j| vhat[j]).sum();
        let vt: f64 = g.iter().map(|&j| out.vtilde_g[j]).sum();
        let deviation = 2.0 * (t * d).sqrt();
        let lambda = match cfg.variance_mode {
            VarianceMode::Tilde => lead * vt.sqrt() + deviation,
            VarianceMode::Hat => vh.sqrt() + deviation,
            VarianceMode::Practical if vh > 0.0 => 2.0 * vh.sqrt(),
            VarianceMode::Practical => {
                out.zero_variance[k] = true;
                t / 3.0 * b
            }
        };
        out.vhat_sum.push(vh);
        out.d.push(d);
        out.lambda.push(lambda);
    }
    Ok(out)
}

/// Naive group weights `sqrt(sum_{j in G_k} lambda_j^2)`, kept only as a
/// benchmark baseline.
pub fn naive_group_weights(lasso: &LassoWeights, groups: &GroupPartition) -> Vec<f64> {
    groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&j| lasso.lambda[j].powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// One row of the weight audit table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub level: &'static str,
    pub index: usize,
    pub vhat: f64,
    pub vtilde: f64,
    pub b: f64,
    pub c: Option<f64>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub lambda: f64,
    pub mode: &'static str,
}

impl LassoWeights {
    pub fn audit(&self) -> Vec<AuditRow> {
        (0..self.lambda.len())
            .map(|j| AuditRow {
                level: "coef",
                index: j,
                vhat: self.vhat[j],
                vtilde: self.vtilde[j],
                b: self.max_abs[j],
                c: None,
                d: None,
                lambda: self.lambda[j],
                mode: self.mode.as_str(),
            })
            .collect()
    }
}

impl GroupWeights {
    pub fn audit(&self, groups: &GroupPartition) -> Vec<AuditRow> {
        let vt = self.vtilde_sum(groups);
        (0..self.lambda.len())
            .map(|k| AuditRow {
                level: "group",
                index: k,
                vhat: self.vhat_sum[k],
                vtilde: vt[k],
                b: self.b[k],
                c: Some(self.c[k]),
                d: Some(self.d[k]),
                lambda: self.lambda[k],
                mode: self.mode.as_str(),
            })
            .collect()
    }
}
