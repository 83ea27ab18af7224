//! Penalized Poisson likelihood: objective, optimality conditions and a
//! proximal-gradient solver.
//!
//! The smooth part is `-l(beta) = -Y^T A beta + sum_i exp((A beta)_i)` (the
//! constant `sum_i log Y_i!` is dropped). Its curvature is unbounded, so the
//! step is found by backtracking rather than fixed from a Lipschitz constant.

mod prox;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

pub use prox::{block_norm, prox_group, prox_l1, soft_threshold};

use crate::dictionary::{DesignMatrix, Dictionary, GroupPartition};
use crate::error::{Error, Result};

/// `lambda * norm` with `inf * 0 = 0`, so infinite weights pin coefficients at zero.
#[inline]
fn weighted(lambda: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        lambda * norm
    }
}

/// `e^x - 1 - x` with full relative accuracy near zero.
fn exp_m1_minus_x(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))
    } else {
        x.exp_m1() - x
    }
}

/// Default bound on `|(A beta)_i|`.
pub const DEFAULT_PREDICTOR_CLIP: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Penalty {
    /// `sum_j lambda_j |beta_j|`.
    Lasso(Array1<f64>),
    /// `sum_k lambda_k ||beta_{G_k}||_2`.
    Group {
        groups: GroupPartition,
        lambda: Vec<f64>,
    },
}

impl Penalty {
    fn thresholds(&self) -> &[f64] {
        match self {
            Penalty::Lasso(l) => l.as_slice().expect("contiguous weights"),
            Penalty::Group { lambda, .. } => lambda,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PenalizedProblem<'a> {
    a: &'a DesignMatrix,
    y: &'a Array1<f64>,
    penalty: Penalty,
    alpha: f64,
    clip: f64,
}

impl<'a> PenalizedProblem<'a> {
    pub fn new(a: &'a DesignMatrix, y: &'a Array1<f64>, penalty: Penalty) -> Result<Self> {
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
        match &penalty {
            Penalty::Lasso(l) if l.len() != a.ncols() => {
                return Err(Error::Dimension {
                    expected: a.ncols(),
                    got: l.len(),
                })
            }
            Penalty::Group { groups, lambda }
                if groups.dim() != a.ncols() || lambda.len() != groups.len() =>
            {
                return Err(Error::Dimension {
                    expected: groups.len(),
                    got: lambda.len(),
                })
            }
            _ => {}
        }
        if let Some(bad) = penalty
            .thresholds()
            .iter()
            .find(|l| l.is_nan() || **l < 0.0)
        {
            return Err(Error::Config(format!(
                "penalty weights must be nonnegative, got {bad}"
            )));
        }
        Ok(Self {
            a,
            y,
            penalty,
            alpha: 1.0,
            clip: DEFAULT_PREDICTOR_CLIP,
        })
    }

    /// Scales the whole penalty by `alpha >= 1`.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::Config(format!(
                "penalty multiplier must be >= 1, got {alpha}"
            )));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_clip(mut self, clip: f64) -> Result<Self> {
        if clip.is_nan() || clip <= 0.0 {
            return Err(Error::Config(format!(
                "predictor clip must be positive, got {clip}"
            )));
        }
        self.clip = clip;
        Ok(self)
    }

    pub fn design(&self) -> &DesignMatrix {
        self.a
    }

    pub fn counts(&self) -> &Array1<f64> {
        self.y
    }

    pub fn penalty(&self) -> &Penalty {
        &self.penalty
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    fn check_predictor(&self, eta: &Array1<f64>) -> Result<()> {
        match eta.iter().find(|v| v.is_nan() || v.abs() > self.clip) {
            Some(&value) => Err(Error::Overflow {
                value,
                clip: self.clip,
            }),
            None => Ok(()),
        }
    }

    fn check_beta(&self, beta: &Array1<f64>) -> Result<()> {
        if beta.len() != self.a.ncols() {
            return Err(Error::Dimension {
                expected: self.a.ncols(),
                got: beta.len(),
            });
        }
        Ok(())
    }

    /// `-Y^T eta + sum exp(eta)` for a predictor `eta = A beta`.
    fn smooth_at(&self, eta: &Array1<f64>) -> f64 {
        eta.iter().zip(self.y).map(|(e, y)| e.exp() - y * e).sum()
    }

    /// `smooth(eta + delta) - smooth(eta)` summed termwise with `exp_m1`.
    fn smooth_change(&self, eta: &Array1<f64>, delta: &Array1<f64>) -> f64 {
        eta.iter()
            .zip(delta)
            .zip(self.y)
            .map(|((e, d), y)| e.exp() * d.exp_m1() - y * d)
            .sum()
    }

    /// `smooth(eta + delta) - smooth(eta) - <grad smooth(eta), delta>`, i.e.
    /// `sum exp(eta_i) (e^{delta_i} - 1 - delta_i)`, free of cancellation.
    fn bregman(&self, eta: &Array1<f64>, delta: &Array1<f64>) -> f64 {
        eta.iter()
            .zip(delta)
            .map(|(e, d)| e.exp() * exp_m1_minus_x(*d))
            .sum()
    }

    /// `pen(to) - pen(from)` summed termwise.
    fn penalty_change(&self, from: &Array1<f64>, to: &Array1<f64>) -> f64 {
        let raw: f64 = match &self.penalty {
            Penalty::Lasso(l) => l
                .iter()
                .zip(from)
                .zip(to)
                .map(|((l, f), t)| weighted(*l, t.abs()) - weighted(*l, f.abs()))
                .sum(),
            Penalty::Group { groups, lambda } => groups
                .iter()
                .zip(lambda)
                .map(|(g, l)| weighted(*l, block_norm(to, g)) - weighted(*l, block_norm(from, g)))
                .sum(),
        };
        self.alpha * raw
    }

    /// `-A^T (Y - exp(eta))`.
    fn gradient_at(&self, eta: &Array1<f64>) -> Array1<f64> {
        let resid: Array1<f64> = eta.iter().zip(self.y).map(|(e, y)| e.exp() - y).collect();
        self.a.tmul(&resid)
    }

    /// `-l(beta)` without the `sum log Y_i!` constant.
    pub fn neg_loglik(&self, beta: &Array1<f64>) -> Result<f64> {
        self.check_beta(beta)?;
        let eta = self.a.mul(beta);
        self.check_predictor(&eta)?;
        Ok(self.smooth_at(&eta))
    }

    /// `-A^T (Y - exp(A beta))`.
    pub fn gradient(&self, beta: &Array1<f64>) -> Result<Array1<f64>> {
        self.check_beta(beta)?;
        let eta = self.a.mul(beta);
        self.check_predictor(&eta)?;
        Ok(self.gradient_at(&eta))
    }

    /// `alpha sum_j lambda_j |beta_j|` or `alpha sum_k lambda_k ||beta_{G_k}||`.
    pub fn penalty_value(&self, beta: &Array1<f64>) -> f64 {
        let raw: f64 = match &self.penalty {
            Penalty::Lasso(l) => l.iter().zip(beta).map(|(l, b)| weighted(*l, b.abs())).sum(),
            Penalty::Group { groups, lambda } => groups
                .iter()
                .zip(lambda)
                .map(|(g, l)| weighted(*l, block_norm(beta, g)))
                .sum(),
        };
        self.alpha * raw
    }

    pub fn objective(&self, beta: &Array1<f64>) -> Result<f64> {
        Ok(self.neg_loglik(beta)? + self.penalty_value(beta))
    }

    fn prox(&self, v: &Array1<f64>, step: f64) -> Array1<f64> {
        match &self.penalty {
            Penalty::Lasso(l) => prox_l1(v, l, step * self.alpha),
            Penalty::Group { groups, lambda } => prox_group(v, groups, lambda, step * self.alpha),
        }
    }

    /// Residuals of the first-order optimality system at `beta`.
    pub fn kkt_residual(&self, beta: &Array1<f64>, tol: f64) -> Result<KktReport> {
        self.check_beta(beta)?;
        let eta = self.a.mul(beta);
        self.check_predictor(&eta)?;
        Ok(self.kkt_at(beta, &self.gradient_at(&eta), tol))
    }

    fn kkt_at(&self, beta: &Array1<f64>, grad: &Array1<f64>, tol: f64) -> KktReport {
        // score = A^T (Y - exp(A beta)) = -grad
        let residuals: Vec<f64> = match &self.penalty {
            Penalty::Lasso(l) => beta
                .iter()
                .zip(grad)
                .zip(l)
                .map(|((&b, &g), &l)| {
                    let lam = self.alpha * l;
                    let r = if b != 0.0 {
                        (-g - lam * b.signum()).abs()
                    } else {
                        (g.abs() - lam).max(0.0)
                    };
                    r / lam.max(1.0)
                })
                .collect(),
            Penalty::Group { groups, lambda } => groups
                .iter()
                .zip(lambda)
                .map(|(g, &l)| {
                    let lam = self.alpha * l;
                    let norm = block_norm(beta, g);
                    let r = if norm > 0.0 {
                        if let [j] = g.as_slice() {
                            (-grad[*j] - lam * beta[*j].signum()).abs()
                        } else {
                            g.iter()
                                .map(|&j| (-grad[j] - lam * beta[j] / norm).powi(2))
                                .sum::<f64>()
                                .sqrt()
                        }
                    } else {
                        (block_norm(grad, g) - lam).max(0.0)
                    };
                    r / lam.max(1.0)
                })
                .collect(),
        };
        let max_residual = residuals.iter().fold(0.0_f64, |m, r| m.max(*r));
        KktReport {
            residuals,
            max_residual,
            tolerance: tol,
            satisfied: max_residual <= tol,
        }
    }
}

/// Stationarity residuals, one per coefficient (Lasso) or group, each
/// scaled by `max(1, alpha lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Target for the scaled KKT residual.
    pub tol: f64,
    /// Momentum with function-value restart.
    pub accelerate: bool,
    pub initial: Option<Vec<f64>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol: 1e-6,
            accelerate: true,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta: Array1<f64>,
    /// `A beta + offset`.
    pub fitted_log_intensity: Array1<f64>,
    pub fitted_intensity: Array1<f64>,
    /// Objective after each accepted iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub kkt: KktReport,
    pub iterations: usize,
    pub converged: bool,
    pub active: Vec<usize>,
    /// Groups with a nonzero block (group penalties only).
    pub active_groups: Option<Vec<usize>>,
    /// All counts were zero: the fit is the constant `exp(-clip)`.
    pub degenerate: bool,
    /// Constant added to the predictor; nonzero only for degenerate fits.
    pub offset: f64,
    /// Rows with a zero count whose fitted intensity fell below the
    /// tolerance, where the unpenalized optimum sits at minus infinity.
    pub vanishing_rows: Vec<usize>,
}

impl FitResult {
    /// `exp(sum_j beta_j phi_j(x) + offset)` at each query point.
    pub fn predict(&self, dict: &Dictionary, query: &[f64]) -> Result<Array1<f64>> {
        predict_with_offset(dict, &self.beta, self.offset, query)
    }
}

/// `exp(sum_j beta_j phi_j(x))` at each query point of `[0, 1]`.
pub fn predict(dict: &Dictionary, beta: &Array1<f64>, query: &[f64]) -> Result<Array1<f64>> {
    predict_with_offset(dict, beta, 0.0, query)
}

fn predict_with_offset(
    dict: &Dictionary,
    beta: &Array1<f64>,
    offset: f64,
    query: &[f64],
) -> Result<Array1<f64>> {
    if beta.len() != dict.len() {
        return Err(Error::Dimension {
            expected: dict.len(),
            got: beta.len(),
        });
    }
    let beta = beta.as_slice().expect("contiguous coefficients");
    query
        .iter()
        .map(|&x| {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!(
                    "query point {x} lies outside [0, 1]"
                )));
            }
            Ok((dict.combine(beta, x) + offset).exp())
        })
        .collect()
}

/// Minimizes `-l(beta) + alpha pen(beta)` by proximal gradient with
/// backtracking; returns a point meeting the KKT system within `tol` when
/// `converged` is set. With a redundant dictionary the minimizer need not be
/// unique.
pub fn fit(problem: &PenalizedProblem<'_>, config: &FitConfig) -> Result<FitResult> {
    let a = problem.a;
    let p = a.ncols();
    if problem.y.iter().all(|v| *v == 0.0) {
        return Ok(degenerate_fit(problem, config.tol));
    }
    let mut x = match &config.initial {
        Some(init) => Array1::from(init.clone()),
        None => Array1::zeros(p),
    };
    problem.check_beta(&x)?;
    let mut eta_x = a.mul(&x);
    problem
        .check_predictor(&eta_x)
        .map_err(|_| Error::Config("initial point violates the predictor clip".into()))?;
    let mut obj_x = problem.smooth_at(&eta_x) + problem.penalty_value(&x);
    let mut grad_x = problem.gradient_at(&eta_x);
    let mut trace = vec![obj_x];
    let mut kkt = problem.kkt_at(&x, &grad_x, config.tol);

    let mut step = 1.0;
    let mut momentum = 1.0_f64;
    // Extrapolated point and its predictor; `None` means "use x".
    let mut extrap: Option<(Array1<f64>, Array1<f64>)> = None;
    let mut iterations = 0;

    // Objective changes are accumulated from termwise differences, which stay
    // accurate long after the objective itself has stopped resolving them.
    while !kkt.satisfied && iterations < config.max_iter {
        iterations += 1;
        let (base, eta_base, grad_base) = match &extrap {
            Some((y, eta_y)) => (y.clone(), eta_y.clone(), problem.gradient_at(eta_y)),
            None => (x.clone(), eta_x.clone(), grad_x.clone()),
        };

        step *= 2.0;
        let (z, eta_z) = loop {
            let z = problem.prox(&(&base - &(&grad_base * step)), step);
            let diff = &z - &base;
            let delta = a.mul(&diff);
            if (&eta_base + &delta).iter().all(|v| v.abs() <= problem.clip) {
                // f(z) - f(base) - <grad, z - base> <= ||z - base||^2 / (2 step)
                let quad = diff.dot(&diff) / (2.0 * step);
                if problem.bregman(&eta_base, &delta) <= quad * (1.0 + 1e-12) {
                    let eta_z = a.mul(&z);
                    break (z, eta_z);
                }
            }
            step *= 0.5;
            if step < 1e-300 || !step.is_finite() {
                return Err(Error::Divergence {
                    iteration: iterations,
                });
            }
        };
        let plain = extrap.is_none();
        let change =
            problem.smooth_change(&eta_x, &a.mul(&(&z - &x))) + problem.penalty_change(&x, &z);
        if !change.is_finite() {
            return Err(Error::Divergence {
                iteration: iterations,
            });
        }
        if !plain && change > 0.0 {
            // Momentum overshot: restart from x.
            extrap = None;
            momentum = 1.0;
            continue;
        }
        if plain && z == x {
            // Fixed point of the prox-gradient map in floating point.
            break;
        }
        // A plain step satisfying the decrease test cannot raise the
        // objective; a positive value there is rounding.
        let change = change.min(0.0);
        let x_prev = std::mem::replace(&mut x, z);
        eta_x = eta_z;
        obj_x += change;
        trace.push(obj_x);
        grad_x = problem.gradient_at(&eta_x);
        kkt = problem.kkt_at(&x, &grad_x, config.tol);

        extrap = None;
        if config.accelerate {
            let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let w = (momentum - 1.0) / next;
            momentum = next;
            if w > 0.0 {
                let y = &x + &((&x - &x_prev) * w);
                let eta_y = a.mul(&y);
                if eta_y.iter().all(|v| v.abs() <= problem.clip) {
                    extrap = Some((y, eta_y));
                } else {
                    momentum = 1.0;
                }
            }
        }
    }

    Ok(finish(
        problem, x, eta_x, trace, kkt, iterations, config.tol,
    ))
}

fn finish(
    problem: &PenalizedProblem<'_>,
    beta: Array1<f64>,
    eta: Array1<f64>,
    objective_trace: Vec<f64>,
    kkt: KktReport,
    iterations: usize,
    tol: f64,
) -> FitResult {
    let fitted_intensity = eta.mapv(f64::exp);
    let active: Vec<usize> = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();
    let active_groups = match &problem.penalty {
        Penalty::Group { groups, .. } => Some(
            groups
                .iter()
                .enumerate()
                .filter(|(_, g)| g.iter().any(|&j| beta[j] != 0.0))
                .map(|(k, _)| k)
                .collect(),
        ),
        Penalty::Lasso(_) => None,
    };
    let vanishing_rows = problem
        .y
        .iter()
        .zip(&fitted_intensity)
        .enumerate()
        .filter(|(_, (y, f))| **y == 0.0 && **f < tol)
        .map(|(i, _)| i)
        .collect();
    FitResult {
        beta,
        fitted_log_intensity: eta,
        fitted_intensity,
        objective_trace,
        converged: kkt.satisfied,
        kkt,
        iterations,
        active,
        active_groups,
        degenerate: false,
        offset: 0.0,
        vanishing_rows,
    }
}

fn degenerate_fit(problem: &PenalizedProblem<'_>, tol: f64) -> FitResult {
    log::warn!(
        "all counts are zero; returning the constant intensity exp(-{})",
        problem.clip
    );
    let n = problem.a.nrows();
    let beta = Array1::zeros(problem.a.ncols());
    let eta = Array1::from_elem(n, -problem.clip);
    let grad = problem.gradient_at(&eta);
    let kkt = problem.kkt_at(&beta, &grad, tol);
    let objective = problem.smooth_at(&eta);
    let mut out = finish(problem, beta, eta, vec![objective], kkt, 0, tol);
    out.degenerate = true;
    out.offset = -problem.clip;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::{array, Array2};

    fn identity(n: usize) -> DesignMatrix {
        DesignMatrix::from_dense(Array2::eye(n)).unwrap()
    }

    #[test]
    fn neg_loglik_examples() {
        let a = DesignMatrix::from_dense(array![[1.0]]).unwrap();
        let y = array![2.0];
        let prob = PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1.0])).unwrap();
        assert_eq!(prob.neg_loglik(&array![0.0]).unwrap(), 1.0);
        assert_relative_eq!(
            prob.neg_loglik(&array![2f64.ln()]).unwrap(),
            0.61371,
            epsilon = 1e-5
        );
        assert_relative_eq!(
            prob.neg_loglik(&array![2f64.ln()]).unwrap(),
            2.0 - 2.0 * 2f64.ln(),
            max_relative = 1e-15
        );
        let i3 = identity(3);
        let y3 = array![1.0, 4.0, 0.0];
        let p3 = PenalizedProblem::new(&i3, &y3, Penalty::Lasso(array![1.0, 1.0, 1.0])).unwrap();
        assert_eq!(p3.neg_loglik(&Array1::zeros(3)).unwrap(), 3.0);
    }

    #[test]
    fn overflow_guard() {
        let a = DesignMatrix::from_dense(array![[1.0]]).unwrap();
        let y = array![2.0];
        let prob = PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1.0])).unwrap();
        assert!(matches!(
            prob.neg_loglik(&array![31.0]),
            Err(Error::Overflow { .. })
        ));
        assert!(matches!(
            prob.gradient(&array![-31.0]),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn gradient_examples() {
        let a = DesignMatrix::from_dense(array![[1.0, 2.0], [0.5, -1.0], [1.0, 0.0]]).unwrap();
        let y = array![3.0, 0.0, 2.0];
        let prob = PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1.0, 1.0])).unwrap();
        // beta = 0: -A^T (Y - 1)
        let g = prob.gradient(&Array1::zeros(2)).unwrap();
        assert_relative_eq!(g[0], -(2.0 - 0.5 + 1.0));
        assert_relative_eq!(g[1], -(4.0 + 1.0));
        // Y = exp(A beta) gives a stationary point.
        let beta = array![0.3, -0.2];
        let mu = a.mul(&beta).mapv(f64::exp);
        let prob = PenalizedProblem::new(&a, &mu, Penalty::Lasso(array![1.0, 1.0])).unwrap();
        assert!(prob
            .gradient(&beta)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn problem_validation() {
        let a = identity(2);
        let y = array![1.0, 2.0];
        assert!(PenalizedProblem::new(&a, &array![1.0], Penalty::Lasso(array![1.0, 1.0])).is_err());
        assert!(PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1.0])).is_err());
        assert!(PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1.0, -1.0])).is_err());
        assert!(
            PenalizedProblem::new(&a, &array![1.0, -2.0], Penalty::Lasso(array![1.0, 1.0]))
                .is_err()
        );
        let prob = PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1.0, 1.0])).unwrap();
        assert!(prob.clone().with_alpha(0.5).is_err());
        assert!(prob.clone().with_alpha(2.0).is_ok());
        assert!(prob.with_clip(0.0).is_err());
    }

    #[test]
    fn huge_penalty_gives_zero() {
        let a = DesignMatrix::from_dense(array![[1.0, 0.5], [-1.0, 2.0], [0.3, 0.3]]).unwrap();
        let y = array![5.0, 0.0, 2.0];
        let prob = PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1e9, 1e9])).unwrap();
        let res = fit(&prob, &FitConfig::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.beta, array![0.0, 0.0]);
        assert!(res.fitted_intensity.iter().all(|f| *f == 1.0));
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn unpenalized_identity_design_recovers_logs() {
        let a = identity(4);
        let y = array![3.0, 1.0, 7.0, 0.0];
        let prob = PenalizedProblem::new(&a, &y, Penalty::Lasso(Array1::zeros(4))).unwrap();
        let res = fit(&prob, &FitConfig::default()).unwrap();
        assert!(res.converged, "kkt {}", res.kkt.max_residual);
        for i in 0..3 {
            assert_relative_eq!(res.beta[i], y[i].ln(), epsilon = 1e-5);
        }
        assert!(res.fitted_intensity[3] < 1e-6);
        assert_eq!(res.vanishing_rows, vec![3]);
    }

    #[test]
    fn trace_is_monotone_and_kkt_holds() {
        let a = DesignMatrix::from_dense(array![
            [1.0, 0.2, -0.5],
            [1.0, -0.7, 0.1],
            [1.0, 0.9, 0.4],
            [1.0, 0.0, -1.0],
            [1.0, 0.5, 0.8]
        ])
        .unwrap();
        let y = array![4.0, 1.0, 9.0, 2.0, 6.0];
        for accelerate in [false, true] {
            let prob =
                PenalizedProblem::new(&a, &y, Penalty::Lasso(array![0.5, 1.0, 2.0])).unwrap();
            let res = fit(
                &prob,
                &FitConfig {
                    accelerate,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(res.converged);
            assert!(res.objective_trace.windows(2).all(|w| w[1] <= w[0]));
            let again = prob.kkt_residual(&res.beta, 1e-6).unwrap();
            assert!(again.satisfied);
        }
    }

    #[test]
    fn kkt_inactive_condition_at_zero() {
        let a = DesignMatrix::from_dense(array![[1.0, 2.0], [1.0, -1.0]]).unwrap();
        let y = array![3.0, 1.0];
        // |A_j^T (Y - 1)| = (2, 4)
        let prob = PenalizedProblem::new(&a, &y, Penalty::Lasso(array![2.0, 4.0])).unwrap();
        let rep = prob.kkt_residual(&Array1::zeros(2), 0.0).unwrap();
        assert!(rep.satisfied);
        assert_eq!(rep.max_residual, 0.0);
        let tight = PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1.0, 4.0])).unwrap();
        let rep = tight.kkt_residual(&Array1::zeros(2), 0.0).unwrap();
        assert_relative_eq!(rep.residuals[0], 1.0);
    }

    #[test]
    fn alpha_scales_penalty() {
        let a = identity(2);
        let y = array![5.0, 1.0];
        let base = PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1.0, 1.0])).unwrap();
        let doubled = base.clone().with_alpha(2.0).unwrap();
        let beta = array![0.5, -0.25];
        assert_relative_eq!(
            doubled.penalty_value(&beta),
            2.0 * base.penalty_value(&beta)
        );
        // Per coordinate: exp(b) - y + 2 sign(b) = 0  =>  b = log(y - 2) for y > 2.
        let res = fit(&doubled, &FitConfig::default()).unwrap();
        assert_relative_eq!(res.beta[0], 3f64.ln(), epsilon = 1e-6);
        assert_eq!(res.beta[1], 0.0);
    }

    #[test]
    fn all_zero_counts_are_degenerate() {
        let a = identity(3);
        let y = Array1::zeros(3);
        let prob = PenalizedProblem::new(&a, &y, Penalty::Lasso(array![1.0, 1.0, 1.0])).unwrap();
        let res = fit(&prob, &FitConfig::default()).unwrap();
        assert!(res.degenerate);
        assert!(res.converged);
        assert_eq!(res.offset, -DEFAULT_PREDICTOR_CLIP);
        assert!(res.fitted_intensity.iter().all(|f| *f == (-30f64).exp()));
    }

    #[test]
    fn predict_matches_fit() {
        use crate::dictionary::{build_haar, DesignGrid};
        let grid = DesignGrid::midpoints(8).unwrap();
        let dict = build_haar(&grid, 3).unwrap();
        let a = dict.evaluate(&grid).unwrap();
        let y = array![2.0, 3.0, 1.0, 0.0, 6.0, 8.0, 5.0, 7.0];
        let lambda = Array1::from_elem(8, 0.5);
        let prob = PenalizedProblem::new(&a, &y, Penalty::Lasso(lambda)).unwrap();
        let res = fit(&prob, &FitConfig::default()).unwrap();
        let at_grid = res.predict(&dict, grid.points()).unwrap();
        for (u, v) in at_grid.iter().zip(&res.fitted_intensity) {
            assert_relative_eq!(*u, *v, max_relative = 1e-12);
        }
        assert!(predict(&dict, &res.beta, &[1.5]).is_err());
        let ones = predict(&dict, &Array1::zeros(8), &[0.1, 0.9]).unwrap();
        assert_eq!(ones, array![1.0, 1.0]);
    }
}
