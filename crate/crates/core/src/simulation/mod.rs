//! Benchmark intensities, Poisson sampling, competing estimators and
//! replicate-level reporting.

mod cv;
mod haar_fisz;
mod shapes;

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cv::{
    default_grid, half_fold_cv_threshold, poisson_deviance, reference_lambda, scale_factors,
    CvOutcome,
};
pub use haar_fisz::{
    haar_fisz_denoise, haar_fisz_forward, haar_fisz_inverse, FiszCoefficients, HaarFiszEstimate,
};
pub use shapes::{dj_intensity, Shape, BLOCKS_HEIGHTS, BREAKPOINTS, BUMPS_HEIGHTS, BUMPS_WIDTHS};

use crate::dictionary::{group_by_scale, DesignGrid, DictionarySpec, GroupPartition};
use crate::error::{Error, Result};
use crate::metrics::{
    empirical_kl, nmse, reference_coefficients, reference_support, support_metrics, SupportSets,
};
use crate::solver::{fit, FitConfig, FitResult, PenalizedProblem, Penalty};
use crate::weights::{
    group_weights, lasso_weights, naive_group_weights, VarianceMode, WeightConfig,
};

/// Independent Poisson draws with the given means from a ChaCha8 stream
/// seeded with `seed`. A zero mean yields a zero count.
pub fn sample_counts(means: &Array1<f64>, seed: u64) -> Result<Array1<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    means
        .iter()
        .map(|&m| {
            if m == 0.0 {
                return Ok(0.0);
            }
            let dist = Poisson::new(m)
                .map_err(|e| Error::Domain(format!("invalid Poisson mean {m}: {e}")))?;
            Ok(dist.sample(&mut rng))
        })
        .collect()
}

/// A competing intensity estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Estimator {
    /// Lasso with data-driven weights (practical mode).
    LassoExact,
    /// Group Lasso over consecutive same-scale atoms, practical weights.
    GroupLasso(usize),
    /// Group Lasso with `sqrt(sum_{j in G} lambda_j^2)` weights.
    NaiveGroup(usize),
    HaarFisz,
    /// Lasso with one level chosen by half-fold cross-validation.
    CvLasso,
}

impl Estimator {
    pub fn group_size(self) -> Option<usize> {
        match self {
            Estimator::GroupLasso(s) | Estimator::NaiveGroup(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::LassoExact => write!(f, "lasso_exact"),
            Estimator::GroupLasso(s) => write!(f, "group_lasso:{s}"),
            Estimator::NaiveGroup(s) => write!(f, "naive_group:{s}"),
            Estimator::HaarFisz => write!(f, "haar_fisz"),
            Estimator::CvLasso => write!(f, "cv_lasso"),
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let size = |rest: &str| -> Result<usize> {
            match rest.parse() {
                Ok(0) | Err(_) => Err(Error::Config(format!(
                    "estimator `{s}` needs a positive group size"
                ))),
                Ok(k) => Ok(k),
            }
        };
        match s.split_once(':') {
            None => match s {
                "lasso_exact" => Ok(Estimator::LassoExact),
                "haar_fisz" => Ok(Estimator::HaarFisz),
                "cv_lasso" => Ok(Estimator::CvLasso),
                _ => Err(Error::Config(format!("unknown estimator `{s}`"))),
            },
            Some(("group_lasso", rest)) => Ok(Estimator::GroupLasso(size(rest)?)),
            Some(("naive_group", rest)) => Ok(Estimator::NaiveGroup(size(rest)?)),
            Some(_) => Err(Error::Config(format!("unknown estimator `{s}`"))),
        }
    }
}

impl TryFrom<String> for Estimator {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Estimator> for String {
    fn from(e: Estimator) -> Self {
        e.to_string()
    }
}

/// One simulation configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub shape: Shape,
    /// Multiplier of `exp(g0)`; the signal strength.
    pub alpha_signal: f64,
    pub n: usize,
    pub dictionary: DictionarySpec,
    pub estimators: Vec<Estimator>,
    pub replicates: usize,
    pub seed: u64,
    pub gamma: f64,
    pub fit: FitConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config(format!(
                "scenario `{}` needs at least one replicate",
                self.id
            )));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config(format!(
                "scenario `{}` lists no estimator",
                self.id
            )));
        }
        if !(self.alpha_signal > 0.0 && self.alpha_signal.is_finite()) {
            return Err(Error::Config(format!(
                "signal multiplier must be positive, got {}",
                self.alpha_signal
            )));
        }
        if !self.n.is_power_of_two() {
            return Err(Error::Config(format!(
                "sample size must be a power of two, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Protocol file: the Cartesian product of `shapes` and `alpha_signal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n: usize,
    pub shapes: Vec<Shape>,
    pub alpha_signal: Vec<f64>,
    pub dictionary: String,
    pub estimators: Vec<Estimator>,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

fn default_gamma() -> f64 {
    WeightConfig::default().gamma
}

impl ScenarioFile {
    pub fn expand(&self) -> Result<Vec<Scenario>> {
        let dictionary: DictionarySpec = self.dictionary.parse()?;
        let mut fit = FitConfig::default();
        if let Some(m) = self.max_iter {
            fit.max_iter = m;
        }
        let mut out = Vec::new();
        for &shape in &self.shapes {
            for &alpha in &self.alpha_signal {
                let scenario = Scenario {
                    id: format!("{shape}_a{alpha}"),
                    shape,
                    alpha_signal: alpha,
                    n: self.n,
                    dictionary: dictionary.clone(),
                    estimators: self.estimators.clone(),
                    replicates: self.replicates,
                    seed: self.seed,
                    gamma: self.gamma,
                    fit: fit.clone(),
                };
                scenario.validate()?;
                out.push(scenario);
            }
        }
        if out.is_empty() {
            return Err(Error::Config(
                "protocol lists no shape or no signal level".into(),
            ));
        }
        Ok(out)
    }
}

/// One row per (replicate, estimator). Metrics are `None` when undefined
/// or when the estimator failed, in which case `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateReport {
    pub scenario: String,
    pub replicate: usize,
    pub estimator: String,
    pub nmse: Option<f64>,
    /// Infinite when the estimate vanishes somewhere.
    pub kl: Option<f64>,
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub group_sensitivity: Option<f64>,
    pub group_specificity: Option<f64>,
    pub df: Option<usize>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

/// Replicate-averaged estimates for the reconstruction figures.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub scenario: String,
    pub x: Vec<f64>,
    pub f0: Vec<f64>,
    /// `(estimator, mean estimate)`; failed replicates are left out of the mean.
    pub estimates: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub rows: Vec<ReplicateReport>,
    pub plot: PlotData,
}

struct Estimate {
    intensity: Vec<f64>,
    support: Option<Vec<usize>>,
    groups: Option<GroupPartition>,
    df: usize,
    converged: bool,
}

fn from_fit(res: FitResult, groups: Option<GroupPartition>) -> Estimate {
    Estimate {
        intensity: res.fitted_intensity.to_vec(),
        df: res.active.len(),
        support: Some(res.active),
        groups,
        converged: res.converged,
    }
}

struct Setup {
    grid: DesignGrid,
    dict: crate::dictionary::Dictionary,
    a: crate::dictionary::DesignMatrix,
    f0: Vec<f64>,
    reference: Vec<usize>,
}

fn kl_or_infinite(f0: &[f64], f: &[f64]) -> Result<f64> {
    if f.contains(&0.0) {
        return Ok(f64::INFINITY);
    }
    empirical_kl(f0, f)
}

fn run_estimator(est: Estimator, setup: &Setup, y: &Array1<f64>, s: &Scenario) -> Result<Estimate> {
    let cfg = WeightConfig::default()
        .with_gamma(s.gamma)
        .with_mode(VarianceMode::Practical);
    match est {
        Estimator::LassoExact => {
            let w = lasso_weights(&setup.a, y, &cfg)?;
            let problem = PenalizedProblem::new(&setup.a, y, Penalty::Lasso(w.lambda))?;
            Ok(from_fit(fit(&problem, &s.fit)?, None))
        }
        Estimator::GroupLasso(size) | Estimator::NaiveGroup(size) => {
            let groups = group_by_scale(&setup.dict, size)?;
            let lambda = if let Estimator::GroupLasso(_) = est {
                group_weights(&setup.a, y, &groups, &cfg)?.lambda
            } else {
                naive_group_weights(&lasso_weights(&setup.a, y, &cfg)?, &groups)
            };
            let problem = PenalizedProblem::new(
                &setup.a,
                y,
                Penalty::Group {
                    groups: groups.clone(),
                    lambda,
                },
            )?;
            Ok(from_fit(fit(&problem, &s.fit)?, Some(groups)))
        }
        Estimator::HaarFisz => {
            let hf = haar_fisz_denoise(y.as_slice().expect("contiguous counts"))?;
            Ok(Estimate {
                intensity: hf.intensity,
                support: None,
                groups: None,
                df: hf.nonzero,
                converged: true,
            })
        }
        Estimator::CvLasso => {
            let cv = half_fold_cv_threshold(y, &setup.dict, &setup.grid, None, &s.fit)?;
            Ok(from_fit(cv.fit, None))
        }
    }
}

fn report(
    s: &Scenario,
    r: usize,
    est: Estimator,
    setup: &Setup,
    out: &Result<Estimate>,
) -> ReplicateReport {
    let mut row = ReplicateReport {
        scenario: s.id.clone(),
        replicate: r,
        estimator: est.to_string(),
        nmse: None,
        kl: None,
        accuracy: None,
        sensitivity: None,
        specificity: None,
        group_sensitivity: None,
        group_specificity: None,
        df: None,
        converged: None,
        error: None,
    };
    let e = match out {
        Ok(e) => e,
        Err(err) => {
            row.error = Some(err.to_string());
            return row;
        }
    };
    let mut metrics = || -> Result<()> {
        row.nmse = Some(nmse(&e.intensity, &setup.f0)?);
        row.kl = Some(kl_or_infinite(&setup.f0, &e.intensity)?);
        row.df = Some(e.df);
        row.converged = Some(e.converged);
        if let Some(support) = &e.support {
            let sets = SupportSets::new(
                support.iter().copied(),
                setup.reference.iter().copied(),
                setup.dict.len(),
            )?;
            let m = support_metrics(&sets);
            row.accuracy = Some(m.accuracy);
            row.sensitivity = m.sensitivity;
            row.specificity = m.specificity;
            if let Some(groups) = &e.groups {
                let g = support_metrics(&sets.to_groups(groups));
                row.group_sensitivity = g.sensitivity;
                row.group_specificity = g.specificity;
            }
        }
        Ok(())
    };
    if let Err(err) = metrics() {
        row.error = Some(err.to_string());
    }
    row
}

/// Runs every estimator on `replicates` samples drawn with seeds
/// `seed + r`. Estimator failures become rows with `error` set.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioOutcome> {
    s.validate()?;
    let grid = DesignGrid::midpoints(s.n)?;
    let dict = s.dictionary.build(&grid)?;
    let a = dict.evaluate(&grid)?;
    let f0 = dj_intensity(s.shape, &grid, s.alpha_signal);
    let log_f0: Vec<f64> = f0.iter().map(|v| v.ln()).collect();
    let reference = reference_support(&reference_coefficients(&dict, &grid, &log_f0)?);
    let setup = Setup {
        grid,
        dict,
        a,
        f0,
        reference,
    };
    let means = Array1::from(setup.f0.clone());

    let per_replicate: Vec<Vec<(ReplicateReport, Option<Vec<f64>>)>> = (0..s.replicates)
        .into_par_iter()
        .map(|r| {
            let y = match sample_counts(&means, s.seed.wrapping_add(r as u64)) {
                Ok(y) => y,
                Err(err) => {
                    return s
                        .estimators
                        .iter()
                        .map(|&est| (report(s, r, est, &setup, &Err(err.clone())), None))
                        .collect();
                }
            };
            s.estimators
                .iter()
                .map(|&est| {
                    let out = run_estimator(est, &setup, &y, s);
                    let row = report(s, r, est, &setup, &out);
                    (row, out.ok().map(|e| e.intensity))
                })
                .collect()
        })
        .collect();

    let mut sums: Vec<(Vec<f64>, usize)> = vec![(vec![0.0; s.n], 0); s.estimators.len()];
    let mut rows = Vec::with_capacity(s.replicates * s.estimators.len());
    for replicate in per_replicate {
        for (k, (row, intensity)) in replicate.into_iter().enumerate() {
            if let Some(f) = intensity {
                let (acc, count) = &mut sums[k];
                acc.iter_mut().zip(&f).for_each(|(a, v)| *a += v);
                *count += 1;
            }
            rows.push(row);
        }
    }
    let estimates = s
        .estimators
        .iter()
        .zip(sums)
        .map(|(est, (acc, count))| {
            let mean = if count == 0 {
                vec![f64::NAN; s.n]
            } else {
                acc.iter().map(|v| v / count as f64).collect()
            };
            (est.to_string(), mean)
        })
        .collect();
    let plot = PlotData {
        scenario: s.id.clone(),
        x: setup.grid.points().to_vec(),
        f0: setup.f0,
        estimates,
    };
    Ok(ScenarioOutcome { rows, plot })
}
