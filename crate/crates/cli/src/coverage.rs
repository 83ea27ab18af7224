use serde::{Deserialize, Serialize};

use poisson_dict::dictionary::{group_by_scale, DesignGrid, DictionarySpec};
use poisson_dict::simulation::{dj_intensity, Shape};
use poisson_dict::weights::{
    coverage_check, CoverageReport, IntensityBound, ThresholdRule, VarianceMode, WeightConfig,
};

use crate::error::{CliError, CliResult};
use crate::simulate::read_toml;
use crate::{create_dir, csv_writer, finish_csv, group_labels, CoverageArgs, PenaltyKind};

/// Binomial standard errors allowed above the bound.
pub const TOLERANCE_Z: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageConfig {
    pub n: usize,
    pub dictionary: String,
    pub shape: Shape,
    pub alpha_signal: f64,
    pub gamma: f64,
    pub replicates: usize,
    /// `lasso` or `group`.
    pub penalty: String,
    pub group_size: usize,
    pub weight_mode: VarianceMode,
    /// `None` uses the true maximum of the intensity.
    pub intensity_bound: Option<f64>,
    pub seed: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            n: 256,
            dictionary: "haar:J=8".into(),
            shape: Shape::Heavisine,
            alpha_signal: 4.0,
            gamma: 1.5,
            replicates: 2000,
            penalty: "lasso".into(),
            group_size: 8,
            weight_mode: VarianceMode::Tilde,
            intensity_bound: None,
            seed: 1,
        }
    }
}

impl CoverageConfig {
    fn from_args(args: &CoverageArgs) -> CliResult<Self> {
        let mut c: CoverageConfig = match &args.config {
            Some(path) => read_toml(path)?,
            None => CoverageConfig::default(),
        };
        if let Some(v) = args.n {
            c.n = v;
        }
        if let Some(v) = &args.dict {
            c.dictionary = v.clone();
        }
        if let Some(v) = &args.shape {
            c.shape = v.parse()?;
        }
        if let Some(v) = args.alpha_signal {
            c.alpha_signal = v;
        }
        if let Some(v) = args.gamma {
            c.gamma = v;
        }
        if let Some(v) = args.replicates {
            c.replicates = v;
        }
        if let Some(v) = args.penalty {
            c.penalty = match v {
                PenaltyKind::Lasso => "lasso",
                PenaltyKind::Group => "group",
            }
            .into();
        }
        if let Some(v) = args.groups {
            c.group_size = v;
        }
        if let Some(v) = args.weight_mode {
            c.weight_mode = v.into();
        }
        if let Some(v) = args.intensity_bound {
            c.intensity_bound = Some(v);
        }
        if let Some(v) = args.seed {
            c.seed = v;
        }
        Ok(c)
    }

    /// Runs the Monte-Carlo check; rows are labelled by coefficient or group.
    pub fn run(&self) -> CliResult<(CoverageReport, Vec<String>)> {
        let spec: DictionarySpec = self.dictionary.parse()?;
        let grid = DesignGrid::midpoints(self.n)?;
        let dict = spec.build(&grid)?;
        let a = dict.evaluate(&grid)?;
        let f0 = dj_intensity(self.shape, &grid, self.alpha_signal);
        let max_f0 = f0.iter().fold(0.0_f64, |m, v| m.max(*v));
        let expected = ndarray::Array1::from(f0);
        let mut cfg = WeightConfig::default()
            .with_gamma(self.gamma)
            .with_mode(self.weight_mode);
        cfg.intensity_bound = IntensityBound::Fixed(self.intensity_bound.unwrap_or(max_f0));
        let labels = a.labels();
        match self.penalty.as_str() {
            "lasso" => {
                let rep = coverage_check(
                    &ThresholdRule::Lasso(cfg),
                    &a,
                    &expected,
                    self.replicates,
                    self.seed,
                )?;
                Ok((rep, labels.to_vec()))
            }
            "group" => {
                let groups = group_by_scale(&dict, self.group_size)?;
                let rule = ThresholdRule::Group {
                    groups: &groups,
                    cfg,
                };
                let rep = coverage_check(&rule, &a, &expected, self.replicates, self.seed)?;
                Ok((rep, group_labels(&groups, labels)))
            }
            other => Err(CliError::Config(format!(
                "unknown penalty `{other}`; expected lasso or group"
            ))),
        }
    }
}

/// Writes `coverage.csv`: index, label, frequency, bound, tolerance.
/// Zero replicates give a header-only file.
pub fn run_coverage(args: &CoverageArgs) -> CliResult<()> {
    let config = CoverageConfig::from_args(args)?;
    let (rep, labels) = config.run()?;
    create_dir(&args.out)?;
    let path = args.out.join("coverage.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["index", "label", "frequency", "bound", "tolerance"])
        .map_err(|e| CliError::io(&path, e))?;
    let bound = rep.bound;
    let tol = rep.tolerance(TOLERANCE_Z);
    for (i, (f, label)) in rep.frequencies.iter().zip(&labels).enumerate() {
        w.serialize((i, label, f, bound, tol))
            .map_err(|e| CliError::io(&path, e))?;
    }
    finish_csv(w, &path)
}
