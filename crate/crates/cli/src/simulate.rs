use std::path::Path;

use clap::Args;
use serde::de::DeserializeOwned;

use poisson_dict::simulation::{run_scenario, Estimator, ScenarioFile, ScenarioOutcome, Shape};

use crate::error::{CliError, CliResult};
use crate::{create_dir, csv_writer, finish_csv, SimulateArgs};

/// Flags that replace the corresponding protocol entries.
#[derive(Debug, Clone, Default, Args)]
pub struct SimulateOverrides {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub shapes: Option<Vec<Shape>>,
    #[arg(long, value_delimiter = ',')]
    pub alpha_signal: Option<Vec<f64>>,
    #[arg(long)]
    pub dict: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<Estimator>>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SimulateOverrides {
    pub fn apply(&self, file: &mut ScenarioFile) {
        if let Some(n) = self.n {
            file.n = n;
        }
        if let Some(r) = self.replicates {
            file.replicates = r;
        }
        if let Some(s) = &self.shapes {
            file.shapes = s.clone();
        }
        if let Some(a) = &self.alpha_signal {
            file.alpha_signal = a.clone();
        }
        if let Some(d) = &self.dict {
            file.dictionary = d.clone();
        }
        if let Some(e) = &self.estimators {
            file.estimators = e.clone();
        }
        if let Some(s) = self.seed {
            file.seed = s;
        }
    }
}

/// Reads a TOML file; syntax and schema errors carry the 1-based line.
pub(crate) fn read_toml<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| {
        let line = e.span().map_or(0, |s| {
            text[..s.start.min(text.len())].matches('\n').count() as u64 + 1
        });
        CliError::parse(path, line, e.message())
    })
}

fn write_report(path: &Path, outcomes: &[ScenarioOutcome]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    for row in outcomes.iter().flat_map(|o| &o.rows) {
        w.serialize(row).map_err(|e| CliError::io(path, e))?;
    }
    finish_csv(w, path)
}

/// Wide format: one row per (scenario, x), one column per estimator.
fn write_plot(
    path: &Path,
    outcomes: &[ScenarioOutcome],
    estimators: &[Estimator],
) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["scenario".to_string(), "x".into(), "f0".into()];
    header.extend(estimators.iter().map(|e| e.to_string()));
    w.write_record(&header).map_err(|e| CliError::io(path, e))?;
    for o in outcomes {
        let p = &o.plot;
        for i in 0..p.x.len() {
            let mut rec = vec![p.scenario.clone(), p.x[i].to_string(), p.f0[i].to_string()];
            rec.extend(p.estimates.iter().map(|(_, v)| v[i].to_string()));
            w.write_record(&rec).map_err(|e| CliError::io(path, e))?;
        }
    }
    finish_csv(w, path)
}

/// Runs every scenario of the protocol; writes `report.csv` and `plot.csv`.
pub fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut file: ScenarioFile = read_toml(&args.scenario)?;
    args.overrides.apply(&mut file);
    let scenarios = file.expand()?;
    let mut outcomes = Vec::with_capacity(scenarios.len());
    for s in &scenarios {
        log::info!("scenario {} ({} replicates)", s.id, s.replicates);
        outcomes.push(run_scenario(s)?);
    }
    create_dir(&args.out)?;
    write_report(&args.out.join("report.csv"), &outcomes)?;
    write_plot(&args.out.join("plot.csv"), &outcomes, &file.estimators)
}
