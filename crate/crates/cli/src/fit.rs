use std::path::Path;

use ndarray::Array1;
use serde::Serialize;

use poisson_dict::dictionary::{
    group_by_scale, DesignGrid, DesignMatrix, Dictionary, DictionarySpec, GroupPartition,
};
use poisson_dict::solver::{fit, FitConfig, PenalizedProblem, Penalty};
use poisson_dict::weights::{group_weights, lasso_weights, AuditRow, WeightConfig};

use crate::error::{CliError, CliResult};
use crate::ingest::{ingest, CountDataset, InputFormat, Rescaling};
use crate::{create_dir, csv_writer, finish_csv, group_labels, FitArgs, PenaltyKind};

struct Prepared {
    data: CountDataset,
    dict: Dictionary,
    a: DesignMatrix,
    y: Array1<f64>,
    groups: Option<GroupPartition>,
    penalty: Penalty,
    audit: Vec<AuditRow>,
}

fn prepare(args: &FitArgs) -> CliResult<Prepared> {
    let data = ingest(&args.input, args.format)?;
    let spec: DictionarySpec = args.dict.parse()?;
    let grid = match args.format {
        InputFormat::CsvCountOnly => DesignGrid::midpoints(data.len())?,
        InputFormat::CsvPositionCount => DesignGrid::from_points(data.positions.clone())?,
    };
    let dict = spec.build(&grid)?;
    let a = dict.evaluate(&grid)?;
    let y: Array1<f64> = data.counts.iter().map(|&c| c as f64).collect();
    let cfg = WeightConfig::default()
        .with_gamma(args.gamma)
        .with_mode(args.weight_mode.into());
    if let Some(l) = args.lambda {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(CliError::Config(format!(
                "--lambda must be finite and nonnegative, got {l}"
            )));
        }
    }
    let (groups, penalty, audit) = match args.penalty {
        PenaltyKind::Lasso => {
            let w = lasso_weights(&a, &y, &cfg)?;
            let mut audit = w.audit();
            let lambda = match args.lambda {
                Some(l) => Array1::from_elem(a.ncols(), l),
                None => w.lambda,
            };
            audit
                .iter_mut()
                .zip(&lambda)
                .for_each(|(row, l)| row.lambda = *l);
            (None, Penalty::Lasso(lambda), audit)
        }
        PenaltyKind::Group => {
            let groups = group_by_scale(&dict, args.groups)?;
            let w = group_weights(&a, &y, &groups, &cfg)?;
            let mut audit = w.audit(&groups);
            let lambda = match args.lambda {
                Some(l) => vec![l; groups.len()],
                None => w.lambda,
            };
            audit
                .iter_mut()
                .zip(&lambda)
                .for_each(|(row, l)| row.lambda = *l);
            (
                Some(groups.clone()),
                Penalty::Group { groups, lambda },
                audit,
            )
        }
    };
    Ok(Prepared {
        data,
        dict,
        a,
        y,
        groups,
        penalty,
        audit,
    })
}

fn write_audit(path: &Path, rows: &[AuditRow], labels: &[String]) -> CliResult<()> {
    // The csv writer cannot flatten, so the audit columns are restated.
    #[derive(Serialize)]
    struct Row<'a> {
        level: &'a str,
        index: usize,
        label: &'a str,
        vhat: f64,
        vtilde: f64,
        b: f64,
        c: Option<f64>,
        #[serde(rename = "D")]
        d: Option<f64>,
        lambda: f64,
        mode: &'a str,
    }
    let mut w = csv_writer(path)?;
    for (r, label) in rows.iter().zip(labels) {
        let row = Row {
            level: r.level,
            index: r.index,
            label,
            vhat: r.vhat,
            vtilde: r.vtilde,
            b: r.b,
            c: r.c,
            d: r.d,
            lambda: r.lambda,
            mode: r.mode,
        };
        w.serialize(row).map_err(|e| CliError::io(path, e))?;
    }
    finish_csv(w, path)
}

fn audit_labels(p: &Prepared) -> Vec<String> {
    let labels = p.a.labels();
    match &p.groups {
        None => labels.to_vec(),
        Some(groups) => group_labels(groups, labels),
    }
}

/// Writes `weights.csv` into `--out`.
pub fn run_weights(args: &FitArgs) -> CliResult<()> {
    let p = prepare(args)?;
    create_dir(&args.out)?;
    write_audit(&args.out.join("weights.csv"), &p.audit, &audit_labels(&p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub index: usize,
    pub label: String,
    pub value: f64,
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub source: String,
    pub format: InputFormat,
    pub rescaling: Option<Rescaling>,
    pub n: usize,
    pub p: usize,
    pub dictionary: String,
    pub penalty: &'static str,
    pub group_size: Option<usize>,
    pub gamma: f64,
    pub weight_mode: &'static str,
    pub alpha_mult: f64,
    pub fixed_lambda: Option<f64>,
    pub converged: bool,
    pub degenerate: bool,
    pub iterations: usize,
    pub kkt_max_residual: f64,
    pub kkt_tolerance: f64,
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    pub offset: f64,
    pub vanishing_rows: Vec<usize>,
    pub active_groups: Option<Vec<usize>>,
    /// Nonzero coefficients only.
    pub coefficients: Vec<Coefficient>,
}

/// Fits the model and writes `fit.json`, `weights.csv` and `intensity.csv`.
/// A fit that misses the optimality tolerance still writes its artifacts
/// and then reports a numerical failure.
pub fn run_fit(args: &FitArgs) -> CliResult<FitSummary> {
    let p = prepare(args)?;
    let problem =
        PenalizedProblem::new(&p.a, &p.y, p.penalty.clone())?.with_alpha(args.alpha_mult)?;
    let res = fit(&problem, &FitConfig::default())?;
    let labels = p.a.labels();
    let summary = FitSummary {
        source: p.data.source.clone(),
        format: p.data.format,
        rescaling: p.data.rescaling,
        n: p.a.nrows(),
        p: p.a.ncols(),
        dictionary: args.dict.clone(),
        penalty: match args.penalty {
            PenaltyKind::Lasso => "lasso",
            PenaltyKind::Group => "group",
        },
        group_size: (args.penalty == PenaltyKind::Group).then_some(args.groups),
        gamma: args.gamma,
        weight_mode: poisson_dict::weights::VarianceMode::from(args.weight_mode).as_str(),
        alpha_mult: args.alpha_mult,
        fixed_lambda: args.lambda,
        converged: res.converged,
        degenerate: res.degenerate,
        iterations: res.iterations,
        kkt_max_residual: res.kkt.max_residual,
        kkt_tolerance: res.kkt.tolerance,
        objective: *res
            .objective_trace
            .last()
            .expect("trace holds the initial objective"),
        objective_trace: res.objective_trace.clone(),
        offset: res.offset,
        vanishing_rows: res.vanishing_rows.clone(),
        active_groups: res.active_groups.clone(),
        coefficients: res
            .active
            .iter()
            .map(|&j| Coefficient {
                index: j,
                label: labels[j].clone(),
                value: res.beta[j],
            })
            .collect(),
    };
    debug_assert_eq!(p.dict.len(), summary.p);

    create_dir(&args.out)?;
    let json_path = args.out.join("fit.json");
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::io(&json_path, e))?;
    std::fs::write(&json_path, json + "\n").map_err(|e| CliError::io(&json_path, e))?;
    write_audit(&args.out.join("weights.csv"), &p.audit, &audit_labels(&p))?;

    let path = args.out.join("intensity.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["position", "count", "fitted"])
        .map_err(|e| CliError::io(&path, e))?;
    for ((x, c), f) in p
        .data
        .original
        .iter()
        .zip(&p.data.counts)
        .zip(&res.fitted_intensity)
    {
        w.serialize((x, c, f)).map_err(|e| CliError::io(&path, e))?;
    }
    finish_csv(w, &path)?;

    if !res.converged && !res.degenerate {
        return Err(CliError::Numerical(format!(
            "fit stopped after {} iterations with optimality residual {:e} (tolerance {:e})",
            res.iterations, res.kkt.max_residual, res.kkt.tolerance
        )));
    }
    Ok(summary)
}
