use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use poisson_dict::simulation::ScenarioFile;

fn poisdict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poisdict"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn out_arg(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const EIGHT: &str = "0,3\n1,5\n2,2\n3,8\n4,6\n5,1\n6,0\n7,4\n";

#[test]
fn eight_point_fit_writes_three_parseable_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "d.csv", EIGHT);
    let out = out_arg(tmp.path(), "o");
    let res = poisdict(&[
        "fit",
        "--input",
        &input,
        "--dict",
        "haar:J=3",
        "--weight-mode",
        "hat",
        "--out",
        &out,
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let fit = json(tmp.path().join("o/fit.json"));
    assert_eq!(fit["converged"], true);
    assert_eq!(fit["p"], 8);
    let weights = csv::Reader::from_path(tmp.path().join("o/weights.csv"))
        .unwrap()
        .records()
        .count();
    assert_eq!(weights, 8);
    let mut intensity = csv::Reader::from_path(tmp.path().join("o/intensity.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = intensity.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(&rows[7][0], "7.0");
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn all_zero_counts_are_a_flagged_success() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "z.csv", "0\n0\n0\n0\n");
    let out = out_arg(tmp.path(), "o");
    let res = poisdict(&[
        "fit",
        "--input",
        &input,
        "--format",
        "csv_count_only",
        "--dict",
        "haar:J=2",
        "--out",
        &out,
    ]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("WARN"));
    assert_eq!(json(tmp.path().join("o/fit.json"))["degenerate"], true);
}

#[test]
fn failures_map_to_distinct_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write(tmp.path(), "d.csv", EIGHT);
    let negative = write(tmp.path(), "neg.csv", "0,1\n1,-2\n");
    let out = out_arg(tmp.path(), "o");
    let code = |args: &[&str]| poisdict(args).status.code().unwrap();
    assert_eq!(
        code(&["fit", "--input", &negative, "--dict", "haar:J=1", "--out", &out]),
        2
    );
    let stderr = String::from_utf8_lossy(
        &poisdict(&[
            "fit", "--input", &negative, "--dict", "haar:J=1", "--out", &out,
        ])
        .stderr,
    )
    .into_owned();
    assert!(stderr.contains(":2:"), "{stderr}");
    assert_eq!(
        code(&[
            "fit",
            "--input",
            &good,
            "--dict",
            "wavelet:J=3",
            "--out",
            &out
        ]),
        3
    );
    assert_eq!(
        code(&[
            "fit",
            "--input",
            &good,
            "--dict",
            "haar:J=3",
            "--alpha-mult",
            "0.5",
            "--out",
            &out
        ]),
        3
    );
    let missing = out_arg(tmp.path(), "missing.csv");
    assert_eq!(
        code(&["fit", "--input", &missing, "--dict", "haar:J=3", "--out", &out]),
        1
    );
    let bad_toml = write(
        tmp.path(),
        "s.toml",
        "n = 64\nshapes = [\"blocks\"]\nunknown = 3\n",
    );
    assert_eq!(
        code(&["simulate", "--scenario", &bad_toml, "--out", &out]),
        2
    );
    // Predictors beyond the clip are a numerical failure.
    let huge = write(tmp.path(), "h.csv", "0,100000000000000\n1,0\n");
    assert_eq!(
        code(&["fit", "--input", &huge, "--dict", "haar:J=1", "--lambda", "0", "--out", &out]),
        4
    );
}

#[test]
fn singleton_groups_match_lasso_under_common_weight() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "d.csv", EIGHT);
    let lasso = out_arg(tmp.path(), "l");
    let group = out_arg(tmp.path(), "g");
    let base = [
        "fit", "--input", &input, "--dict", "haar:J=3", "--lambda", "2.5",
    ];
    assert!(poisdict(&[&base[..], &["--out", &lasso]].concat())
        .status
        .success());
    assert!(poisdict(
        &[
            &base[..],
            &["--penalty", "group", "--groups", "1", "--out", &group]
        ]
        .concat()
    )
    .status
    .success());
    let (l, g) = (
        json(tmp.path().join("l/fit.json")),
        json(tmp.path().join("g/fit.json")),
    );
    let coefs = |v: &serde_json::Value| -> Vec<(u64, f64)> {
        v["coefficients"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (c["index"].as_u64().unwrap(), c["value"].as_f64().unwrap()))
            .collect()
    };
    let (cl, cg) = (coefs(&l), coefs(&g));
    assert!(!cl.is_empty());
    assert_eq!(cl.len(), cg.len());
    for ((il, vl), (ig, vg)) in cl.iter().zip(&cg) {
        assert_eq!(il, ig);
        assert!((vl - vg).abs() < 1e-8, "{vl} vs {vg}");
    }
}

#[test]
fn minimal_scenario_gives_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(
        tmp.path(),
        "s.toml",
        "n = 64\nshapes = [\"heavisine\"]\nalpha_signal = [3]\ndictionary = \"haar:J=6\"\n\
         estimators = [\"lasso_exact\"]\nreplicates = 1\nseed = 5\n",
    );
    let out = out_arg(tmp.path(), "o");
    assert!(
        poisdict(&["simulate", "--scenario", &scenario, "--out", &out])
            .status
            .success()
    );
    let rows: Vec<_> = csv::Reader::from_path(tmp.path().join("o/report.csv"))
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "heavisine_a3");
    let mut plot = csv::Reader::from_path(tmp.path().join("o/plot.csv")).unwrap();
    assert_eq!(
        plot.headers().unwrap().iter().collect::<Vec<_>>(),
        ["scenario", "x", "f0", "lasso_exact"]
    );
    assert_eq!(plot.records().count(), 64);
}

#[test]
fn shipped_protocol_matches_benchmark_settings() {
    let text =
        std::fs::read_to_string(workspace_file("scenarios/benchmark_protocol.toml")).unwrap();
    let file: ScenarioFile = toml::from_str(&text).unwrap();
    assert_eq!(file.n, 1024);
    assert_eq!(file.alpha_signal, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
    assert_eq!(file.replicates, 20);
    assert_eq!(file.gamma, 1.01);
    assert_eq!(file.shapes.len(), 4);
    assert_eq!(file.expand().unwrap().len(), 28);
}

#[test]
fn coverage_without_replicates_is_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path(), "o");
    assert!(poisdict(&["coverage", "--replicates", "0", "--out", &out])
        .status
        .success());
    let text = std::fs::read_to_string(tmp.path().join("o/coverage.csv")).unwrap();
    assert_eq!(text, "index,label,frequency,bound,tolerance\n");
}

#[test]
fn coverage_config_file_is_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let config = workspace_file("scenarios/coverage.toml")
        .to_string_lossy()
        .into_owned();
    let out = out_arg(tmp.path(), "o");
    let res = poisdict(&[
        "coverage",
        "--config",
        &config,
        "--replicates",
        "20",
        "--penalty",
        "group",
        "--out",
        &out,
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let rows = csv::Reader::from_path(tmp.path().join("o/coverage.csv"))
        .unwrap()
        .records()
        .count();
    // Haar on 256 points with groups of 8 inside each scale.
    assert_eq!(rows, 35);
}

#[test]
fn weights_command_writes_audit_only() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "d.csv", EIGHT);
    let out = out_arg(tmp.path(), "o");
    assert!(
        poisdict(&["weights", "--input", &input, "--dict", "haar:J=3", "--out", &out])
            .status
            .success()
    );
    let names: Vec<_> = std::fs::read_dir(tmp.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, ["weights.csv"]);
}
