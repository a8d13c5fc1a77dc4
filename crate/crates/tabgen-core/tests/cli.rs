//! Binary-level tests: command wiring, exit codes, and conformance of all
//! emitted JSON against the schemas shipped in docs/schemas.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tabgen_core::cli::RunManifest;
use tabgen_core::generator::{BackendConfig, ColumnPrior, MixtureConfig};
use tabgen_core::pipeline::{RunConfig, SelectionStrategy};
use tabgen_core::residual::ResidualConfig;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tabgen")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("TABGEN_API_KEY")
        .output()
        .expect("run tabgen")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

/// Validator with every shipped schema registered under its $id, so
/// cross-file references resolve.
fn validator_for(schema_file: &str) -> jsonschema::Validator {
    let dir = schema_dir();
    let mut options = jsonschema::options();
    for entry in std::fs::read_dir(&dir).expect("docs/schemas directory") {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let id = doc["$id"].as_str().expect("$id in schema").to_string();
        options = options
            .with_resource(id, jsonschema::Resource::from_contents(doc).unwrap());
    }
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join(schema_file)).unwrap()).unwrap();
    options.build(&schema).expect("valid schema")
}

fn assert_valid(validator: &jsonschema::Validator, value: &serde_json::Value, what: &str) {
    let errors: Vec<String> = validator
        .iter_errors(value)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{what} violates its schema: {errors:?}");
}

fn write_labeled_csv(path: &Path, rows: usize) {
    let mut content = String::from("x,y,label\n");
    for i in 0..rows {
        let label = if i % 2 == 0 { "pos" } else { "neg" };
        let x = (i as f64 * 0.37).sin() * 3.0 + if i % 2 == 0 { 2.0 } else { -2.0 };
        let y = (i as f64 * 0.11).cos() * 2.0;
        content.push_str(&format!("{x:.4},{y:.4},{label}\n"));
    }
    std::fs::write(path, content).unwrap();
}

fn simulator_manifest(dir: &Path, dataset: PathBuf, total_rows: usize) -> PathBuf {
    let mut prior = BTreeMap::new();
    prior.insert("x".into(), ColumnPrior::Gaussian { mean: 1.0, std: 2.0 });
    prior.insert("y".into(), ColumnPrior::Gaussian { mean: 0.0, std: 1.0 });
    prior.insert(
        "label".into(),
        ColumnPrior::Weights(BTreeMap::from([
            ("pos".to_string(), 0.5),
            ("neg".to_string(), 0.5),
        ])),
    );
    let manifest = RunManifest {
        dataset,
        manifest: None,
        output_dir: dir.join("out"),
        run: RunConfig {
            total_rows,
            in_context_size: 20,
            per_call_rows: 30,
            calls_per_iteration: 1,
            backend: BackendConfig::simulator(),
            mixture: Some(MixtureConfig {
                lambda: 0.6,
                prior,
                jitter_fraction: 0.02,
            }),
            residual: ResidualConfig {
                group_bins: 5,
                min_group_size: 2,
                distance_bins: 10,
                ..ResidualConfig::default()
            },
            alternation: SelectionStrategy::Alternate,
            seed: 5,
        },
    };
    let path = dir.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    path
}

#[test]
fn infer_schema_emits_a_valid_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_labeled_csv(&csv, 10);

    let output = run(&["infer-schema", csv.to_str().unwrap()]);
    assert!(output.status.success());
    let manifest: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_valid(
        &validator_for("dataset_manifest.schema.json"),
        &manifest,
        "inferred manifest",
    );
    assert_eq!(manifest["columns"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["columns"][0]["kind"], "numeric");
    assert_eq!(manifest["columns"][2]["kind"], "categorical");
}

#[test]
fn infer_schema_counts_kinds_on_a_census_style_table() {
    // 6 numeric and 8 categorical columns, shaped like census income data
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("census.csv");
    let header = "age,fnlwgt,education_num,capital_gain,capital_loss,hours_per_week,\
                  workclass,education,marital_status,occupation,relationship,race,sex,income";
    let row1 = "39,77516,13,2174,0,40,State-gov,Bachelors,Never-married,Adm-clerical,Not-in-family,White,Male,<=50K";
    let row2 = "50,83311,13,0,0,13,Self-emp-not-inc,Bachelors,Married-civ-spouse,Exec-managerial,Husband,White,Male,>50K";
    std::fs::write(&csv, format!("{header}\n{row1}\n{row2}\n")).unwrap();

    let output = run(&["infer-schema", csv.to_str().unwrap()]);
    assert!(output.status.success());
    let manifest: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let columns = manifest["columns"].as_array().unwrap();
    let numeric = columns.iter().filter(|c| c["kind"] == "numeric").count();
    let categorical = columns.iter().filter(|c| c["kind"] == "categorical").count();
    assert_eq!((numeric, categorical), (6, 8));
}

#[test]
fn infer_schema_on_empty_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "").unwrap();
    let output = run(&["infer-schema", csv.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.stderr.is_empty());
}

#[test]
fn generate_without_api_key_exits_3_naming_the_variable() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_labeled_csv(&csv, 40);
    let manifest_path = simulator_manifest(dir.path(), csv, 60);

    // flip the backend to remote
    let mut manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    manifest["run"]["backend"]["kind"] = "remote".into();
    std::fs::write(&manifest_path, manifest.to_string()).unwrap();

    let output = run(&["generate", "--run", manifest_path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("TABGEN_API_KEY"),
        "error should name the variable, got: {stderr}"
    );
}

#[test]
fn generate_outputs_conform_to_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_labeled_csv(&csv, 60);
    let manifest_path = simulator_manifest(dir.path(), csv, 510);

    let started = std::time::Instant::now();
    let output = run(&["generate", "--run", manifest_path.to_str().unwrap()]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(
        started.elapsed().as_secs() < 60,
        "a ~500-row simulator run should finish within a minute"
    );

    let out_dir = dir.path().join("out");
    let synthetic = std::fs::read_to_string(out_dir.join("synthetic.csv")).unwrap();
    assert_eq!(synthetic.lines().count(), 511, "header plus exactly N rows");
    assert_eq!(synthetic.lines().next().unwrap(), "x,y,label");

    let trace_validator = validator_for("trace_record.schema.json");
    let trace = std::fs::read_to_string(out_dir.join("trace.jsonl")).unwrap();
    let mut count = 0;
    for line in trace.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_valid(&trace_validator, &record, "trace record");
        count += 1;
    }
    assert_eq!(count, 17, "510 rows at 30 per call is 17 iterations");

    let checkpoint: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("checkpoint.json")).unwrap(),
    )
    .unwrap();
    assert_valid(
        &validator_for("checkpoint.schema.json"),
        &checkpoint,
        "checkpoint",
    );

    let manifest_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_valid(
        &validator_for("run_manifest.schema.json"),
        &manifest_doc,
        "run manifest",
    );
}

#[test]
fn evaluate_is_deterministic_and_schema_conformant() {
    let dir = tempfile::tempdir().unwrap();
    let real = dir.path().join("real.csv");
    let synthetic = dir.path().join("synthetic.csv");
    write_labeled_csv(&real, 120);
    std::fs::copy(&real, &synthetic).unwrap();

    let report_a = dir.path().join("report_a.json");
    let report_b = dir.path().join("report_b.json");
    for report in [&report_a, &report_b] {
        let output = run(&[
            "evaluate",
            "--real",
            real.to_str().unwrap(),
            "--synthetic",
            synthetic.to_str().unwrap(),
            "--seed",
            "11",
            "--target",
            "label",
            "--output",
            report.to_str().unwrap(),
        ]);
        assert!(
            output.status.success(),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let bytes_a = std::fs::read(&report_a).unwrap();
    let bytes_b = std::fs::read(&report_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed must give a byte-identical report");

    let report: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_valid(
        &validator_for("evaluation_report.schema.json"),
        &report,
        "evaluation report",
    );
    // synthetic is a verbatim copy of real
    assert_eq!(report["fidelity"]["marginal_error"], 0.0);
    assert!(report["utility"].is_object());
}

#[test]
fn evaluate_requiring_utility_without_target_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let real = dir.path().join("real.csv");
    write_labeled_csv(&real, 60);
    let output = run(&[
        "evaluate",
        "--real",
        real.to_str().unwrap(),
        "--synthetic",
        real.to_str().unwrap(),
        "--utility",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn study_emits_valid_result_and_rejects_single_arm() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_labeled_csv(&csv, 60);
    let manifest_path = simulator_manifest(dir.path(), csv, 60);

    let output = run(&[
        "study",
        "--run",
        manifest_path.to_str().unwrap(),
        "--seeds",
        "2",
        "--arms",
        "alternate,random-selection",
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let result: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_valid(
        &validator_for("study_result.schema.json"),
        &result,
        "study result",
    );
    assert_eq!(result["results"].as_array().unwrap().len(), 4);
    assert!(result["win_counts"].is_object());

    let single = run(&[
        "study",
        "--run",
        manifest_path.to_str().unwrap(),
        "--seeds",
        "2",
        "--arms",
        "alternate",
    ]);
    assert_eq!(single.status.code(), Some(2));
}

#[test]
fn scatter_emits_pairs_and_rejects_categorical() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_labeled_csv(&csv, 30);

    let output = run(&[
        "scatter",
        "--input",
        csv.to_str().unwrap(),
        "--x",
        "x",
        "--y",
        "y",
        "--sample",
        "10",
        "--seed",
        "4",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert_eq!(text.lines().next().unwrap(), "x,y");
    assert_eq!(text.lines().count(), 11);

    let bad = run(&[
        "scatter",
        "--input",
        csv.to_str().unwrap(),
        "--x",
        "x",
        "--y",
        "label",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}
