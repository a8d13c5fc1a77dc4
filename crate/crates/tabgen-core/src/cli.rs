//! Command implementations behind the `tabgen` binary: schema inference,
//! generation runs, evaluation, the selection-strategy study, and scatter
//! extraction. Each returns data; the binary handles printing and exit
//! codes (0 ok, 2 input error, 3 environment error, 4 backend exhaustion).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::generator::GeneratorError;
use crate::metrics::{
    dcr, fidelity_report, tstr, FidelityReport, MetricsError, PrivacyReport, UtilityReport,
};
use crate::pipeline::{
    checkpoint, resume, run_generation_from, PipelineError, RunConfig, RunProgress, RunState,
    SelectionStrategy,
};
use crate::study::{run_study, StudyConfig, StudyError, StudyResult};
use crate::table::{
    load_csv, split_train_holdout, Cell, DatasetManifest, Table, TableError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Environment(String),
    #[error("{0}")]
    Backend(String),
}

impl CliError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Environment(_) => 3,
            CliError::Backend(_) => 4,
        }
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Backend(GeneratorError::MissingApiKey) => {
                CliError::Environment(GeneratorError::MissingApiKey.to_string())
            }
            PipelineError::Backend(inner) => CliError::Backend(inner.to_string()),
            PipelineError::ZeroAccepted(_) => CliError::Backend(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<StudyError> for CliError {
    fn from(e: StudyError) -> Self {
        match e {
            StudyError::Pipeline(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// One-file description of a generation run: where the data lives, where
/// outputs go, and the full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub dataset: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub run: RunConfig,
}

impl RunManifest {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid run manifest {}: {e}", path.display())))
    }

    pub fn load_dataset(&self) -> Result<Table, CliError> {
        let manifest = match &self.manifest {
            Some(p) => Some(DatasetManifest::from_path(p)?),
            None => None,
        };
        Ok(load_csv(&self.dataset, manifest.as_ref())?)
    }
}

/// Infer a dataset manifest from a CSV file, as pretty JSON.
pub fn cmd_infer_schema(csv: &Path) -> Result<String, CliError> {
    let table = load_csv(csv, None)?;
    let manifest = DatasetManifest::from_schema(table.schema());
    serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Debug, Default, Clone)]
pub struct GenerateOverrides {
    pub seed: Option<u64>,
    pub total_rows: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub enum GenerateStatus {
    Completed {
        rows: usize,
        duplicate_rate: f64,
        synthetic_csv: PathBuf,
        trace_path: PathBuf,
    },
    Paused {
        iteration: usize,
        checkpoint_path: PathBuf,
    },
}

/// Run (or resume) a generation run described by a manifest. Outputs land
/// in the manifest's output directory: `synthetic.csv`, `trace.jsonl`, and
/// a `checkpoint.json` refreshed after every iteration.
pub fn cmd_generate(
    manifest_path: &Path,
    overrides: &GenerateOverrides,
    resume_run: bool,
    stop_after: Option<usize>,
) -> Result<GenerateStatus, CliError> {
    let mut manifest = RunManifest::from_path(manifest_path)?;
    if let Some(seed) = overrides.seed {
        manifest.run.seed = seed;
    }
    if let Some(total) = overrides.total_rows {
        manifest.run.total_rows = total;
    }
    if let Some(dir) = &overrides.output_dir {
        manifest.output_dir = dir.clone();
    }

    let real = manifest.load_dataset()?;
    std::fs::create_dir_all(&manifest.output_dir)
        .map_err(|e| CliError::Input(format!("cannot create output dir: {e}")))?;
    let checkpoint_path = manifest.output_dir.join("checkpoint.json");
    let trace_path = manifest.output_dir.join("trace.jsonl");
    let synthetic_csv = manifest.output_dir.join("synthetic.csv");

    let state = if resume_run {
        resume(&checkpoint_path)?
    } else {
        RunState::initial(&real, &manifest.run)?
    };

    let progress = run_generation_from(
        &real,
        &manifest.run,
        state,
        Some(&checkpoint_path),
        stop_after,
    )?;

    match progress {
        RunProgress::Complete(outcome) => {
            outcome.synthetic.write_csv(&synthetic_csv)?;
            write_trace(&trace_path, &outcome.trace)?;
            Ok(GenerateStatus::Completed {
                rows: outcome.synthetic.len(),
                duplicate_rate: outcome.duplicate_rate,
                synthetic_csv,
                trace_path,
            })
        }
        RunProgress::Paused(state) => {
            checkpoint(&state, &checkpoint_path)?;
            write_trace(&trace_path, &state.trace)?;
            Ok(GenerateStatus::Paused {
                iteration: state.iteration,
                checkpoint_path,
            })
        }
    }
}

fn write_trace(
    path: &Path,
    records: &[crate::pipeline::IterationRecord],
) -> Result<(), CliError> {
    let mut lines = String::new();
    for record in records {
        lines.push_str(
            &serde_json::to_string(record).map_err(|e| CliError::Input(e.to_string()))?,
        );
        lines.push('\n');
    }
    std::fs::write(path, lines)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct EvaluateArgs {
    pub real_csv: PathBuf,
    pub synthetic_csv: PathBuf,
    pub manifest: Option<PathBuf>,
    pub holdout_fraction: f64,
    pub seed: u64,
    pub bins: usize,
    pub neighbors: usize,
    /// Fail when no target column is available for the utility metric.
    pub require_utility: bool,
    /// Target column override, else the manifest's.
    pub target: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationMetadata {
    pub seed: u64,
    pub bins: usize,
    pub neighbors: usize,
    pub holdout_fraction: f64,
    pub real_rows: usize,
    pub synthetic_rows: usize,
    pub config_hash: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub fidelity: FidelityReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<UtilityReport>,
    /// Same learner trained on the real train split, for reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility_real_reference: Option<UtilityReport>,
    pub privacy: PrivacyReport,
    pub metadata: EvaluationMetadata,
}

/// Full three-dimensional evaluation of a synthetic table against a real
/// one, as a single JSON-serializable report.
pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvaluationReport, CliError> {
    let manifest = match &args.manifest {
        Some(p) => Some(DatasetManifest::from_path(p)?),
        None => None,
    };
    let real = load_csv(&args.real_csv, manifest.as_ref())?;
    let synthetic = load_csv(&args.synthetic_csv, manifest.as_ref())?;

    let fidelity = fidelity_report(&real, &synthetic, args.seed, args.bins, args.neighbors)?;

    let (train, holdout) = split_train_holdout(&real, args.holdout_fraction, args.seed)?;
    let privacy = dcr(&train, &holdout, &synthetic)?;

    let target = args
        .target
        .clone()
        .or_else(|| real.schema().target_column.clone());
    let (utility, utility_real_reference) = match target {
        Some(target) => {
            let utility = tstr(&synthetic, &holdout, &target, args.seed)?;
            let reference = tstr(&train, &holdout, &target, args.seed)?;
            (Some(utility), Some(reference))
        }
        None if args.require_utility => {
            return Err(CliError::Input(
                "utility requested but no target column is declared; pass --target or set \
                 \"target\" in the dataset manifest"
                    .into(),
            ));
        }
        None => (None, None),
    };

    let config_hash = hash_params(&serde_json::json!({
        "seed": args.seed,
        "bins": args.bins,
        "neighbors": args.neighbors,
        "holdout_fraction": args.holdout_fraction,
        "target": args.target,
    }));

    Ok(EvaluationReport {
        fidelity,
        utility,
        utility_real_reference,
        privacy,
        metadata: EvaluationMetadata {
            seed: args.seed,
            bins: args.bins,
            neighbors: args.neighbors,
            holdout_fraction: args.holdout_fraction,
            real_rows: real.len(),
            synthetic_rows: synthetic.len(),
            config_hash,
        },
    })
}

fn hash_params(value: &serde_json::Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(value.to_string().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct StudyArgs {
    pub run_manifest: PathBuf,
    pub dataset_override: Option<PathBuf>,
    pub seeds: usize,
    pub arms: Vec<SelectionStrategy>,
    pub allow_remote: bool,
}

/// Run the A/B study over selection strategies with the simulator backend
/// (remote backends need explicit opt-in).
pub fn cmd_study(args: &StudyArgs) -> Result<StudyResult, CliError> {
    let mut manifest = RunManifest::from_path(&args.run_manifest)?;
    if let Some(dataset) = &args.dataset_override {
        manifest.dataset = dataset.clone();
    }
    if manifest.run.backend.kind == crate::generator::BackendKind::Remote && !args.allow_remote {
        return Err(CliError::Input(
            "study manifest configures a remote backend; pass --allow-remote to confirm".into(),
        ));
    }
    if args.seeds == 0 {
        return Err(CliError::Input("need at least 1 seed".into()));
    }
    let real = manifest.load_dataset()?;
    let base_seed = manifest.run.seed;
    let config = StudyConfig {
        base: manifest.run,
        arms: args.arms.clone(),
        seeds: (0..args.seeds as u64).map(|i| base_seed + i).collect(),
        eval_bins: 50,
        eval_neighbors: 5,
    };
    Ok(run_study(&real, &config)?)
}

#[derive(Debug, Clone)]
pub struct ScatterArgs {
    pub input: PathBuf,
    pub manifest: Option<PathBuf>,
    pub column_x: String,
    pub column_y: String,
    pub sample: usize,
    pub seed: u64,
}

/// Extract up to `sample` (x, y) pairs from two numeric columns as a
/// two-column CSV with a header.
pub fn cmd_scatter(args: &ScatterArgs) -> Result<String, CliError> {
    let manifest = match &args.manifest {
        Some(p) => Some(DatasetManifest::from_path(p)?),
        None => None,
    };
    let table = load_csv(&args.input, manifest.as_ref())?;
    let xi = table
        .schema()
        .column_index(&args.column_x)
        .ok_or_else(|| CliError::Input(format!("no column named {:?}", args.column_x)))?;
    let yi = table
        .schema()
        .column_index(&args.column_y)
        .ok_or_else(|| CliError::Input(format!("no column named {:?}", args.column_y)))?;
    for (idx, name) in [(xi, &args.column_x), (yi, &args.column_y)] {
        if !table.schema().columns[idx].kind.is_numeric() {
            return Err(CliError::Input(format!(
                "column {name:?} is categorical; scatter needs numeric columns"
            )));
        }
    }

    let indices: Vec<usize> = if args.sample >= table.len() {
        (0..table.len()).collect()
    } else {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
        let mut picked: Vec<usize> =
            rand::seq::index::sample(&mut rng, table.len(), args.sample)
                .into_iter()
                .collect();
        picked.sort_unstable();
        picked
    };

    let mut out = format!("{},{}\n", args.column_x, args.column_y);
    for &i in &indices {
        let row = table.row(i).expect("index in bounds");
        let fmt = |cell: &Cell| match cell {
            Cell::Number(v) => crate::table::number_to_text(*v),
            _ => String::new(),
        };
        out.push_str(&format!("{},{}\n", fmt(&row[xi]), fmt(&row[yi])));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(dir: &Path, name: &str, content: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn infer_schema_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write_csv(dir.path(), "data.csv", "name,age\nAlice,25\nBob,30\n");
        let json = cmd_infer_schema(&csv).unwrap();
        let manifest: DatasetManifest = serde_json::from_str(&json).unwrap();
        let manifest_path = dir.path().join("manifest.json");
        std::fs::write(&manifest_path, &json).unwrap();

        let direct = load_csv(&csv, None).unwrap();
        let via_manifest = load_csv(&csv, Some(&manifest)).unwrap();
        assert_eq!(direct, via_manifest);
    }

    #[test]
    fn scatter_samples_pairs() {
        let dir = tempfile::tempdir().unwrap();
        let mut content = String::from("x,y\n");
        for i in 0..20 {
            content.push_str(&format!("{i},{}\n", i * 2));
        }
        let csv = write_csv(dir.path(), "data.csv", &content);

        let args = ScatterArgs {
            input: csv.clone(),
            manifest: None,
            column_x: "x".into(),
            column_y: "y".into(),
            sample: 5,
            seed: 3,
        };
        let out = cmd_scatter(&args).unwrap();
        assert_eq!(out.lines().count(), 6);
        assert_eq!(out.lines().next().unwrap(), "x,y");

        // sample larger than the table keeps everything
        let all = cmd_scatter(&ScatterArgs { sample: 100, ..args.clone() }).unwrap();
        assert_eq!(all.lines().count(), 21);

        // same column for both axes gives equal coordinates
        let same = cmd_scatter(&ScatterArgs {
            column_y: "x".into(),
            sample: 100,
            ..args.clone()
        })
        .unwrap();
        for line in same.lines().skip(1) {
            let (a, b) = line.split_once(',').unwrap();
            assert_eq!(a, b);
        }

        let err = cmd_scatter(&ScatterArgs {
            column_x: "missing".into(),
            ..args
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn scatter_rejects_categorical_columns() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write_csv(dir.path(), "data.csv", "x,c\n1,A\n2,B\n");
        let err = cmd_scatter(&ScatterArgs {
            input: csv,
            manifest: None,
            column_x: "x".into(),
            column_y: "c".into(),
            sample: 10,
            seed: 0,
        })
        .unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
    }

    #[test]
    fn exit_codes_by_class() {
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
        assert_eq!(CliError::Environment("x".into()).exit_code(), 3);
        assert_eq!(CliError::Backend("x".into()).exit_code(), 4);
    }
}
