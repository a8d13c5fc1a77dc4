//! Command-line front end: schema inference, generation runs, evaluation,
//! the selection-strategy study, and scatter extraction.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tabgen_core::cli::{
    cmd_evaluate, cmd_generate, cmd_infer_schema, cmd_scatter, cmd_study, CliError, EvaluateArgs,
    GenerateOverrides, GenerateStatus, ScatterArgs, StudyArgs,
};
use tabgen_core::pipeline::SelectionStrategy;

#[derive(Parser)]
#[command(
    name = "tabgen",
    about = "Synthetic tabular data via iterative in-context example selection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer a dataset manifest from a CSV file and print it as JSON.
    InferSchema {
        /// CSV file with a header row.
        csv: PathBuf,
    },
    /// Run a generation loop described by a run manifest.
    Generate {
        /// Run manifest (JSON).
        #[arg(long)]
        run: PathBuf,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
        /// Stop after this many iterations and checkpoint (for chunked runs).
        #[arg(long)]
        stop_after: Option<usize>,
        /// Override the manifest's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the manifest's total row count.
        #[arg(long)]
        total_rows: Option<usize>,
        /// Override the manifest's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Evaluate a synthetic table against the real one.
    Evaluate {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        synthetic: PathBuf,
        /// Dataset manifest applied to both tables.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Fraction of real rows in the privacy train split.
        #[arg(long, default_value_t = 0.5)]
        holdout_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Histogram bins for the JSD column.
        #[arg(long, default_value_t = 50)]
        bins: u64,
        /// Neighbor count for precision/recall.
        #[arg(long, default_value_t = 5)]
        neighbors: u64,
        /// Fail if no target column is available for the utility metric.
        #[arg(long)]
        utility: bool,
        /// Target column for the utility metric (overrides the manifest).
        #[arg(long)]
        target: Option<String>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare selection strategies over shared seeds (simulator backend).
    Study {
        /// Run manifest providing the dataset and base run config.
        #[arg(long)]
        run: PathBuf,
        /// Override the manifest's dataset path.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Number of seeds; runs use manifest seed + 0..k.
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        /// Comma-separated arms: alternate, ksd-only, jsd-only, random-selection.
        #[arg(long, value_delimiter = ',', default_values_t = [
            SelectionStrategy::Alternate,
            SelectionStrategy::RandomSelection,
        ])]
        arms: Vec<SelectionStrategy>,
        /// Allow a manifest that configures a remote backend.
        #[arg(long)]
        allow_remote: bool,
        /// Write the study result here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit up to m sampled (x, y) pairs from two numeric columns as CSV.
    Scatter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long = "x")]
        column_x: String,
        #[arg(long = "y")]
        column_y: String,
        /// Maximum number of pairs to emit.
        #[arg(long, default_value_t = 3000)]
        sample: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the pairs here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{}", text.trim_end_matches('\n'));
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::InferSchema { csv } => {
            let json = cmd_infer_schema(&csv)?;
            println!("{json}");
            Ok(())
        }
        Command::Generate {
            run,
            resume,
            stop_after,
            seed,
            total_rows,
            output_dir,
        } => {
            let overrides = GenerateOverrides {
                seed,
                total_rows,
                output_dir,
            };
            match cmd_generate(&run, &overrides, resume, stop_after)? {
                GenerateStatus::Completed {
                    rows,
                    duplicate_rate,
                    synthetic_csv,
                    ..
                } => {
                    println!(
                        "generated {rows} rows -> {} (duplicate rate {duplicate_rate:.4})",
                        synthetic_csv.display()
                    );
                    Ok(())
                }
                GenerateStatus::Paused {
                    iteration,
                    checkpoint_path,
                } => {
                    println!(
                        "paused after iteration {iteration}; resume with --resume ({})",
                        checkpoint_path.display()
                    );
                    Ok(())
                }
            }
        }
        Command::Evaluate {
            real,
            synthetic,
            manifest,
            holdout_fraction,
            seed,
            bins,
            neighbors,
            utility,
            target,
            output,
        } => {
            let report = cmd_evaluate(&EvaluateArgs {
                real_csv: real,
                synthetic_csv: synthetic,
                manifest,
                holdout_fraction,
                seed,
                bins: bins as usize,
                neighbors: neighbors as usize,
                require_utility: utility,
                target,
            })?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Input(e.to_string()))?;
            emit(&json, output.as_ref())
        }
        Command::Study {
            run,
            dataset,
            seeds,
            arms,
            allow_remote,
            output,
        } => {
            let result = cmd_study(&StudyArgs {
                run_manifest: run,
                dataset_override: dataset,
                seeds,
                arms,
                allow_remote,
            })?;
            let json = serde_json::to_string_pretty(&result)
                .map_err(|e| CliError::Input(e.to_string()))?;
            emit(&json, output.as_ref())
        }
        Command::Scatter {
            input,
            manifest,
            column_x,
            column_y,
            sample,
            seed,
            output,
        } => {
            let csv = cmd_scatter(&ScatterArgs {
                input,
                manifest,
                column_x,
                column_y,
                sample,
                seed,
            })?;
            emit(&csv, output.as_ref())
        }
    }
}
