//! Multi-arm study harness: run each selection strategy over the same set
//! of seeds against one real table, evaluate every synthetic table, and
//! summarize per-arm means plus residual-vs-random win counts.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{fidelity_report, FidelityReport, MetricsError};
use crate::pipeline::{run_generation, PipelineError, RunConfig, SelectionStrategy};
use crate::table::Table;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("a study needs at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("a study needs at least 1 seed")]
    NoSeeds,
    #[error("duplicate arm {0}")]
    DuplicateArm(SelectionStrategy),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Template run config; each run overrides `alternation` and `seed`.
    pub base: RunConfig,
    pub arms: Vec<SelectionStrategy>,
    pub seeds: Vec<u64>,
    /// Histogram bins for the JSD fidelity column.
    #[serde(default = "default_bins")]
    pub eval_bins: usize,
    /// Neighbor count for precision/recall.
    #[serde(default = "default_neighbors")]
    pub eval_neighbors: usize,
}

fn default_bins() -> usize {
    50
}
fn default_neighbors() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSeedResult {
    pub arm: SelectionStrategy,
    pub seed: u64,
    pub fidelity: FidelityReport,
    pub duplicate_rate: f64,
    pub run_seconds: f64,
    pub eval_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub arm: SelectionStrategy,
    pub mean_marginal_error: f64,
    pub mean_correlation_error: f64,
    pub mean_c2st_error: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_jsd_error: f64,
}

/// Per-seed comparison of the alternating arm against the random baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinCounts {
    pub seeds: usize,
    /// Seeds where the alternating arm's marginal error is strictly lower.
    pub marginal_wins: usize,
    /// Seeds where the alternating arm's recall is strictly higher.
    pub recall_wins: usize,
    /// Mean of (random - alternate) / random on the marginal error.
    pub mean_relative_marginal_improvement: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyResult {
    pub results: Vec<ArmSeedResult>,
    pub summaries: Vec<ArmSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub win_counts: Option<WinCounts>,
}

impl StudyResult {
    pub fn arm_results(&self, arm: SelectionStrategy) -> Vec<&ArmSeedResult> {
        self.results.iter().filter(|r| r.arm == arm).collect()
    }

    pub fn summary(&self, arm: SelectionStrategy) -> Option<&ArmSummary> {
        self.summaries.iter().find(|s| s.arm == arm)
    }
}

/// Run every (arm, seed) pair and aggregate. Runs execute in parallel;
/// results are ordered by (arm, seed) regardless of completion order.
pub fn run_study(real: &Table, config: &StudyConfig) -> Result<StudyResult, StudyError> {
    if config.arms.len() < 2 {
        return Err(StudyError::TooFewArms(config.arms.len()));
    }
    if config.seeds.is_empty() {
        return Err(StudyError::NoSeeds);
    }
    for (i, arm) in config.arms.iter().enumerate() {
        if config.arms[..i].contains(arm) {
            return Err(StudyError::DuplicateArm(*arm));
        }
    }
    config.base.validate()?;

    let jobs: Vec<(SelectionStrategy, u64)> = config
        .arms
        .iter()
        .flat_map(|&arm| config.seeds.iter().map(move |&seed| (arm, seed)))
        .collect();

    let mut results: Vec<ArmSeedResult> = jobs
        .par_iter()
        .map(|&(arm, seed)| -> Result<ArmSeedResult, StudyError> {
            let mut run_config = config.base.clone();
            run_config.alternation = arm;
            run_config.seed = seed;

            let started = Instant::now();
            let outcome = run_generation(real, &run_config)?;
            let run_seconds = started.elapsed().as_secs_f64();

            let started = Instant::now();
            let fidelity = fidelity_report(
                real,
                &outcome.synthetic,
                seed,
                config.eval_bins,
                config.eval_neighbors,
            )?;
            let eval_seconds = started.elapsed().as_secs_f64();

            Ok(ArmSeedResult {
                arm,
                seed,
                fidelity,
                duplicate_rate: outcome.duplicate_rate,
                run_seconds,
                eval_seconds,
            })
        })
        .collect::<Result<_, _>>()?;

    results.sort_by_key(|r| {
        (
            config.arms.iter().position(|&a| a == r.arm).unwrap_or(usize::MAX),
            r.seed,
        )
    });

    let summaries = config
        .arms
        .iter()
        .map(|&arm| summarize(arm, &results))
        .collect();

    let win_counts = win_counts(config, &results);

    Ok(StudyResult {
        results,
        summaries,
        win_counts,
    })
}

fn summarize(arm: SelectionStrategy, results: &[ArmSeedResult]) -> ArmSummary {
    let rows: Vec<&ArmSeedResult> = results.iter().filter(|r| r.arm == arm).collect();
    let n = rows.len() as f64;
    let mean = |f: fn(&FidelityReport) -> f64| rows.iter().map(|r| f(&r.fidelity)).sum::<f64>() / n;
    ArmSummary {
        arm,
        mean_marginal_error: mean(|f| f.marginal_error),
        mean_correlation_error: mean(|f| f.correlation_error),
        mean_c2st_error: mean(|f| f.c2st_error),
        mean_precision: mean(|f| f.precision),
        mean_recall: mean(|f| f.recall),
        mean_jsd_error: mean(|f| f.jsd_error),
    }
}

fn win_counts(config: &StudyConfig, results: &[ArmSeedResult]) -> Option<WinCounts> {
    let has = |arm| config.arms.contains(&arm);
    if !has(SelectionStrategy::Alternate) || !has(SelectionStrategy::RandomSelection) {
        return None;
    }
    let mut marginal_wins = 0usize;
    let mut recall_wins = 0usize;
    let mut improvement_sum = 0.0;
    for &seed in &config.seeds {
        let alternate = results
            .iter()
            .find(|r| r.arm == SelectionStrategy::Alternate && r.seed == seed)?;
        let random = results
            .iter()
            .find(|r| r.arm == SelectionStrategy::RandomSelection && r.seed == seed)?;
        if alternate.fidelity.marginal_error < random.fidelity.marginal_error {
            marginal_wins += 1;
        }
        if alternate.fidelity.recall > random.fidelity.recall {
            recall_wins += 1;
        }
        if random.fidelity.marginal_error > 0.0 {
            improvement_sum += (random.fidelity.marginal_error
                - alternate.fidelity.marginal_error)
                / random.fidelity.marginal_error;
        }
    }
    Some(WinCounts {
        seeds: config.seeds.len(),
        marginal_wins,
        recall_wins,
        mean_relative_marginal_improvement: improvement_sum / config.seeds.len() as f64,
    })
}
