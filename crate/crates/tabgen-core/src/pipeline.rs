//! The iterative generation loop: random in-context examples seed the
//! first prompt, each iteration appends the backend's accepted rows, and
//! the next in-context set is the residual of the real table with respect
//! to everything generated so far (JSD on even iterations, KSD on odd ones
//! under the alternating strategy).

use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distances::DistanceKind;
use crate::generator::{
    build_prompt, remote_generate, simulate_generate, BackendConfig, BackendKind, GeneratorError,
    MixtureConfig,
};
use crate::residual::{compute_residual, GroupKey, ResidualConfig, ResidualError};
use crate::table::{serialize_rows_json, Cell, Table, TableError};

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid run config: {0}")]
    BadConfig(String),
    #[error("backend failed: {0}")]
    Backend(#[source] GeneratorError),
    #[error("iteration {0} produced zero accepted rows")]
    ZeroAccepted(usize),
    #[error("checkpoint {path}: {reason}")]
    BadCheckpoint { path: String, reason: String },
    #[error(transparent)]
    Residual(#[from] ResidualError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// How the next in-context set is chosen after each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    /// Residual with JSD on even iteration indices, KSD on odd ones.
    Alternate,
    KsdOnly,
    JsdOnly,
    /// Fresh uniform real rows each iteration (the random-sampling baseline).
    RandomSelection,
}

impl SelectionStrategy {
    pub fn all() -> [SelectionStrategy; 4] {
        [
            SelectionStrategy::Alternate,
            SelectionStrategy::KsdOnly,
            SelectionStrategy::JsdOnly,
            SelectionStrategy::RandomSelection,
        ]
    }

    /// Distance kind for the residual computed at the end of `iteration`,
    /// or `None` for the random baseline.
    pub fn kind_for_iteration(&self, iteration: usize) -> Option<DistanceKind> {
        match self {
            SelectionStrategy::Alternate => Some(if iteration % 2 == 0 {
                DistanceKind::Jsd
            } else {
                DistanceKind::Ksd
            }),
            SelectionStrategy::KsdOnly => Some(DistanceKind::Ksd),
            SelectionStrategy::JsdOnly => Some(DistanceKind::Jsd),
            SelectionStrategy::RandomSelection => None,
        }
    }
}

impl std::fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SelectionStrategy::Alternate => "alternate",
            SelectionStrategy::KsdOnly => "ksd_only",
            SelectionStrategy::JsdOnly => "jsd_only",
            SelectionStrategy::RandomSelection => "random_selection",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for SelectionStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "alternate" => Ok(SelectionStrategy::Alternate),
            "ksd_only" | "ksd" => Ok(SelectionStrategy::KsdOnly),
            "jsd_only" | "jsd" => Ok(SelectionStrategy::JsdOnly),
            "random_selection" | "random" => Ok(SelectionStrategy::RandomSelection),
            other => Err(format!("unknown selection strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Number of synthetic rows to produce.
    #[serde(default = "default_total_rows")]
    pub total_rows: usize,
    /// In-context example budget per iteration.
    #[serde(default = "default_in_context_size")]
    pub in_context_size: usize,
    #[serde(default = "default_per_call_rows")]
    pub per_call_rows: usize,
    #[serde(default = "default_calls_per_iteration")]
    pub calls_per_iteration: usize,
    pub backend: BackendConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<MixtureConfig>,
    #[serde(default)]
    pub residual: ResidualConfig,
    #[serde(default = "default_alternation")]
    pub alternation: SelectionStrategy,
    #[serde(default)]
    pub seed: u64,
}

fn default_total_rows() -> usize {
    3000
}
fn default_in_context_size() -> usize {
    500
}
fn default_per_call_rows() -> usize {
    50
}
fn default_calls_per_iteration() -> usize {
    1
}
fn default_alternation() -> SelectionStrategy {
    SelectionStrategy::Alternate
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.total_rows < self.per_call_rows {
            return Err(PipelineError::BadConfig(format!(
                "total_rows ({}) must be >= per_call_rows ({})",
                self.total_rows, self.per_call_rows
            )));
        }
        if self.in_context_size < 1 {
            return Err(PipelineError::BadConfig("in_context_size must be >= 1".into()));
        }
        if self.per_call_rows < 1 {
            return Err(PipelineError::BadConfig("per_call_rows must be >= 1".into()));
        }
        if self.calls_per_iteration < 1 {
            return Err(PipelineError::BadConfig(
                "calls_per_iteration must be >= 1".into(),
            ));
        }
        if self.backend.kind == BackendKind::Simulator && self.mixture.is_none() {
            return Err(PipelineError::BadConfig(
                "simulator backend requires a mixture config".into(),
            ));
        }
        self.residual
            .validate()
            .map_err(|e| PipelineError::BadConfig(e.to_string()))?;
        self.backend
            .validate()
            .map_err(|e| PipelineError::BadConfig(e.to_string()))?;
        Ok(())
    }

    /// Residual config with the cap tied to the in-context budget.
    fn effective_residual(&self) -> ResidualConfig {
        ResidualConfig {
            n_max: self.in_context_size,
            ..self.residual.clone()
        }
    }
}

/// How the in-context set for the next iteration was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "selection", rename_all = "snake_case")]
pub enum SelectionRecord {
    Residual {
        distance_kind: DistanceKind,
        column_index: usize,
        column_name: String,
        chosen_key: GroupKey,
        winning_distance: f64,
        candidate_distances: Vec<CandidateDistance>,
        selected_rows: usize,
    },
    Random {
        selected_rows: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateDistance {
    pub key: GroupKey,
    pub group_size: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub accepted_rows: usize,
    pub rejected_rows: usize,
    pub generated_total: usize,
    #[serde(flatten)]
    pub selection: SelectionRecord,
}

/// Loop state, serializable as a single checkpoint document. A resumed run
/// is bit-identical to an uninterrupted one because all randomness is
/// derived from (seed, iteration, call) counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunState {
    pub version: u32,
    pub seed: u64,
    /// Iterations completed so far.
    pub iteration: usize,
    pub generated: Table,
    pub trace: Vec<IterationRecord>,
    /// Row indices into the real table for the next iteration's prompt.
    pub next_in_context: Vec<usize>,
}

impl RunState {
    pub fn initial(real: &Table, config: &RunConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        if real.is_empty() {
            return Err(PipelineError::BadConfig("real table is empty".into()));
        }
        let take = config.in_context_size.min(real.len());
        let mut rng = stream_rng(config.seed, Stream::Init, 0, 0);
        let mut indices: Vec<usize> = rand::seq::index::sample(&mut rng, real.len(), take)
            .into_iter()
            .collect();
        indices.sort_unstable();
        Ok(RunState {
            version: CHECKPOINT_VERSION,
            seed: config.seed,
            iteration: 0,
            generated: Table::empty(real.schema().clone())?,
            trace: Vec::new(),
            next_in_context: indices,
        })
    }
}

/// Write the state as a single JSON checkpoint document.
pub fn checkpoint(state: &RunState, path: &Path) -> Result<(), PipelineError> {
    let json = serde_json::to_string_pretty(state).map_err(|e| PipelineError::BadCheckpoint {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    std::fs::write(path, json).map_err(|e| PipelineError::BadCheckpoint {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    Ok(())
}

/// Read a checkpoint back; corrupt or missing files are errors.
pub fn resume(path: &Path) -> Result<RunState, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::BadCheckpoint {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let state: RunState =
        serde_json::from_str(&text).map_err(|e| PipelineError::BadCheckpoint {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
    if state.version != CHECKPOINT_VERSION {
        return Err(PipelineError::BadCheckpoint {
            path: path.display().to_string(),
            reason: format!("unsupported checkpoint version {}", state.version),
        });
    }
    if state.trace.len() != state.iteration {
        return Err(PipelineError::BadCheckpoint {
            path: path.display().to_string(),
            reason: "trace length does not match iteration counter".into(),
        });
    }
    Ok(state)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub synthetic: Table,
    pub trace: Vec<IterationRecord>,
    /// Fraction of synthetic rows that verbatim-equal some real row.
    pub duplicate_rate: f64,
}

/// Result of driving the loop: finished, or paused after an iteration
/// budget with the state ready to resume.
#[derive(Debug)]
pub enum RunProgress {
    Complete(RunOutcome),
    Paused(RunState),
}

/// Run the loop from a fresh initial state to completion.
pub fn run_generation(real: &Table, config: &RunConfig) -> Result<RunOutcome, PipelineError> {
    let state = RunState::initial(real, config)?;
    match run_generation_from(real, config, state, None, None)? {
        RunProgress::Complete(outcome) => Ok(outcome),
        RunProgress::Paused(_) => unreachable!("no iteration budget given"),
    }
}

/// Drive the loop from `state`. When `checkpoint_path` is set the state is
/// written after every iteration, so a backend failure leaves a resumable
/// checkpoint behind. `max_iterations` bounds the iterations executed in
/// this invocation (used for deliberate interrupt/resume).
pub fn run_generation_from(
    real: &Table,
    config: &RunConfig,
    mut state: RunState,
    checkpoint_path: Option<&Path>,
    max_iterations: Option<usize>,
) -> Result<RunProgress, PipelineError> {
    config.validate()?;
    if real.is_empty() {
        return Err(PipelineError::BadConfig("real table is empty".into()));
    }
    let residual_config = config.effective_residual();
    let mut executed = 0usize;

    while state.generated.len() < config.total_rows {
        if let Some(budget) = max_iterations {
            if executed >= budget {
                return Ok(RunProgress::Paused(state));
            }
        }
        let iteration = state.iteration;
        let in_context = real.subset(&state.next_in_context)?;

        let mut accepted = 0usize;
        let mut rejected = 0usize;
        for call in 0..config.calls_per_iteration {
            let (rows, call_rejected) =
                backend_call(&in_context, real, config, iteration, call)?;
            accepted += rows.len();
            rejected += call_rejected;
            state.generated.append_rows(rows)?;
        }
        if accepted == 0 {
            if let Some(path) = checkpoint_path {
                checkpoint(&state, path)?;
            }
            return Err(PipelineError::ZeroAccepted(iteration));
        }

        let selection = match config.alternation.kind_for_iteration(iteration) {
            Some(kind) => {
                let mut rng = stream_rng(state.seed, Stream::Residual, iteration, 0);
                let result = compute_residual(
                    real,
                    &state.generated,
                    kind,
                    &residual_config,
                    &mut rng,
                )?;
                state.next_in_context = result.selected_indices.clone();
                SelectionRecord::Residual {
                    distance_kind: kind,
                    column_index: result.column_index,
                    column_name: real.schema().columns[result.column_index].name.clone(),
                    chosen_key: result.chosen.key.clone(),
                    winning_distance: result.chosen.distance.unwrap_or(f64::NAN),
                    candidate_distances: result
                        .all_candidates
                        .iter()
                        .map(|g| CandidateDistance {
                            key: g.key.clone(),
                            group_size: g.row_indices.len(),
                            distance: g.distance.unwrap_or(f64::NAN),
                        })
                        .collect(),
                    selected_rows: result.selected_indices.len(),
                }
            }
            None => {
                let take = config.in_context_size.min(real.len());
                let mut rng = stream_rng(state.seed, Stream::RandomSelection, iteration, 0);
                let mut indices: Vec<usize> =
                    rand::seq::index::sample(&mut rng, real.len(), take)
                        .into_iter()
                        .collect();
                indices.sort_unstable();
                state.next_in_context = indices;
                SelectionRecord::Random {
                    selected_rows: take,
                }
            }
        };

        state.trace.push(IterationRecord {
            iteration,
            accepted_rows: accepted,
            rejected_rows: rejected,
            generated_total: state.generated.len().min(config.total_rows),
            selection,
        });
        state.iteration += 1;
        executed += 1;

        if let Some(path) = checkpoint_path {
            checkpoint(&state, path)?;
        }
    }

    state.generated.truncate(config.total_rows);
    let duplicate_rate = duplicate_rate(real, &state.generated);
    Ok(RunProgress::Complete(RunOutcome {
        synthetic: state.generated,
        trace: state.trace,
        duplicate_rate,
    }))
}

fn backend_call(
    in_context: &Table,
    real: &Table,
    config: &RunConfig,
    iteration: usize,
    call: usize,
) -> Result<(Vec<Vec<Cell>>, usize), PipelineError> {
    match config.backend.kind {
        BackendKind::Simulator => {
            let mixture = config
                .mixture
                .as_ref()
                .expect("validated: simulator requires mixture");
            let mut rng = stream_rng(config.seed, Stream::Generate, iteration, call);
            let rows = simulate_generate(
                in_context,
                config.per_call_rows,
                mixture,
                real.schema(),
                &mut rng,
            )?;
            Ok((rows, 0))
        }
        BackendKind::Remote => {
            let all: Vec<usize> = (0..in_context.len()).collect();
            let json = serialize_rows_json(in_context, &all)?;
            let bundle = build_prompt(&json, config.per_call_rows, real.schema());
            let parsed = remote_generate(&bundle, &config.backend, real.schema())
                .map_err(PipelineError::Backend)?;
            Ok((parsed.accepted, parsed.rejected.len()))
        }
    }
}

/// Fraction of synthetic rows that are verbatim copies of real rows.
pub fn duplicate_rate(real: &Table, synthetic: &Table) -> f64 {
    if synthetic.is_empty() {
        return 0.0;
    }
    let real_keys: HashSet<Vec<CellKey>> = real.rows().iter().map(|r| row_key(r)).collect();
    let copies = synthetic
        .rows()
        .iter()
        .filter(|r| real_keys.contains(&row_key(r)))
        .count();
    copies as f64 / synthetic.len() as f64
}

#[derive(Hash, PartialEq, Eq)]
enum CellKey {
    Number(u64),
    Category(String),
    Missing,
}

fn row_key(row: &[Cell]) -> Vec<CellKey> {
    row.iter()
        .map(|c| match c {
            Cell::Number(v) => CellKey::Number(v.to_bits()),
            Cell::Category(s) => CellKey::Category(s.clone()),
            Cell::Missing => CellKey::Missing,
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Stream {
    Init,
    Generate,
    Residual,
    RandomSelection,
}

/// Independent deterministic rng per (seed, purpose, iteration, call),
/// splitmix-style, so resuming at any iteration reproduces the exact
/// stream an uninterrupted run would have used.
fn stream_rng(seed: u64, stream: Stream, iteration: usize, call: usize) -> ChaCha8Rng {
    let tag = match stream {
        Stream::Init => 1u64,
        Stream::Generate => 2,
        Stream::Residual => 3,
        Stream::RandomSelection => 4,
    };
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for part in [tag, iteration as u64, call as u64] {
        h ^= part.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 27;
    }
    ChaCha8Rng::seed_from_u64(h)
}
