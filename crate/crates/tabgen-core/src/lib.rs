//! Synthetic tabular data generation by iterative in-context example
//! selection, plus the evaluation suite used to judge the output.
//!
//! The generation loop prompts a backend (a remote chat-completion model
//! or an offline mixture simulator) with real rows serialized as JSON,
//! then re-selects the in-context set each iteration as the *residual*:
//! the group of real rows that, unioned with everything generated so far,
//! brings the empirical distribution closest to the real one. Evaluation
//! covers fidelity (marginal, correlation, classifier two-sample test,
//! precision/recall, Jensen-Shannon), utility (train-on-synthetic,
//! test-on-real), and privacy (distance to closest record).

pub mod cli;
pub mod distances;
pub mod generator;
pub mod metrics;
pub mod pipeline;
pub mod residual;
pub mod study;
pub mod table;

pub use distances::{
    build_histogram, jsd, ks_statistic, table_distance, tv_distance, DistanceKind, Histogram,
};
pub use pipeline::{run_generation, RunConfig, SelectionStrategy};
pub use residual::{compute_residual, group_rows, ResidualConfig, ResidualSelection};
pub use table::{
    encode_rows, load_csv, parse_rows_json, serialize_rows_json, split_train_holdout, Cell,
    ColumnKind, ColumnSpec, DatasetManifest, Schema, Table,
};
