//! Residual selection: group real rows by a randomly drawn column, score
//! each group's union with the generated rows against the real table, and
//! keep the group that brings the union's distribution closest to the real
//! one, capped at a maximum in-context size.

use rand::{Rng, RngExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distances::{bin_index, table_distance, DistanceError, DistanceKind};
use crate::table::{Cell, ColumnKind, Table, TableError};

pub mod oracle;

/// Distances closer than this are treated as exact ties and resolved
/// toward the lower group key.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ResidualError {
    #[error("column index {0} out of bounds")]
    BadColumn(usize),
    #[error("need at least 2 real rows, got {0}")]
    TooFewRows(usize),
    #[error("no viable candidate groups")]
    NoViableGroups,
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualConfig {
    /// Upper bound on the number of selected rows.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Bin count when grouping by a numeric column.
    #[serde(default = "default_group_bins")]
    pub group_bins: usize,
    /// Groups smaller than this are dropped unless every group is.
    #[serde(default = "default_min_group_size")]
    pub min_group_size: usize,
    /// Histogram bin count for JSD scoring.
    #[serde(default = "default_group_bins")]
    pub distance_bins: usize,
}

fn default_n_max() -> usize {
    500
}
fn default_group_bins() -> usize {
    50
}
fn default_min_group_size() -> usize {
    5
}

impl Default for ResidualConfig {
    fn default() -> Self {
        ResidualConfig {
            n_max: default_n_max(),
            group_bins: default_group_bins(),
            min_group_size: default_min_group_size(),
            distance_bins: default_group_bins(),
        }
    }
}

impl ResidualConfig {
    pub fn validate(&self) -> Result<(), ResidualError> {
        if self.n_max < 1 {
            return Err(ResidualError::BadConfig("n_max must be >= 1".into()));
        }
        if self.group_bins < 2 {
            return Err(ResidualError::BadConfig("group_bins must be >= 2".into()));
        }
        if self.min_group_size < 1 {
            return Err(ResidualError::BadConfig(
                "min_group_size must be >= 1".into(),
            ));
        }
        if self.distance_bins < 2 {
            return Err(ResidualError::BadConfig("distance_bins must be >= 2".into()));
        }
        Ok(())
    }
}

/// Identity of a candidate group on the grouping column: a category label
/// or a bin index. Groups are ordered by key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    /// Position in the column's category vocabulary plus the label.
    Category { position: usize, label: String },
    Bin(usize),
}

impl std::fmt::Display for GroupKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupKey::Category { label, .. } => write!(f, "{label}"),
            GroupKey::Bin(i) => write!(f, "bin {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGroup {
    pub column_index: usize,
    pub key: GroupKey,
    pub row_indices: Vec<usize>,
    /// Set once the group has been scored.
    pub distance: Option<f64>,
}

/// The winning group plus the diagnostics that justified it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSelection {
    pub chosen: CandidateGroup,
    /// At most `n_max` indices, subsampled from the chosen group.
    pub selected_indices: Vec<usize>,
    pub all_candidates: Vec<CandidateGroup>,
    pub distance_kind: DistanceKind,
    pub column_index: usize,
}

/// Partition the real rows by their value on one column: one group per
/// observed category, or per equal-width bin over the column's reference
/// range. Groups below `min_group_size` are dropped unless all are.
pub fn group_rows(
    real: &Table,
    column_index: usize,
    config: &ResidualConfig,
) -> Result<Vec<CandidateGroup>, ResidualError> {
    let spec = real
        .schema()
        .columns
        .get(column_index)
        .ok_or(ResidualError::BadColumn(column_index))?;

    let mut groups: Vec<CandidateGroup> = match &spec.kind {
        ColumnKind::Categorical { categories } => {
            let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); categories.len()];
            for (row, cell) in real.column(column_index).enumerate() {
                if let Cell::Category(s) = cell {
                    if let Some(pos) = categories.iter().position(|c| c == s) {
                        buckets[pos].push(row);
                    }
                }
            }
            buckets
                .into_iter()
                .enumerate()
                .filter(|(_, rows)| !rows.is_empty())
                .map(|(pos, rows)| CandidateGroup {
                    column_index,
                    key: GroupKey::Category {
                        position: pos,
                        label: categories[pos].clone(),
                    },
                    row_indices: rows,
                    distance: None,
                })
                .collect()
        }
        ColumnKind::Numeric { range } => {
            let bins = config.group_bins;
            let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); bins];
            for (row, cell) in real.column(column_index).enumerate() {
                if let Cell::Number(v) = cell {
                    buckets[bin_index(*v, *range, bins)].push(row);
                }
            }
            buckets
                .into_iter()
                .enumerate()
                .filter(|(_, rows)| !rows.is_empty())
                .map(|(bin, rows)| CandidateGroup {
                    column_index,
                    key: GroupKey::Bin(bin),
                    row_indices: rows,
                    distance: None,
                })
                .collect()
        }
    };

    let any_large = groups
        .iter()
        .any(|g| g.row_indices.len() >= config.min_group_size);
    if any_large {
        groups.retain(|g| g.row_indices.len() >= config.min_group_size);
    }
    Ok(groups)
}

/// Score every candidate group of a randomly drawn column and return the
/// argmin: the group whose union with the generated rows is closest to the
/// real distribution. Oversize winners are uniformly subsampled to `n_max`.
pub fn compute_residual<R: Rng>(
    real: &Table,
    generated: &Table,
    kind: DistanceKind,
    config: &ResidualConfig,
    rng: &mut R,
) -> Result<ResidualSelection, ResidualError> {
    config.validate()?;
    if real.len() < 2 {
        return Err(ResidualError::TooFewRows(real.len()));
    }
    if !generated.is_empty() && generated.schema() != real.schema() {
        return Err(ResidualError::Distance(DistanceError::SchemaMismatch));
    }

    let column_index = rng.random_range(0..real.schema().columns.len());
    let mut groups = group_rows(real, column_index, config)?;
    if groups.is_empty() {
        return Err(ResidualError::NoViableGroups);
    }

    let scores: Vec<f64> = groups
        .par_iter()
        .map(|group| {
            let members = real.subset(&group.row_indices)?;
            let candidate = if generated.is_empty() {
                members
            } else {
                generated.concat(&members)?
            };
            Ok(table_distance(real, &candidate, kind, config.distance_bins)?)
        })
        .collect::<Result<_, ResidualError>>()?;

    for (group, score) in groups.iter_mut().zip(&scores) {
        group.distance = Some(*score);
    }

    let best = argmin_group(&groups).expect("groups non-empty");
    let chosen = groups[best].clone();

    let selected_indices = if chosen.row_indices.len() <= config.n_max {
        chosen.row_indices.clone()
    } else {
        let mut picked: Vec<usize> =
            rand::seq::index::sample(rng, chosen.row_indices.len(), config.n_max)
                .into_iter()
                .map(|i| chosen.row_indices[i])
                .collect();
        picked.sort_unstable();
        picked
    };

    Ok(ResidualSelection {
        chosen,
        selected_indices,
        all_candidates: groups,
        distance_kind: kind,
        column_index,
    })
}

/// First minimum in key order; improvements smaller than the tie tolerance
/// do not displace an earlier group.
pub(crate) fn argmin_group(groups: &[CandidateGroup]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, group) in groups.iter().enumerate() {
        let d = group.distance?;
        match best {
            None => best = Some(i),
            Some(b) => {
                if d < groups[b].distance.unwrap() - TIE_TOLERANCE {
                    best = Some(i);
                }
            }
        }
    }
    best
}
