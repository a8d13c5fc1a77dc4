//! Mixture simulator: each generated row is drawn either from a per-column
//! prior (probability lambda) or by resampling an in-context row with
//! numeric jitter (probability 1 - lambda). Serves as the offline backend
//! for studies and tests.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngExt};
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::generator::GeneratorError;
use crate::table::{Cell, ColumnKind, Schema, Table};

/// Prior distribution of a single column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnPrior {
    Gaussian { mean: f64, std: f64 },
    /// Category label -> non-negative weight; omitted categories get 0.
    Weights(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureConfig {
    /// Probability of drawing from the prior instead of the in-context rows.
    pub lambda: f64,
    /// Per-column prior, keyed by column name.
    pub prior: BTreeMap<String, ColumnPrior>,
    /// Std of the resampling noise, as a fraction of the column range width.
    #[serde(default = "default_jitter")]
    pub jitter_fraction: f64,
}

fn default_jitter() -> f64 {
    0.02
}

impl MixtureConfig {
    pub fn validate(&self, schema: &Schema) -> Result<(), GeneratorError> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(GeneratorError::BadMixture(format!(
                "lambda must lie in [0,1], got {}",
                self.lambda
            )));
        }
        if !self.jitter_fraction.is_finite() || self.jitter_fraction < 0.0 {
            return Err(GeneratorError::BadMixture(format!(
                "jitter_fraction must be >= 0, got {}",
                self.jitter_fraction
            )));
        }
        for col in &schema.columns {
            let prior = self.prior.get(&col.name).ok_or_else(|| {
                GeneratorError::BadMixture(format!("no prior for column {:?}", col.name))
            })?;
            match (&col.kind, prior) {
                (ColumnKind::Numeric { .. }, ColumnPrior::Gaussian { std, .. }) => {
                    if !std.is_finite() || *std <= 0.0 {
                        return Err(GeneratorError::BadMixture(format!(
                            "column {:?}: gaussian std must be > 0",
                            col.name
                        )));
                    }
                }
                (ColumnKind::Categorical { categories }, ColumnPrior::Weights(weights)) => {
                    let mut total = 0.0;
                    for (label, w) in weights {
                        if !categories.contains(label) {
                            return Err(GeneratorError::BadMixture(format!(
                                "column {:?}: weight for unknown category {label:?}",
                                col.name
                            )));
                        }
                        if !w.is_finite() || *w < 0.0 {
                            return Err(GeneratorError::BadMixture(format!(
                                "column {:?}: weights must be non-negative",
                                col.name
                            )));
                        }
                        total += w;
                    }
                    if total <= 0.0 {
                        return Err(GeneratorError::BadMixture(format!(
                            "column {:?}: weights must sum to a positive value",
                            col.name
                        )));
                    }
                }
                (ColumnKind::Numeric { .. }, ColumnPrior::Weights(_)) => {
                    return Err(GeneratorError::BadMixture(format!(
                        "column {:?} is numeric but its prior is categorical",
                        col.name
                    )));
                }
                (ColumnKind::Categorical { .. }, ColumnPrior::Gaussian { .. }) => {
                    return Err(GeneratorError::BadMixture(format!(
                        "column {:?} is categorical but its prior is gaussian",
                        col.name
                    )));
                }
            }
        }
        Ok(())
    }
}

enum PreparedPrior {
    Gaussian { dist: Normal<f64>, range: (f64, f64) },
    Categorical { index: WeightedIndex<f64>, categories: Vec<String> },
}

fn prepare_priors(
    config: &MixtureConfig,
    schema: &Schema,
) -> Result<Vec<PreparedPrior>, GeneratorError> {
    schema
        .columns
        .iter()
        .map(|col| {
            let prior = &config.prior[&col.name];
            Ok(match (&col.kind, prior) {
                (ColumnKind::Numeric { range }, ColumnPrior::Gaussian { mean, std }) => {
                    PreparedPrior::Gaussian {
                        dist: Normal::new(*mean, *std)
                            .map_err(|e| GeneratorError::BadMixture(e.to_string()))?,
                        range: *range,
                    }
                }
                (ColumnKind::Categorical { categories }, ColumnPrior::Weights(weights)) => {
                    let ordered: Vec<f64> = categories
                        .iter()
                        .map(|c| weights.get(c).copied().unwrap_or(0.0))
                        .collect();
                    PreparedPrior::Categorical {
                        index: WeightedIndex::new(&ordered)
                            .map_err(|e| GeneratorError::BadMixture(e.to_string()))?,
                        categories: categories.clone(),
                    }
                }
                _ => unreachable!("validated"),
            })
        })
        .collect()
}

/// Draw `count` rows from the mixture.
pub fn simulate_generate<R: Rng>(
    in_context: &Table,
    count: usize,
    config: &MixtureConfig,
    schema: &Schema,
    rng: &mut R,
) -> Result<Vec<Vec<Cell>>, GeneratorError> {
    simulate_generate_traced(in_context, count, config, schema, rng).map(|(rows, _)| rows)
}

/// As `simulate_generate`, also returning the per-row mixture component
/// (`true` when the row came from the prior).
pub fn simulate_generate_traced<R: Rng>(
    in_context: &Table,
    count: usize,
    config: &MixtureConfig,
    schema: &Schema,
    rng: &mut R,
) -> Result<(Vec<Vec<Cell>>, Vec<bool>), GeneratorError> {
    config.validate(schema)?;
    if config.lambda < 1.0 && in_context.is_empty() {
        return Err(GeneratorError::EmptyInContext);
    }
    let priors = prepare_priors(config, schema)?;

    let mut rows = Vec::with_capacity(count);
    let mut from_prior = Vec::with_capacity(count);
    for _ in 0..count {
        let z = rng.random_bool(config.lambda);
        from_prior.push(z);
        if z {
            rows.push(sample_prior_row(&priors, rng));
        } else {
            rows.push(resample_row(in_context, config.jitter_fraction, schema, rng));
        }
    }
    Ok((rows, from_prior))
}

fn sample_prior_row<R: Rng>(priors: &[PreparedPrior], rng: &mut R) -> Vec<Cell> {
    priors
        .iter()
        .map(|prior| match prior {
            PreparedPrior::Gaussian { dist, range } => {
                Cell::Number(dist.sample(rng).clamp(range.0, range.1))
            }
            PreparedPrior::Categorical { index, categories } => {
                Cell::Category(categories[index.sample(rng)].clone())
            }
        })
        .collect()
}

fn resample_row<R: Rng>(
    in_context: &Table,
    jitter_fraction: f64,
    schema: &Schema,
    rng: &mut R,
) -> Vec<Cell> {
    let source = rng.random_range(0..in_context.len());
    let row = in_context.row(source).expect("index in bounds");
    row.iter()
        .zip(&schema.columns)
        .map(|(cell, col)| match (cell, &col.kind) {
            (Cell::Number(v), ColumnKind::Numeric { range }) => {
                let std = jitter_fraction * (range.1 - range.0);
                if std > 0.0 {
                    let noise = Normal::new(0.0, std).expect("std > 0").sample(rng);
                    Cell::Number(v + noise)
                } else {
                    Cell::Number(*v)
                }
            }
            _ => cell.clone(),
        })
        .collect()
}
