//! Evaluation battery over three dimensions: fidelity (marginal,
//! correlation, classifier two-sample test, precision/recall, JSD),
//! utility (train-on-synthetic-test-on-real), and privacy (distance to
//! closest record). All learners are internal.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distances::{
    build_histogram, jsd, ks_statistic, tv_distance, DistanceError, DEFAULT_SMOOTHING,
};
use crate::table::{encode_rows, Cell, ColumnKind, Schema, Table, TableError};

pub mod learners;

use learners::{train_gbt, train_logistic, GbtLoss, GbtParams, LearnerError};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("tables have incompatible schemas")]
    SchemaMismatch,
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("need at least 2 columns for correlation")]
    TooFewColumns,
    #[error("k ({k}) must be smaller than the row count ({rows})")]
    BadNeighborCount { k: usize, rows: usize },
    #[error("all feature columns are constant")]
    DegenerateFeatures,
    #[error("target column {0:?} not present in both tables")]
    TargetMissing(String),
    #[error("target column has a single class in the training data")]
    SingleClassTarget,
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Fidelity scores. Error fields are in [0,1], lower is better;
/// precision/recall are reported raw, higher is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub marginal_error: f64,
    pub correlation_error: f64,
    pub c2st_error: f64,
    pub precision: f64,
    pub recall: f64,
    pub jsd_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub task: TaskKind,
    /// AUC for classification, RMSE for regression.
    pub score: f64,
    pub model_descriptor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub dcr_train: Vec<f64>,
    pub dcr_holdout: Vec<f64>,
    /// Fraction of synthetic rows strictly closer to train than holdout;
    /// ties count one half.
    pub closer_to_train_share: f64,
}

/// Shared encoding/histogram reference: the real table's schema with
/// categorical vocabularies extended by the synthetic table's extras.
fn metric_reference(real: &Table, synthetic: &Table) -> Result<Schema, MetricsError> {
    if !real.schema().compatible_with(synthetic.schema()) {
        return Err(MetricsError::SchemaMismatch);
    }
    Ok(real.schema().with_union_categories(synthetic.schema()))
}

fn require_rows(table: &Table, needed: usize) -> Result<(), MetricsError> {
    if table.len() < needed {
        return Err(MetricsError::TooFewRows {
            needed,
            got: table.len(),
        });
    }
    Ok(())
}

/// Mean per-column marginal discrepancy: exact KS for numeric columns,
/// total variation over category histograms for categorical ones.
pub fn marginal_error(real: &Table, synthetic: &Table) -> Result<f64, MetricsError> {
    let reference = metric_reference(real, synthetic)?;
    require_rows(real, 1)?;
    require_rows(synthetic, 1)?;
    let mut total = 0.0;
    for (index, spec) in reference.columns.iter().enumerate() {
        let d = match &spec.kind {
            ColumnKind::Numeric { .. } => ks_statistic(
                &real.numeric_column(index),
                &synthetic.numeric_column(index),
            )?,
            ColumnKind::Categorical { .. } => {
                let va: Vec<Cell> = real.column(index).cloned().collect();
                let vb: Vec<Cell> = synthetic.column(index).cloned().collect();
                let ha = build_histogram(&va, spec, 2, DEFAULT_SMOOTHING)?;
                let hb = build_histogram(&vb, spec, 2, DEFAULT_SMOOTHING)?;
                tv_distance(&ha, &hb)?
            }
        };
        total += d;
    }
    Ok(total / reference.columns.len() as f64)
}

/// Mean per-column Jensen-Shannon divergence over histograms binned
/// against the real table's reference ranges.
pub fn jsd_error(real: &Table, synthetic: &Table, bins: usize) -> Result<f64, MetricsError> {
    let reference = metric_reference(real, synthetic)?;
    require_rows(real, 1)?;
    require_rows(synthetic, 1)?;
    let mut total = 0.0;
    for (index, spec) in reference.columns.iter().enumerate() {
        let va: Vec<Cell> = real.column(index).cloned().collect();
        let vb: Vec<Cell> = synthetic.column(index).cloned().collect();
        let ha = build_histogram(&va, spec, bins, DEFAULT_SMOOTHING)?;
        let hb = build_histogram(&vb, spec, bins, DEFAULT_SMOOTHING)?;
        total += jsd(&ha, &hb)?;
    }
    Ok(total / reference.columns.len() as f64)
}

/// Mean pairwise association discrepancy. Numeric pairs compare Pearson
/// correlations (signed, error halved); numeric-categorical pairs compare
/// correlation ratios; categorical pairs use the total variation between
/// the two tables' joint category histograms directly.
pub fn correlation_error(real: &Table, synthetic: &Table) -> Result<f64, MetricsError> {
    let reference = metric_reference(real, synthetic)?;
    if reference.columns.len() < 2 {
        return Err(MetricsError::TooFewColumns);
    }
    require_rows(real, 2)?;
    require_rows(synthetic, 2)?;

    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..reference.columns.len() {
        for j in (i + 1)..reference.columns.len() {
            let error = pair_error(real, synthetic, &reference, i, j)?;
            total += error;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

fn pair_error(
    real: &Table,
    synthetic: &Table,
    reference: &Schema,
    i: usize,
    j: usize,
) -> Result<f64, MetricsError> {
    let ci = &reference.columns[i];
    let cj = &reference.columns[j];
    match (&ci.kind, &cj.kind) {
        (ColumnKind::Numeric { .. }, ColumnKind::Numeric { .. }) => {
            let rho_real = pearson(real, i, j);
            let rho_syn = pearson(synthetic, i, j);
            match (rho_real, rho_syn) {
                (Some(a), Some(b)) => Ok((a - b).abs() / 2.0),
                _ => {
                    log::warn!(
                        "columns {:?}/{:?}: constant or empty, Pearson pair skipped",
                        ci.name,
                        cj.name
                    );
                    Ok(0.0)
                }
            }
        }
        (ColumnKind::Categorical { .. }, ColumnKind::Categorical { .. }) => {
            let pa = joint_category_probs(real, reference, i, j);
            let pb = joint_category_probs(synthetic, reference, i, j);
            match (pa, pb) {
                (Some(pa), Some(pb)) => Ok(pa
                    .iter()
                    .zip(&pb)
                    .map(|(p, q)| (p - q).abs())
                    .sum::<f64>()
                    / 2.0),
                _ => {
                    log::warn!(
                        "columns {:?}/{:?}: no complete categorical pairs",
                        ci.name,
                        cj.name
                    );
                    Ok(0.0)
                }
            }
        }
        (ColumnKind::Numeric { .. }, ColumnKind::Categorical { .. }) => {
            ratio_pair(real, synthetic, reference, i, j)
        }
        (ColumnKind::Categorical { .. }, ColumnKind::Numeric { .. }) => {
            ratio_pair(real, synthetic, reference, j, i)
        }
    }
}

fn ratio_pair(
    real: &Table,
    synthetic: &Table,
    reference: &Schema,
    numeric: usize,
    categorical: usize,
) -> Result<f64, MetricsError> {
    let eta_real = correlation_ratio(real, reference, numeric, categorical);
    let eta_syn = correlation_ratio(synthetic, reference, numeric, categorical);
    match (eta_real, eta_syn) {
        (Some(a), Some(b)) => Ok((a - b).abs()),
        _ => {
            log::warn!(
                "columns {:?}/{:?}: constant numeric column, correlation ratio skipped",
                reference.columns[numeric].name,
                reference.columns[categorical].name
            );
            Ok(0.0)
        }
    }
}

fn pearson(table: &Table, i: usize, j: usize) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = table
        .rows()
        .iter()
        .filter_map(|row| Some((row[i].as_number()?, row[j].as_number()?)))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &pairs {
        sxx += (x - mean_x).powi(2);
        syy += (y - mean_y).powi(2);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn joint_category_probs(
    table: &Table,
    reference: &Schema,
    i: usize,
    j: usize,
) -> Option<Vec<f64>> {
    let cats_i = reference.columns[i].categories()?;
    let cats_j = reference.columns[j].categories()?;
    let mut counts = vec![0.0f64; cats_i.len() * cats_j.len()];
    let mut seen = 0usize;
    for row in table.rows() {
        let (Some(a), Some(b)) = (row[i].as_category(), row[j].as_category()) else {
            continue;
        };
        let (Some(pi), Some(pj)) = (
            cats_i.iter().position(|c| c == a),
            cats_j.iter().position(|c| c == b),
        ) else {
            continue;
        };
        counts[pi * cats_j.len() + pj] += 1.0;
        seen += 1;
    }
    if seen == 0 {
        return None;
    }
    let total = seen as f64;
    Some(counts.into_iter().map(|c| c / total).collect())
}

/// Correlation ratio between a numeric and a categorical column:
/// sqrt of the between-group share of the total variance.
fn correlation_ratio(
    table: &Table,
    reference: &Schema,
    numeric: usize,
    categorical: usize,
) -> Option<f64> {
    let cats = reference.columns[categorical].categories()?;
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); cats.len()];
    for row in table.rows() {
        let (Some(v), Some(c)) = (row[numeric].as_number(), row[categorical].as_category())
        else {
            continue;
        };
        if let Some(pos) = cats.iter().position(|cat| cat == c) {
            groups[pos].push(v);
        }
    }
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    if all.len() < 2 {
        return None;
    }
    let grand_mean = all.iter().sum::<f64>() / all.len() as f64;
    let ss_total: f64 = all.iter().map(|v| (v - grand_mean).powi(2)).sum();
    if ss_total <= 0.0 {
        return None;
    }
    let ss_between: f64 = groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let mean = g.iter().sum::<f64>() / g.len() as f64;
            g.len() as f64 * (mean - grand_mean).powi(2)
        })
        .sum();
    Some((ss_between / ss_total).clamp(0.0, 1.0).sqrt())
}

/// Area under the ROC curve from scores and boolean labels, with averaged
/// ranks for tied scores. Requires both classes present.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0;
    let mut idx = 0usize;
    while idx < order.len() {
        let mut end = idx;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[idx]] {
            end += 1;
        }
        // ranks are 1-based; tied scores share the average rank
        let avg_rank = (idx + end) as f64 / 2.0 + 1.0;
        for &sample in &order[idx..=end] {
            if labels[sample] {
                rank_sum_pos += avg_rank;
            }
        }
        idx = end + 1;
    }
    let p = positives as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Some(u / (p * negatives as f64))
}

/// Classifier two-sample test: 5-fold cross-validated logistic regression
/// distinguishing real from synthetic rows; the error is
/// `clamp(2*AUC - 1, 0, 1)`, so indistinguishable data scores 0.
pub fn c2st_error(real: &Table, synthetic: &Table, seed: u64) -> Result<f64, MetricsError> {
    require_rows(real, 20)?;
    require_rows(synthetic, 20)?;
    let reference = metric_reference(real, synthetic)?;
    let mut features = encode_rows(real, &reference)?;
    features.extend(encode_rows(synthetic, &reference)?);
    let labels: Vec<bool> = std::iter::repeat_n(false, real.len())
        .chain(std::iter::repeat_n(true, synthetic.len()))
        .collect();

    let width = features[0].len();
    let degenerate = (0..width).all(|c| features.iter().all(|r| r[c] == features[0][c]));
    if degenerate {
        return Err(MetricsError::DegenerateFeatures);
    }

    // stratified folds: shuffle each class separately, deal round-robin
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut real_idx: Vec<usize> = (0..real.len()).collect();
    let mut syn_idx: Vec<usize> = (real.len()..features.len()).collect();
    real_idx.shuffle(&mut rng);
    syn_idx.shuffle(&mut rng);
    const FOLDS: usize = 5;
    let mut fold_of = vec![0usize; features.len()];
    for (pos, &i) in real_idx.iter().chain(syn_idx.iter()).enumerate() {
        fold_of[i] = pos % FOLDS;
    }

    let mut auc_sum = 0.0;
    for fold in 0..FOLDS {
        let mut train_x = Vec::new();
        let mut train_y = Vec::new();
        let mut test_x = Vec::new();
        let mut test_y = Vec::new();
        for (i, row) in features.iter().enumerate() {
            if fold_of[i] == fold {
                test_x.push(row.clone());
                test_y.push(labels[i]);
            } else {
                train_x.push(row.clone());
                train_y.push(labels[i]);
            }
        }
        let model = train_logistic(&train_x, &train_y)?;
        let scores: Vec<f64> = test_x.iter().map(|r| model.predict_proba(r)).collect();
        auc_sum += auc(&scores, &test_y).expect("stratified folds keep both classes");
    }
    let mean_auc = auc_sum / FOLDS as f64;
    Ok((2.0 * mean_auc - 1.0).clamp(0.0, 1.0))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared radius of each point's k-th nearest neighbor within its own set.
fn knn_radii_sq(points: &[Vec<f64>], k: usize) -> Vec<f64> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut dists: Vec<f64> = points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| squared_distance(p, q))
                .collect();
            let (_, kth, _) = dists.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect()
}

/// Fraction of `points` whose own k-NN ball contains at least one point
/// of the other set. Anchoring each ball to the point's own local scale
/// keeps the estimate sensitive to density mismatches, not just support.
fn own_ball_hit_fraction(
    points: &[Vec<f64>],
    radii_sq: &[f64],
    others: &[Vec<f64>],
) -> f64 {
    let hit = points
        .par_iter()
        .zip(radii_sq)
        .filter(|(p, r)| others.iter().any(|q| squared_distance(p, q) <= **r))
        .count();
    hit as f64 / points.len() as f64
}

/// k-NN manifold precision/recall: precision is the fraction of synthetic
/// points whose k-th-neighbor ball holds a real point (the sample sits in
/// a region the real data populates at comparable density), recall the
/// same with the roles swapped.
pub fn precision_recall(
    real: &Table,
    synthetic: &Table,
    k: usize,
) -> Result<(f64, f64), MetricsError> {
    let rows = real.len().min(synthetic.len());
    if k == 0 || k >= rows {
        return Err(MetricsError::BadNeighborCount { k, rows });
    }
    require_rows(real, k + 1)?;
    require_rows(synthetic, k + 1)?;
    let reference = metric_reference(real, synthetic)?;
    let real_x = encode_rows(real, &reference)?;
    let syn_x = encode_rows(synthetic, &reference)?;

    let real_radii = knn_radii_sq(&real_x, k);
    let syn_radii = knn_radii_sq(&syn_x, k);
    let precision = own_ball_hit_fraction(&syn_x, &syn_radii, &real_x);
    let recall = own_ball_hit_fraction(&real_x, &real_radii, &syn_x);
    Ok((precision, recall))
}

/// Distance-to-closest-record privacy probe: L2 distances from each
/// synthetic row to its nearest train and holdout rows.
pub fn dcr(train: &Table, holdout: &Table, synthetic: &Table) -> Result<PrivacyReport, MetricsError> {
    require_rows(train, 1)?;
    require_rows(holdout, 1)?;
    require_rows(synthetic, 1)?;
    let reference = metric_reference(train, synthetic)?
        .with_union_categories(holdout.schema());
    if !holdout.schema().compatible_with(train.schema()) {
        return Err(MetricsError::SchemaMismatch);
    }
    let train_x = encode_rows(train, &reference)?;
    let holdout_x = encode_rows(holdout, &reference)?;
    let syn_x = encode_rows(synthetic, &reference)?;

    let pairs: Vec<(f64, f64)> = syn_x
        .par_iter()
        .map(|row| {
            let dt = train_x
                .iter()
                .map(|t| squared_distance(row, t))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            let dh = holdout_x
                .iter()
                .map(|h| squared_distance(row, h))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            (dt, dh)
        })
        .collect();

    let mut share = 0.0;
    for &(dt, dh) in &pairs {
        if dt < dh {
            share += 1.0;
        } else if dt == dh {
            share += 0.5;
        }
    }
    share /= pairs.len() as f64;

    Ok(PrivacyReport {
        dcr_train: pairs.iter().map(|p| p.0).collect(),
        dcr_holdout: pairs.iter().map(|p| p.1).collect(),
        closer_to_train_share: share,
    })
}

/// Train-on-synthetic-test-on-real with the internal boosted-tree learner:
/// AUC for categorical targets (one-vs-rest macro average beyond two
/// classes), RMSE for numeric ones.
pub fn tstr(
    synthetic: &Table,
    real_test: &Table,
    target: &str,
    _seed: u64,
) -> Result<UtilityReport, MetricsError> {
    require_rows(synthetic, 50)?;
    if real_test.schema().column_index(target).is_none()
        || synthetic.schema().column_index(target).is_none()
    {
        return Err(MetricsError::TargetMissing(target.to_string()));
    }
    if !real_test.schema().compatible_with(synthetic.schema()) {
        return Err(MetricsError::SchemaMismatch);
    }

    let target_idx = real_test.schema().column_index(target).expect("checked");
    let target_kind = &real_test.schema().columns[target_idx].kind;

    let syn_features_table = synthetic.drop_column(target)?;
    let test_features_table = real_test.drop_column(target)?;
    let reference = test_features_table
        .schema()
        .with_union_categories(syn_features_table.schema());
    let syn_x_all = encode_rows(&syn_features_table, &reference)?;
    let test_x_all = encode_rows(&test_features_table, &reference)?;

    let params = GbtParams::default();
    match target_kind {
        ColumnKind::Categorical { categories } => {
            // class vocabulary: test-side categories plus training extras
            let mut classes = categories.clone();
            if let Some(extra) = synthetic.schema().columns[target_idx].categories() {
                for c in extra {
                    if !classes.contains(c) {
                        classes.push(c.clone());
                    }
                }
            }
            let syn_labels = class_labels(synthetic, target_idx, &classes, &syn_x_all);
            let test_labels = class_labels(real_test, target_idx, &classes, &test_x_all);
            let (syn_x, syn_y): (Vec<_>, Vec<_>) = syn_labels.into_iter().unzip();
            let (test_x, test_y): (Vec<_>, Vec<_>) = test_labels.into_iter().unzip();

            let mut present: Vec<usize> = syn_y.clone();
            present.sort_unstable();
            present.dedup();
            if present.len() < 2 {
                return Err(MetricsError::SingleClassTarget);
            }

            let score = if present.len() == 2 {
                let positive = present[1];
                let targets: Vec<f64> = syn_y
                    .iter()
                    .map(|&c| if c == positive { 1.0 } else { 0.0 })
                    .collect();
                let model = train_gbt(&syn_x, &targets, GbtLoss::Logistic, &params)?;
                let scores: Vec<f64> = test_x.iter().map(|r| model.predict(r)).collect();
                let labels: Vec<bool> = test_y.iter().map(|&c| c == positive).collect();
                auc(&scores, &labels).ok_or(MetricsError::SingleClassTarget)?
            } else {
                // one-vs-rest macro average over classes present in both sets
                let mut sum = 0.0;
                let mut counted = 0usize;
                for &class in &present {
                    let targets: Vec<f64> = syn_y
                        .iter()
                        .map(|&c| if c == class { 1.0 } else { 0.0 })
                        .collect();
                    let model = train_gbt(&syn_x, &targets, GbtLoss::Logistic, &params)?;
                    let scores: Vec<f64> = test_x.iter().map(|r| model.predict(r)).collect();
                    let labels: Vec<bool> = test_y.iter().map(|&c| c == class).collect();
                    if let Some(a) = auc(&scores, &labels) {
                        sum += a;
                        counted += 1;
                    }
                }
                if counted == 0 {
                    return Err(MetricsError::SingleClassTarget);
                }
                sum / counted as f64
            };

            let model_descriptor = format!(
                "gbt(depth={}, rounds={}, lr={}, loss=log)",
                params.max_depth, params.rounds, params.learning_rate
            );
            Ok(UtilityReport {
                task: TaskKind::Classification,
                score,
                model_descriptor,
            })
        }
        ColumnKind::Numeric { .. } => {
            let (syn_x, syn_y): (Vec<_>, Vec<_>) = synthetic
                .rows()
                .iter()
                .zip(&syn_x_all)
                .filter_map(|(row, x)| Some((x.clone(), row[target_idx].as_number()?)))
                .unzip();
            let (test_x, test_y): (Vec<_>, Vec<_>) = real_test
                .rows()
                .iter()
                .zip(&test_x_all)
                .filter_map(|(row, x)| Some((x.clone(), row[target_idx].as_number()?)))
                .unzip();
            if syn_x.is_empty() || test_x.is_empty() {
                return Err(MetricsError::TooFewRows { needed: 1, got: 0 });
            }
            let model = train_gbt(&syn_x, &syn_y, GbtLoss::Squared, &params)?;
            let mse: f64 = test_x
                .iter()
                .zip(&test_y)
                .map(|(r, y)| (model.predict(r) - y).powi(2))
                .sum::<f64>()
                / test_y.len() as f64;
            let model_descriptor = format!(
                "gbt(depth={}, rounds={}, lr={}, loss=squared)",
                params.max_depth, params.rounds, params.learning_rate
            );
            Ok(UtilityReport {
                task: TaskKind::Regression,
                score: mse.sqrt(),
                model_descriptor,
            })
        }
    }
}

fn class_labels(
    table: &Table,
    target_idx: usize,
    classes: &[String],
    encoded: &[Vec<f64>],
) -> Vec<(Vec<f64>, usize)> {
    table
        .rows()
        .iter()
        .zip(encoded)
        .filter_map(|(row, x)| {
            let label = row[target_idx].as_category()?;
            let class = classes.iter().position(|c| c == label)?;
            Some((x.clone(), class))
        })
        .collect()
}

/// Compute the whole fidelity battery at once.
pub fn fidelity_report(
    real: &Table,
    synthetic: &Table,
    seed: u64,
    bins: usize,
    k: usize,
) -> Result<FidelityReport, MetricsError> {
    let (precision, recall) = precision_recall(real, synthetic, k)?;
    Ok(FidelityReport {
        marginal_error: marginal_error(real, synthetic)?,
        correlation_error: correlation_error(real, synthetic)?,
        c2st_error: c2st_error(real, synthetic, seed)?,
        precision,
        recall,
        jsd_error: jsd_error(real, synthetic, bins)?,
    })
}
