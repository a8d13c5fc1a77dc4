//! Self-contained learners backing the classifier two-sample test and the
//! train-on-synthetic protocol: full-batch gradient-descent logistic
//! regression and a gradient-boosted ensemble of shallow regression trees.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("empty training set")]
    Empty,
    #[error("feature row {0} has inconsistent width")]
    WidthMismatch(usize),
    #[error("non-finite feature or target value")]
    NonFinite,
    #[error("labels are constant; nothing to learn")]
    ConstantLabels,
}

fn check_features(features: &[Vec<f64>]) -> Result<usize, LearnerError> {
    let first = features.first().ok_or(LearnerError::Empty)?;
    let width = first.len();
    for (i, row) in features.iter().enumerate() {
        if row.len() != width {
            return Err(LearnerError::WidthMismatch(i));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(LearnerError::NonFinite);
        }
    }
    Ok(width)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Binary logistic regression; the last weight is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
}

impl LogisticModel {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let (coefs, intercept) = self.weights.split_at(self.weights.len() - 1);
        let z: f64 = coefs.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + intercept[0];
        sigmoid(z)
    }
}

const LOGISTIC_MAX_EPOCHS: usize = 500;
const LOGISTIC_GRAD_TOL: f64 = 1e-6;

/// Full-batch gradient descent on the log loss until the gradient norm
/// drops below 1e-6 or 500 epochs elapse. Deterministic: weights start at
/// zero and the step size is derived from the data.
pub fn train_logistic(
    features: &[Vec<f64>],
    labels: &[bool],
) -> Result<LogisticModel, LearnerError> {
    let width = check_features(features)?;
    if features.len() != labels.len() {
        return Err(LearnerError::WidthMismatch(labels.len()));
    }
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == labels.len() {
        return Err(LearnerError::ConstantLabels);
    }

    let n = features.len() as f64;
    // Lipschitz bound on the log-loss Hessian: max row norm (with the
    // implicit intercept feature) over 4.
    let max_sq_norm = features
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0)
        .fold(1.0f64, f64::max);
    let lr = 4.0 / max_sq_norm;

    let mut weights = vec![0.0f64; width + 1];
    let mut grad = vec![0.0f64; width + 1];
    for _ in 0..LOGISTIC_MAX_EPOCHS {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (row, &label) in features.iter().zip(labels) {
            let z: f64 = weights[..width]
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>()
                + weights[width];
            let err = sigmoid(z) - if label { 1.0 } else { 0.0 };
            for (g, x) in grad[..width].iter_mut().zip(row) {
                *g += err * x;
            }
            grad[width] += err;
        }
        let mut norm_sq = 0.0;
        for (w, g) in weights.iter_mut().zip(&grad) {
            let step = g / n;
            *w -= lr * step;
            norm_sq += step * step;
        }
        if norm_sq.sqrt() < LOGISTIC_GRAD_TOL {
            break;
        }
    }
    Ok(LogisticModel { weights })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GbtLoss {
    Squared,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub min_child_rows: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            rounds: 200,
            max_depth: 3,
            learning_rate: 0.1,
            lambda: 1.0,
            min_child_rows: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TreeNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn predict(&self, row: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf(v) => *v,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] < *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    base_score: f64,
    trees: Vec<TreeNode>,
    learning_rate: f64,
    loss: GbtLoss,
}

impl GbtModel {
    /// Raw margin (regression value or log-odds).
    pub fn predict_margin(&self, row: &[f64]) -> f64 {
        self.base_score
            + self.learning_rate
                * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    /// Probability under the logistic loss, raw value otherwise.
    pub fn predict(&self, row: &[f64]) -> f64 {
        match self.loss {
            GbtLoss::Squared => self.predict_margin(row),
            GbtLoss::Logistic => sigmoid(self.predict_margin(row)),
        }
    }

    pub fn describe(&self, params: &GbtParams) -> String {
        let loss = match self.loss {
            GbtLoss::Squared => "squared",
            GbtLoss::Logistic => "log",
        };
        format!(
            "gbt(depth={}, rounds={}, lr={}, loss={loss})",
            params.max_depth, params.rounds, params.learning_rate
        )
    }
}

/// Gradient boosting with second-order leaf weights. For the logistic loss
/// the targets must be 0/1 and both classes must appear.
pub fn train_gbt(
    features: &[Vec<f64>],
    targets: &[f64],
    loss: GbtLoss,
    params: &GbtParams,
) -> Result<GbtModel, LearnerError> {
    check_features(features)?;
    if features.len() != targets.len() {
        return Err(LearnerError::WidthMismatch(targets.len()));
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(LearnerError::NonFinite);
    }

    let n = targets.len();
    let base_score = match loss {
        GbtLoss::Squared => targets.iter().sum::<f64>() / n as f64,
        GbtLoss::Logistic => {
            let positives = targets.iter().filter(|&&t| t > 0.5).count();
            if positives == 0 || positives == n {
                return Err(LearnerError::ConstantLabels);
            }
            let rate = positives as f64 / n as f64;
            (rate / (1.0 - rate)).ln()
        }
    };

    let mut margins = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.rounds);
    let all_indices: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0f64; n];
    let mut hess = vec![0.0f64; n];

    for _ in 0..params.rounds {
        for i in 0..n {
            match loss {
                GbtLoss::Squared => {
                    grad[i] = margins[i] - targets[i];
                    hess[i] = 1.0;
                }
                GbtLoss::Logistic => {
                    let p = sigmoid(margins[i]);
                    grad[i] = p - targets[i];
                    hess[i] = (p * (1.0 - p)).max(1e-12);
                }
            }
        }
        let tree = build_node(features, &grad, &hess, &all_indices, 0, params);
        for (i, row) in features.iter().enumerate() {
            margins[i] += params.learning_rate * tree.predict(row);
        }
        trees.push(tree);
    }

    Ok(GbtModel {
        base_score,
        trees,
        learning_rate: params.learning_rate,
        loss,
    })
}

fn leaf_value(grad_sum: f64, hess_sum: f64, lambda: f64) -> f64 {
    -grad_sum / (hess_sum + lambda)
}

fn node_score(grad_sum: f64, hess_sum: f64, lambda: f64) -> f64 {
    grad_sum * grad_sum / (hess_sum + lambda)
}

fn build_node(
    features: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    indices: &[usize],
    depth: usize,
    params: &GbtParams,
) -> TreeNode {
    let grad_sum: f64 = indices.iter().map(|&i| grad[i]).sum();
    let hess_sum: f64 = indices.iter().map(|&i| hess[i]).sum();
    if depth >= params.max_depth || indices.len() < 2 * params.min_child_rows {
        return TreeNode::Leaf(leaf_value(grad_sum, hess_sum, params.lambda));
    }

    let width = features[0].len();
    let parent_score = node_score(grad_sum, hess_sum, params.lambda);
    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)

    let mut sorted: Vec<(f64, f64, f64)> = Vec::with_capacity(indices.len());
    for feature in 0..width {
        sorted.clear();
        sorted.extend(
            indices
                .iter()
                .map(|&i| (features[i][feature], grad[i], hess[i])),
        );
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut gl = 0.0;
        let mut hl = 0.0;
        for pos in 0..sorted.len() - 1 {
            gl += sorted[pos].1;
            hl += sorted[pos].2;
            // splits sit between distinct consecutive values
            if sorted[pos].0 == sorted[pos + 1].0 {
                continue;
            }
            let left_rows = pos + 1;
            let right_rows = sorted.len() - left_rows;
            if left_rows < params.min_child_rows || right_rows < params.min_child_rows {
                continue;
            }
            let gain = 0.5
                * (node_score(gl, hl, params.lambda)
                    + node_score(grad_sum - gl, hess_sum - hl, params.lambda)
                    - parent_score);
            if gain > best.map_or(1e-12, |(g, _, _)| g) {
                let threshold = 0.5 * (sorted[pos].0 + sorted[pos + 1].0);
                best = Some((gain, feature, threshold));
            }
        }
    }

    match best {
        None => TreeNode::Leaf(leaf_value(grad_sum, hess_sum, params.lambda)),
        Some((_, feature, threshold)) => {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .partition(|&&i| features[i][feature] < threshold);
            let left = build_node(features, grad, hess, &left_idx, depth + 1, params);
            let right = build_node(features, grad, hess, &right_idx, depth + 1, params);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    }
}
