//! Independent scorer for candidate groups, used to cross-check the
//! residual selection. Every distance here is computed from first
//! principles (brute-force ECDF enumeration, direct divergence formulas,
//! its own binning) without touching the main distance code path.

use crate::distances::DistanceKind;
use crate::residual::{argmin_group, CandidateGroup, ResidualError};
use crate::table::{Cell, ColumnKind, Table};

const SMOOTHING: f64 = 1e-6;

/// Exhaustively score `groups` and return the argmin under the same
/// tie-break rule as `compute_residual`.
pub fn oracle_residual(
    real: &Table,
    generated: &Table,
    kind: DistanceKind,
    groups: &[CandidateGroup],
    bins: usize,
) -> Result<CandidateGroup, ResidualError> {
    if groups.is_empty() {
        return Err(ResidualError::NoViableGroups);
    }
    let mut scored = groups.to_vec();
    for group in &mut scored {
        let members = real.subset(&group.row_indices)?;
        let candidate = if generated.is_empty() {
            members
        } else {
            generated.concat(&members)?
        };
        group.distance = Some(oracle_table_distance(real, &candidate, kind, bins));
    }
    let best = argmin_group(&scored).expect("groups non-empty");
    Ok(scored[best].clone())
}

fn oracle_table_distance(a: &Table, b: &Table, kind: DistanceKind, bins: usize) -> f64 {
    let columns = &a.schema().columns;
    let total: f64 = columns
        .iter()
        .enumerate()
        .map(|(index, spec)| match (kind, &spec.kind) {
            (DistanceKind::Ksd, ColumnKind::Numeric { .. }) => {
                brute_force_ks(&a.numeric_column(index), &b.numeric_column(index))
            }
            (DistanceKind::Ksd, ColumnKind::Categorical { categories }) => {
                let pa = category_probs(a, index, categories);
                let pb = category_probs(b, index, categories);
                pa.iter().zip(&pb).map(|(p, q)| (p - q).abs()).sum::<f64>() / 2.0
            }
            (DistanceKind::Jsd, ColumnKind::Numeric { range }) => {
                let pa = binned_probs(a, index, *range, bins);
                let pb = binned_probs(b, index, *range, bins);
                direct_jsd(&pa, &pb)
            }
            (DistanceKind::Jsd, ColumnKind::Categorical { categories }) => {
                let pa = category_probs(a, index, categories);
                let pb = category_probs(b, index, categories);
                direct_jsd(&pa, &pb)
            }
        })
        .sum();
    total / columns.len() as f64
}

/// KS by evaluating |ECDF_a(x) - ECDF_b(x)| at every merged sample point
/// with a counting pass per point.
pub fn brute_force_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut points: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let mut sup = 0.0f64;
    for &x in &points {
        let ca = a.iter().filter(|&&v| v <= x).count() as f64;
        let cb = b.iter().filter(|&&v| v <= x).count() as f64;
        let diff = (ca / na - cb / nb).abs();
        if diff > sup {
            sup = diff;
        }
    }
    sup
}

fn category_probs(table: &Table, index: usize, categories: &[String]) -> Vec<f64> {
    let mut counts = vec![0.0f64; categories.len()];
    for cell in table.column(index) {
        if let Cell::Category(s) = cell {
            if let Some(pos) = categories.iter().position(|c| c == s) {
                counts[pos] += 1.0;
            }
        }
    }
    smooth(&counts)
}

fn binned_probs(table: &Table, index: usize, range: (f64, f64), bins: usize) -> Vec<f64> {
    let (mut min, mut max) = range;
    if min >= max {
        min -= 0.5;
        max += 0.5;
    }
    let mut counts = vec![0.0f64; bins];
    for cell in table.column(index) {
        if let Cell::Number(v) = cell {
            let clipped = v.clamp(min, max);
            let idx = (((clipped - min) / (max - min)) * bins as f64).floor() as usize;
            counts[idx.min(bins - 1)] += 1.0;
        }
    }
    smooth(&counts)
}

fn smooth(counts: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().map(|c| c + SMOOTHING).sum();
    counts.iter().map(|c| (c + SMOOTHING) / total).collect()
}

/// Direct-formula Jensen-Shannon divergence, base 2.
pub fn direct_jsd(pa: &[f64], pb: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&p, &q) in pa.iter().zip(pb) {
        let m = 0.5 * (p + q);
        if p > 0.0 {
            acc += 0.5 * p * (p / m).log2();
        }
        if q > 0.0 {
            acc += 0.5 * q * (q / m).log2();
        }
    }
    acc.clamp(0.0, 1.0)
}
