//! Distribution-distance primitives: per-column Kolmogorov-Smirnov, total
//! variation and Jensen-Shannon (base 2), histogram construction over a
//! fixed reference range, and their uniform table-level aggregation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{Cell, ColumnKind, ColumnSpec, Table};

/// Per-bin smoothing added to raw counts before normalization.
pub const DEFAULT_SMOOTHING: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("empty sample")]
    EmptySample,
    #[error("histograms have different bins")]
    BinMismatch,
    #[error("column {0:?} has no usable values")]
    AllMissing(String),
    #[error("need at least 2 bins, got {0}")]
    BadBins(usize),
    #[error("tables have different schemas")]
    SchemaMismatch,
    #[error("invalid histogram: {0}")]
    BadHistogram(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceKind {
    #[serde(rename = "ksd")]
    Ksd,
    #[serde(rename = "jsd")]
    Jsd,
}

impl std::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistanceKind::Ksd => write!(f, "KSD"),
            DistanceKind::Jsd => write!(f, "JSD"),
        }
    }
}

/// Bin identity of a histogram: numeric edges (length B+1) or category
/// labels (length B). Two histograms are comparable only when equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BinLayout {
    Edges(Vec<f64>),
    Categories(Vec<String>),
}

impl BinLayout {
    fn bin_count(&self) -> usize {
        match self {
            BinLayout::Edges(edges) => edges.len().saturating_sub(1),
            BinLayout::Categories(cats) => cats.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    layout: BinLayout,
    probabilities: Vec<f64>,
}

impl Histogram {
    pub fn new(layout: BinLayout, probabilities: Vec<f64>) -> Result<Self, DistanceError> {
        if layout.bin_count() != probabilities.len() {
            return Err(DistanceError::BadHistogram(format!(
                "{} bins but {} probabilities",
                layout.bin_count(),
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(DistanceError::BadHistogram(
                "probabilities must be non-negative".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(DistanceError::BadHistogram(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        if let BinLayout::Edges(edges) = &layout {
            if edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(DistanceError::BadHistogram(
                    "bin edges must be strictly increasing".into(),
                ));
            }
        }
        Ok(Histogram {
            layout,
            probabilities,
        })
    }

    pub fn categorical<S: Into<String>>(
        categories: impl IntoIterator<Item = S>,
        probabilities: Vec<f64>,
    ) -> Result<Self, DistanceError> {
        Histogram::new(
            BinLayout::Categories(categories.into_iter().map(Into::into).collect()),
            probabilities,
        )
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn layout(&self) -> &BinLayout {
        &self.layout
    }
}

/// Exact two-sample Kolmogorov-Smirnov statistic: the supremum of the
/// absolute ECDF difference, evaluated at every distinct merged point.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, DistanceError> {
    if a.is_empty() || b.is_empty() {
        return Err(DistanceError::EmptySample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let na = xs.len() as f64;
    let nb = ys.len() as f64;

    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < xs.len() || j < ys.len() {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        // counts are advanced through all ties, so this is the ECDF
        // difference at the point v itself
        let diff = (i as f64 / na - j as f64 / nb).abs();
        if diff > sup {
            sup = diff;
        }
    }
    Ok(sup)
}

/// Total variation distance between two histograms with identical bins.
pub fn tv_distance(pa: &Histogram, pb: &Histogram) -> Result<f64, DistanceError> {
    if pa.layout != pb.layout {
        return Err(DistanceError::BinMismatch);
    }
    Ok(pa
        .probabilities
        .iter()
        .zip(&pb.probabilities)
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
        / 2.0)
}

/// Jensen-Shannon divergence with base-2 logarithm, so the result is
/// bounded by 1. Zero-probability terms contribute zero.
pub fn jsd(pa: &Histogram, pb: &Histogram) -> Result<f64, DistanceError> {
    if pa.layout != pb.layout {
        return Err(DistanceError::BinMismatch);
    }
    let mut acc = 0.0;
    for (&p, &q) in pa.probabilities.iter().zip(&pb.probabilities) {
        let m = 0.5 * (p + q);
        if p > 0.0 {
            acc += 0.5 * p * (p / m).log2();
        }
        if q > 0.0 {
            acc += 0.5 * q * (q / m).log2();
        }
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// Equal-width bin edges over a reference range. A degenerate range is
/// widened by half a unit on both sides to keep the edges increasing.
pub fn numeric_edges(range: (f64, f64), bins: usize) -> Vec<f64> {
    let (mut min, mut max) = range;
    if min >= max {
        min -= 0.5;
        max += 0.5;
    }
    let width = (max - min) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| min + i as f64 * width).collect();
    edges.push(max);
    edges
}

/// Bin index for a value: half-open intervals `[e_i, e_{i+1})` with the
/// final bin closed; out-of-range values are clipped to the edge bins.
pub fn bin_index(value: f64, range: (f64, f64), bins: usize) -> usize {
    let (mut min, mut max) = range;
    if min >= max {
        min -= 0.5;
        max += 0.5;
    }
    let v = value.clamp(min, max);
    let idx = ((v - min) / (max - min) * bins as f64).floor() as usize;
    idx.min(bins - 1)
}

/// Histogram of a column's values against the column's reference data:
/// equal-width bins over the reference numeric range, or one bin per
/// category. Each raw count is incremented by `smoothing` before
/// normalizing. Missing (and out-of-vocabulary) values are skipped.
pub fn build_histogram(
    values: &[Cell],
    spec: &ColumnSpec,
    bins: usize,
    smoothing: f64,
) -> Result<Histogram, DistanceError> {
    match &spec.kind {
        ColumnKind::Numeric { range } => {
            if bins < 2 {
                return Err(DistanceError::BadBins(bins));
            }
            let mut counts = vec![0.0f64; bins];
            let mut seen = 0usize;
            for cell in values {
                if let Cell::Number(v) = cell {
                    counts[bin_index(*v, *range, bins)] += 1.0;
                    seen += 1;
                }
            }
            if seen == 0 {
                return Err(DistanceError::AllMissing(spec.name.clone()));
            }
            normalize(BinLayout::Edges(numeric_edges(*range, bins)), counts, smoothing)
        }
        ColumnKind::Categorical { categories } => {
            let mut counts = vec![0.0f64; categories.len()];
            let mut seen = 0usize;
            for cell in values {
                if let Cell::Category(s) = cell {
                    if let Some(pos) = categories.iter().position(|c| c == s) {
                        counts[pos] += 1.0;
                        seen += 1;
                    }
                }
            }
            if seen == 0 {
                return Err(DistanceError::AllMissing(spec.name.clone()));
            }
            normalize(BinLayout::Categories(categories.clone()), counts, smoothing)
        }
    }
}

fn normalize(
    layout: BinLayout,
    counts: Vec<f64>,
    smoothing: f64,
) -> Result<Histogram, DistanceError> {
    let smoothed: Vec<f64> = counts.iter().map(|c| c + smoothing).collect();
    let total: f64 = smoothed.iter().sum();
    Histogram::new(layout, smoothed.iter().map(|c| c / total).collect())
}

/// Table-level distance: the uniform mean of per-column distances. Under
/// `Ksd`, numeric columns use the exact KS statistic on raw values and
/// categorical columns total variation on category histograms; under
/// `Jsd`, every column uses the Jensen-Shannon divergence of its histogram
/// (numeric columns binned over the reference range).
pub fn table_distance(
    a: &Table,
    b: &Table,
    kind: DistanceKind,
    bins: usize,
) -> Result<f64, DistanceError> {
    if a.schema() != b.schema() {
        return Err(DistanceError::SchemaMismatch);
    }
    if a.is_empty() || b.is_empty() {
        return Err(DistanceError::EmptySample);
    }
    let mut total = 0.0;
    for (index, col) in a.schema().columns.iter().enumerate() {
        total += column_distance(a, b, index, col, kind, bins)?;
    }
    Ok(total / a.schema().columns.len() as f64)
}

pub(crate) fn column_distance(
    a: &Table,
    b: &Table,
    index: usize,
    spec: &ColumnSpec,
    kind: DistanceKind,
    bins: usize,
) -> Result<f64, DistanceError> {
    match kind {
        DistanceKind::Ksd => match &spec.kind {
            ColumnKind::Numeric { .. } => {
                ks_statistic(&a.numeric_column(index), &b.numeric_column(index))
            }
            ColumnKind::Categorical { .. } => {
                let values_a: Vec<Cell> = a.column(index).cloned().collect();
                let values_b: Vec<Cell> = b.column(index).cloned().collect();
                let ha = build_histogram(&values_a, spec, bins.max(2), DEFAULT_SMOOTHING)?;
                let hb = build_histogram(&values_b, spec, bins.max(2), DEFAULT_SMOOTHING)?;
                tv_distance(&ha, &hb)
            }
        },
        DistanceKind::Jsd => {
            let values_a: Vec<Cell> = a.column(index).cloned().collect();
            let values_b: Vec<Cell> = b.column(index).cloned().collect();
            let ha = build_histogram(&values_a, spec, bins, DEFAULT_SMOOTHING)?;
            let hb = build_histogram(&values_b, spec, bins, DEFAULT_SMOOTHING)?;
            jsd(&ha, &hb)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{ColumnSpec, Schema};
    use approx::assert_relative_eq;

    fn hist2(p0: f64, p1: f64) -> Histogram {
        Histogram::categorical(["a", "b"], vec![p0, p1]).unwrap()
    }

    #[test]
    fn ks_identical_and_disjoint() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn ks_overlapping_samples() {
        // ECDF difference peaks at x in {2, 3}: |2/4 - 0/4| = 0.5
        let d = ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(d, 0.5);
    }

    #[test]
    fn ks_rejects_empty() {
        assert!(matches!(
            ks_statistic(&[], &[1.0]),
            Err(DistanceError::EmptySample)
        ));
    }

    #[test]
    fn tv_basic_cases() {
        assert_eq!(tv_distance(&hist2(0.5, 0.5), &hist2(0.5, 0.5)).unwrap(), 0.0);
        assert_eq!(tv_distance(&hist2(1.0, 0.0), &hist2(0.0, 1.0)).unwrap(), 1.0);
        assert_relative_eq!(
            tv_distance(&hist2(0.75, 0.25), &hist2(0.25, 0.75)).unwrap(),
            0.5
        );
    }

    #[test]
    fn tv_bin_mismatch() {
        let three = Histogram::categorical(["a", "b", "c"], vec![0.4, 0.3, 0.3]).unwrap();
        assert!(matches!(
            tv_distance(&hist2(0.5, 0.5), &three),
            Err(DistanceError::BinMismatch)
        ));
    }

    #[test]
    fn jsd_basic_cases() {
        assert_eq!(jsd(&hist2(0.3, 0.7), &hist2(0.3, 0.7)).unwrap(), 0.0);
        assert_eq!(jsd(&hist2(1.0, 0.0), &hist2(0.0, 1.0)).unwrap(), 1.0);
        // direct formula with m = (0.75, 0.25)
        let expected = 0.5 * (4.0f64 / 3.0).log2()
            + 0.5 * (0.5 * (2.0f64 / 3.0).log2() + 0.5 * 2.0f64.log2());
        let got = jsd(&hist2(1.0, 0.0), &hist2(0.5, 0.5)).unwrap();
        assert_relative_eq!(got, expected, epsilon = 1e-15);
        assert_relative_eq!(got, 0.311278, epsilon = 1e-6);
    }

    #[test]
    fn histogram_binning_rule() {
        let spec = ColumnSpec::numeric("x", 0.0, 10.0);
        let values = vec![Cell::Number(0.0), Cell::Number(5.0), Cell::Number(10.0)];
        let h = build_histogram(&values, &spec, 2, 0.0).unwrap();
        // [0,5) gets {0}, [5,10] gets {5, 10}
        assert_relative_eq!(h.probabilities()[0], 1.0 / 3.0);
        assert_relative_eq!(h.probabilities()[1], 2.0 / 3.0);
    }

    #[test]
    fn histogram_clips_out_of_range() {
        let spec = ColumnSpec::numeric("x", 0.0, 10.0);
        let values = vec![Cell::Number(-5.0), Cell::Number(50.0)];
        let h = build_histogram(&values, &spec, 2, 0.0).unwrap();
        assert_eq!(h.probabilities(), &[0.5, 0.5]);
    }

    #[test]
    fn histogram_zero_smoothing_keeps_empty_bins_zero() {
        let spec = ColumnSpec::numeric("x", 0.0, 10.0);
        let values = vec![Cell::Number(1.0)];
        let h = build_histogram(&values, &spec, 2, 0.0).unwrap();
        assert_eq!(h.probabilities(), &[1.0, 0.0]);
    }

    #[test]
    fn histogram_categorical_counts() {
        let spec = ColumnSpec::categorical("c", ["A", "B"]);
        let values = vec![
            Cell::Category("A".into()),
            Cell::Category("A".into()),
            Cell::Category("A".into()),
            Cell::Category("B".into()),
        ];
        let h = build_histogram(&values, &spec, 2, 0.0).unwrap();
        assert_eq!(h.probabilities(), &[0.75, 0.25]);
    }

    #[test]
    fn histogram_all_missing_is_an_error() {
        let spec = ColumnSpec::numeric("x", 0.0, 10.0);
        assert!(matches!(
            build_histogram(&[Cell::Missing], &spec, 2, 0.0),
            Err(DistanceError::AllMissing(_))
        ));
    }

    fn single_numeric_table(values: &[f64]) -> Table {
        let schema = Schema::new(vec![ColumnSpec::numeric("x", 0.0, 1.0)], None).unwrap();
        Table::new(
            schema,
            values.iter().map(|&v| vec![Cell::Number(v)]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn table_distance_identity_and_reduction() {
        let a = single_numeric_table(&[0.1, 0.4, 0.9]);
        assert_eq!(table_distance(&a, &a, DistanceKind::Ksd, 50).unwrap(), 0.0);
        assert_eq!(table_distance(&a, &a, DistanceKind::Jsd, 50).unwrap(), 0.0);

        let zeros = single_numeric_table(&[0.0, 0.0]);
        let ones = single_numeric_table(&[1.0, 1.0]);
        assert_eq!(
            table_distance(&zeros, &ones, DistanceKind::Ksd, 50).unwrap(),
            1.0
        );
    }

    #[test]
    fn table_distance_is_mean_over_columns() {
        // one numeric column with KS 1.0, one categorical with TV 0.0
        let schema = Schema::new(
            vec![
                ColumnSpec::numeric("x", 0.0, 1.0),
                ColumnSpec::categorical("c", ["A"]),
            ],
            None,
        )
        .unwrap();
        let a = Table::new(
            schema.clone(),
            vec![vec![Cell::Number(0.0), Cell::Category("A".into())]],
        )
        .unwrap();
        let b = Table::new(
            schema,
            vec![vec![Cell::Number(1.0), Cell::Category("A".into())]],
        )
        .unwrap();
        let d = table_distance(&a, &b, DistanceKind::Ksd, 50).unwrap();
        assert_relative_eq!(d, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn table_distance_schema_mismatch() {
        let a = single_numeric_table(&[0.1]);
        let schema = Schema::new(vec![ColumnSpec::numeric("y", 0.0, 1.0)], None).unwrap();
        let b = Table::new(schema, vec![vec![Cell::Number(0.2)]]).unwrap();
        assert!(matches!(
            table_distance(&a, &b, DistanceKind::Ksd, 50),
            Err(DistanceError::SchemaMismatch)
        ));
    }

    #[test]
    fn table_distance_symmetry() {
        let a = single_numeric_table(&[0.1, 0.2, 0.3, 0.8]);
        let b = single_numeric_table(&[0.2, 0.5, 0.9]);
        for kind in [DistanceKind::Ksd, DistanceKind::Jsd] {
            let ab = table_distance(&a, &b, kind, 10).unwrap();
            let ba = table_distance(&b, &a, kind, 10).unwrap();
            assert_relative_eq!(ab, ba, epsilon = 1e-12);
        }
    }
}
