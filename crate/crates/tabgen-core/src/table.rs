//! Typed tabular data model: CSV ingestion with schema inference, JSON row
//! (de)serialization in the prompt format, train/holdout splitting, and
//! numeric encoding of rows for distance and metric computations.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected {expected} columns, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("empty table: {0}")]
    Empty(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("no JSON array of objects found in reply ({} bytes)", raw.len())]
    NoJsonArray { raw: String },
    #[error("row {row} does not conform to schema: {reason}")]
    RowConformance { row: usize, reason: String },
    #[error("row index {0} out of bounds")]
    BadIndex(usize),
    #[error("need at least 2 rows to split, got {0}")]
    TooFewRows(usize),
    #[error("split fraction must lie in (0,1), got {0}")]
    BadFraction(f64),
}

/// Column type plus the per-kind reference data used by encoders and
/// histogram builders: observed numeric range, or the category vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric { range: (f64, f64) },
    Categorical { categories: Vec<String> },
}

impl ColumnKind {
    pub fn is_numeric(&self) -> bool {
        matches!(self, ColumnKind::Numeric { .. })
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, ColumnKind::Categorical { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn numeric(name: impl Into<String>, min: f64, max: f64) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Numeric { range: (min, max) },
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Categorical {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        }
    }

    /// Numeric range reference, `None` for categorical columns.
    pub fn range(&self) -> Option<(f64, f64)> {
        match &self.kind {
            ColumnKind::Numeric { range } => Some(*range),
            ColumnKind::Categorical { .. } => None,
        }
    }

    /// Category vocabulary, `None` for numeric columns.
    pub fn categories(&self) -> Option<&[String]> {
        match &self.kind {
            ColumnKind::Numeric { .. } => None,
            ColumnKind::Categorical { categories } => Some(categories),
        }
    }

    fn validate(&self) -> Result<(), TableError> {
        match &self.kind {
            ColumnKind::Numeric { range: (min, max) } => {
                if !min.is_finite() || !max.is_finite() {
                    return Err(TableError::Schema(format!(
                        "column {}: numeric range must be finite",
                        self.name
                    )));
                }
                if min > max {
                    return Err(TableError::Schema(format!(
                        "column {}: numeric range min {} exceeds max {}",
                        self.name, min, max
                    )));
                }
            }
            ColumnKind::Categorical { categories } => {
                if categories.is_empty() {
                    return Err(TableError::Schema(format!(
                        "column {}: categorical column needs at least one category",
                        self.name
                    )));
                }
                let mut seen = HashSet::new();
                for c in categories {
                    if !seen.insert(c.as_str()) {
                        return Err(TableError::Schema(format!(
                            "column {}: duplicate category {c:?}",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_column: Option<String>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>, target_column: Option<String>) -> Result<Self, TableError> {
        let schema = Schema {
            columns,
            target_column,
        };
        schema.validate()?;
        Ok(schema)
    }

    fn validate(&self) -> Result<(), TableError> {
        let mut names = HashSet::new();
        for col in &self.columns {
            col.validate()?;
            if !names.insert(col.name.as_str()) {
                return Err(TableError::Schema(format!(
                    "duplicate column name {:?}",
                    col.name
                )));
            }
        }
        if let Some(target) = &self.target_column {
            if !names.contains(target.as_str()) {
                return Err(TableError::Schema(format!(
                    "target column {target:?} not in schema"
                )));
            }
        }
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Column names and kinds match position by position; reference data
    /// (ranges, vocabularies) may differ.
    pub fn compatible_with(&self, other: &Schema) -> bool {
        self.columns.len() == other.columns.len()
            && self
                .columns
                .iter()
                .zip(&other.columns)
                .all(|(a, b)| a.name == b.name && a.kind.is_numeric() == b.kind.is_numeric())
    }

    /// Copy of `self` whose categorical vocabularies are extended with any
    /// categories `other` has that `self` lacks. Used so that two tables of
    /// the same shape but different observed vocabularies can share one
    /// encoding/histogram reference.
    pub fn with_union_categories(&self, other: &Schema) -> Schema {
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| match (&a.kind, &b.kind) {
                (
                    ColumnKind::Categorical { categories },
                    ColumnKind::Categorical {
                        categories: extras, ..
                    },
                ) => {
                    let mut merged = categories.clone();
                    for c in extras {
                        if !merged.contains(c) {
                            merged.push(c.clone());
                        }
                    }
                    ColumnSpec {
                        name: a.name.clone(),
                        kind: ColumnKind::Categorical { categories: merged },
                    }
                }
                _ => a.clone(),
            })
            .collect();
        Schema {
            columns,
            target_column: self.target_column.clone(),
        }
    }
}

/// One table cell. Numbers are always finite; `Missing` round-trips as JSON
/// null and empty CSV fields.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Category(String),
    Missing,
}

impl Cell {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_category(&self) -> Option<&str> {
        match self {
            Cell::Category(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Number(v) => number_to_json(*v).serialize(serializer),
            Cell::Category(s) => serializer.serialize_str(s),
            Cell::Missing => serializer.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::Null => Ok(Cell::Missing),
            serde_json::Value::Number(n) => {
                let v = n
                    .as_f64()
                    .ok_or_else(|| D::Error::custom("non-finite number"))?;
                Ok(Cell::Number(v))
            }
            serde_json::Value::String(s) => Ok(Cell::Category(s)),
            other => Err(D::Error::custom(format!("unexpected cell value {other}"))),
        }
    }
}

/// JSON representation of a finite float: integral values serialize without
/// a fractional part (`25`, not `25.0`), matching the prompt row format.
pub(crate) fn number_to_json(v: f64) -> serde_json::Value {
    if v.fract() == 0.0 && v.abs() <= 9.0e15 {
        serde_json::Value::from(v as i64)
    } else {
        serde_json::Value::from(v)
    }
}

/// Canonical text form of a number, shared by CSV output and category
/// coercion so the two stay consistent.
pub(crate) fn number_to_text(v: f64) -> String {
    number_to_json(v).to_string()
}

/// Schema plus rows. Immutable after construction; every row is validated
/// for length and per-column cell kind (categories may be out-of-vocabulary
/// when the rows came from a tolerant parse).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    schema: Schema,
    rows: Vec<Vec<Cell>>,
}

impl<'de> Deserialize<'de> for Table {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            schema: Schema,
            rows: Vec<Vec<Cell>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        Table::new(raw.schema, raw.rows).map_err(D::Error::custom)
    }
}

impl Table {
    pub fn new(schema: Schema, rows: Vec<Vec<Cell>>) -> Result<Self, TableError> {
        schema.validate()?;
        for (i, row) in rows.iter().enumerate() {
            check_row(&schema, row).map_err(|reason| TableError::RowConformance { row: i, reason })?;
        }
        Ok(Table { schema, rows })
    }

    pub fn empty(schema: Schema) -> Result<Self, TableError> {
        Table::new(schema, Vec::new())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, index: usize) -> Option<&[Cell]> {
        self.rows.get(index).map(|r| r.as_slice())
    }

    /// Cells of one column, in row order.
    pub fn column(&self, index: usize) -> impl Iterator<Item = &Cell> {
        self.rows.iter().map(move |r| &r[index])
    }

    /// Present (non-missing) numeric values of one column.
    pub fn numeric_column(&self, index: usize) -> Vec<f64> {
        self.column(index).filter_map(Cell::as_number).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Table, TableError> {
        let mut rows = Vec::with_capacity(indices.len());
        for &i in indices {
            rows.push(
                self.rows
                    .get(i)
                    .ok_or(TableError::BadIndex(i))?
                    .clone(),
            );
        }
        Ok(Table {
            schema: self.schema.clone(),
            rows,
        })
    }

    /// Rows of `self` followed by rows of `other`; schemas must be equal.
    pub fn concat(&self, other: &Table) -> Result<Table, TableError> {
        if self.schema != other.schema {
            return Err(TableError::Schema(
                "cannot concatenate tables with different schemas".into(),
            ));
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(Table {
            schema: self.schema.clone(),
            rows,
        })
    }

    /// Append pre-validated rows (each checked against the schema).
    pub fn append_rows(&mut self, rows: Vec<Vec<Cell>>) -> Result<(), TableError> {
        for (i, row) in rows.iter().enumerate() {
            check_row(&self.schema, row).map_err(|reason| TableError::RowConformance {
                row: self.rows.len() + i,
                reason,
            })?;
        }
        self.rows.extend(rows);
        Ok(())
    }

    pub fn truncate(&mut self, len: usize) {
        self.rows.truncate(len);
    }

    /// Copy of the table without the named column.
    pub fn drop_column(&self, name: &str) -> Result<Table, TableError> {
        let idx = self
            .schema
            .column_index(name)
            .ok_or_else(|| TableError::Schema(format!("no column named {name:?}")))?;
        let columns = self
            .schema
            .columns
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, c)| c.clone())
            .collect();
        let target = match &self.schema.target_column {
            Some(t) if t == name => None,
            other => other.clone(),
        };
        let schema = Schema::new(columns, target)?;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != idx)
                    .map(|(_, c)| c.clone())
                    .collect()
            })
            .collect();
        Ok(Table { schema, rows })
    }

    /// Write the table as CSV with the schema's header.
    pub fn write_csv(&self, path: &Path) -> Result<(), TableError> {
        let mut writer =
            csv::Writer::from_path(path).map_err(|e| map_csv_open_error(path, e))?;
        writer.write_record(self.schema.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|cell| match cell {
                Cell::Number(v) => number_to_text(*v),
                Cell::Category(s) => s.clone(),
                Cell::Missing => String::new(),
            }))?;
        }
        writer.flush().map_err(|source| TableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(())
    }
}

fn check_row(schema: &Schema, row: &[Cell]) -> Result<(), String> {
    if row.len() != schema.columns.len() {
        return Err(format!(
            "expected {} cells, found {}",
            schema.columns.len(),
            row.len()
        ));
    }
    for (cell, col) in row.iter().zip(&schema.columns) {
        match (cell, &col.kind) {
            (Cell::Missing, _) => {}
            (Cell::Number(v), ColumnKind::Numeric { .. }) => {
                if !v.is_finite() {
                    return Err(format!("column {}: non-finite number", col.name));
                }
            }
            (Cell::Category(_), ColumnKind::Categorical { .. }) => {}
            (Cell::Number(_), ColumnKind::Categorical { .. }) => {
                return Err(format!("column {}: number in categorical column", col.name));
            }
            (Cell::Category(_), ColumnKind::Numeric { .. }) => {
                return Err(format!("column {}: category in numeric column", col.name));
            }
        }
    }
    Ok(())
}

/// Dataset manifest: declared column kinds (and optionally vocabularies),
/// overriding CSV schema inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub columns: Vec<ManifestColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestColumn {
    pub name: String,
    pub kind: ManifestKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestKind {
    Numeric,
    Categorical,
}

impl DatasetManifest {
    pub fn from_path(path: &Path) -> Result<Self, TableError> {
        let text = std::fs::read_to_string(path).map_err(|source| TableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| TableError::Manifest(e.to_string()))
    }

    /// Manifest describing an already-built schema, e.g. for `infer-schema`.
    pub fn from_schema(schema: &Schema) -> Self {
        DatasetManifest {
            columns: schema
                .columns
                .iter()
                .map(|c| match &c.kind {
                    ColumnKind::Numeric { .. } => ManifestColumn {
                        name: c.name.clone(),
                        kind: ManifestKind::Numeric,
                        categories: None,
                    },
                    ColumnKind::Categorical { categories } => ManifestColumn {
                        name: c.name.clone(),
                        kind: ManifestKind::Categorical,
                        categories: Some(categories.clone()),
                    },
                })
                .collect(),
            target: schema.target_column.clone(),
        }
    }
}

/// Load a CSV file with a header row. Without a manifest, a column is
/// numeric iff every non-empty cell parses as a finite real number;
/// otherwise it is categorical with categories in first-appearance order.
/// A manifest fixes the kinds instead (names matched as a set); numeric
/// ranges are always observed from the data.
pub fn load_csv(path: &Path, manifest: Option<&DatasetManifest>) -> Result<Table, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| map_csv_open_error(path, e))?;

    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.is_empty() {
        return Err(TableError::Empty(format!(
            "{} has no header columns",
            path.display()
        )));
    }

    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(map_csv_row_error)?;
        raw_rows.push(record.iter().map(|f| f.to_string()).collect());
    }
    if raw_rows.is_empty() {
        return Err(TableError::Empty(format!(
            "{} has a header but no data rows",
            path.display()
        )));
    }

    let kinds = resolve_kinds(&headers, &raw_rows, manifest)?;

    let mut columns = Vec::with_capacity(headers.len());
    for (c, name) in headers.iter().enumerate() {
        match kinds[c] {
            ResolvedKind::Numeric => {
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for (r, row) in raw_rows.iter().enumerate() {
                    let field = &row[c];
                    if field.is_empty() {
                        continue;
                    }
                    let v = parse_finite(field).ok_or_else(|| TableError::Manifest(format!(
                        "column {name:?} declared numeric but row {} holds {field:?}",
                        r + 1
                    )))?;
                    min = min.min(v);
                    max = max.max(v);
                }
                if min > max {
                    // column entirely missing; keep a degenerate range
                    min = 0.0;
                    max = 0.0;
                }
                columns.push(ColumnSpec::numeric(name.clone(), min, max));
            }
            ResolvedKind::Categorical => {
                let mut categories: Vec<String> = manifest
                    .and_then(|m| m.columns.iter().find(|mc| &mc.name == name))
                    .and_then(|mc| mc.categories.clone())
                    .unwrap_or_default();
                let mut seen: HashSet<String> = categories.iter().cloned().collect();
                for row in &raw_rows {
                    let field = &row[c];
                    if field.is_empty() {
                        continue;
                    }
                    if seen.insert(field.clone()) {
                        categories.push(field.clone());
                    }
                }
                if categories.is_empty() {
                    return Err(TableError::Empty(format!(
                        "column {name:?} has no observed values"
                    )));
                }
                columns.push(ColumnSpec::categorical(name.clone(), categories));
            }
        }
    }

    let target = manifest.and_then(|m| m.target.clone());
    let schema = Schema::new(columns, target)?;

    let rows = raw_rows
        .iter()
        .map(|raw| {
            raw.iter()
                .zip(&schema.columns)
                .map(|(field, col)| {
                    if field.is_empty() {
                        Cell::Missing
                    } else if col.kind.is_numeric() {
                        Cell::Number(parse_finite(field).expect("validated above"))
                    } else {
                        Cell::Category(field.clone())
                    }
                })
                .collect()
        })
        .collect();

    Table::new(schema, rows)
}

enum ResolvedKind {
    Numeric,
    Categorical,
}

fn resolve_kinds(
    headers: &[String],
    raw_rows: &[Vec<String>],
    manifest: Option<&DatasetManifest>,
) -> Result<Vec<ResolvedKind>, TableError> {
    if let Some(manifest) = manifest {
        let declared: HashSet<&str> = manifest.columns.iter().map(|c| c.name.as_str()).collect();
        let present: HashSet<&str> = headers.iter().map(|h| h.as_str()).collect();
        if declared != present {
            return Err(TableError::Manifest(format!(
                "manifest columns {:?} do not match CSV header {:?}",
                {
                    let mut d: Vec<_> = declared.into_iter().collect();
                    d.sort_unstable();
                    d
                },
                headers
            )));
        }
        headers
            .iter()
            .map(|name| {
                let col = manifest
                    .columns
                    .iter()
                    .find(|c| &c.name == name)
                    .expect("set equality checked");
                Ok(match col.kind {
                    ManifestKind::Numeric => ResolvedKind::Numeric,
                    ManifestKind::Categorical => ResolvedKind::Categorical,
                })
            })
            .collect()
    } else {
        Ok((0..headers.len())
            .map(|c| {
                let all_numeric = raw_rows
                    .iter()
                    .filter(|row| !row[c].is_empty())
                    .all(|row| parse_finite(&row[c]).is_some());
                if all_numeric {
                    ResolvedKind::Numeric
                } else {
                    ResolvedKind::Categorical
                }
            })
            .collect())
    }
}

fn parse_finite(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn map_csv_row_error(e: csv::Error) -> TableError {
    if let csv::ErrorKind::UnequalLengths { pos, expected_len, len } = e.kind() {
        let line = pos.as_ref().map(|p| p.line()).unwrap_or(0);
        return TableError::RaggedRow {
            line,
            expected: *expected_len as usize,
            found: *len as usize,
        };
    }
    TableError::Csv(e)
}

fn map_csv_open_error(path: &Path, e: csv::Error) -> TableError {
    if matches!(e.kind(), csv::ErrorKind::Io(_)) {
        if let csv::ErrorKind::Io(source) = e.into_kind() {
            return TableError::Io {
                path: path.display().to_string(),
                source,
            };
        }
        unreachable!("kind checked above");
    }
    TableError::Csv(e)
}

/// Serialize the selected rows as a JSON array of flat objects whose key
/// order follows the schema. Missing cells become null.
pub fn serialize_rows_json(table: &Table, indices: &[usize]) -> Result<String, TableError> {
    let mut array = Vec::with_capacity(indices.len());
    for &i in indices {
        let row = table.row(i).ok_or(TableError::BadIndex(i))?;
        let mut object = serde_json::Map::new();
        for (cell, col) in row.iter().zip(&table.schema().columns) {
            let value = match cell {
                Cell::Number(v) => number_to_json(*v),
                Cell::Category(s) => serde_json::Value::String(s.clone()),
                Cell::Missing => serde_json::Value::Null,
            };
            object.insert(col.name.clone(), value);
        }
        array.push(serde_json::Value::Object(object));
    }
    serde_json::to_string(&serde_json::Value::Array(array))
        .map_err(|e| TableError::Schema(e.to_string()))
}

/// Everything `parse_rows_json` recovered from a generator reply.
#[derive(Debug, Default)]
pub struct ParsedRows {
    pub accepted: Vec<Vec<Cell>>,
    /// Raw object and rejection reason, in reply order.
    pub rejected: Vec<(serde_json::Value, String)>,
    /// Accepted category values absent from the schema vocabulary,
    /// as (column, value) pairs.
    pub out_of_vocab: Vec<(String, String)>,
}

/// Extract the first JSON array of objects from `text` (replies may wrap it
/// in prose or code fences) and validate each object against the schema.
/// Numeric strings are coerced; unknown categories are rejected only when
/// `strict_categories` is set.
pub fn parse_rows_json(
    text: &str,
    schema: &Schema,
    strict_categories: bool,
) -> Result<ParsedRows, TableError> {
    let array = extract_json_array(text).ok_or_else(|| TableError::NoJsonArray {
        raw: text.to_string(),
    })?;

    let mut parsed = ParsedRows::default();
    for element in array {
        let object = match element {
            serde_json::Value::Object(ref map) => map,
            other => {
                parsed
                    .rejected
                    .push((other.clone(), "not a JSON object".into()));
                continue;
            }
        };
        match convert_object(object, schema, strict_categories) {
            Ok((row, oov)) => {
                parsed.accepted.push(row);
                parsed.out_of_vocab.extend(oov);
            }
            Err(reason) => parsed.rejected.push((element.clone(), reason)),
        }
    }
    Ok(parsed)
}

fn extract_json_array(text: &str) -> Option<Vec<serde_json::Value>> {
    for (pos, ch) in text.char_indices() {
        if ch != '[' {
            continue;
        }
        let mut stream = serde_json::Deserializer::from_str(&text[pos..])
            .into_iter::<serde_json::Value>();
        if let Some(Ok(serde_json::Value::Array(array))) = stream.next() {
            let has_object = array.iter().any(|v| v.is_object());
            if array.is_empty() || has_object {
                return Some(array);
            }
        }
    }
    None
}

fn convert_object(
    object: &serde_json::Map<String, serde_json::Value>,
    schema: &Schema,
    strict_categories: bool,
) -> Result<(Vec<Cell>, Vec<(String, String)>), String> {
    let mut row = Vec::with_capacity(schema.columns.len());
    let mut oov = Vec::new();
    for col in &schema.columns {
        let value = object
            .get(&col.name)
            .ok_or_else(|| format!("missing column: {}", col.name))?;
        let cell = match (&col.kind, value) {
            (_, serde_json::Value::Null) => Cell::Missing,
            (ColumnKind::Numeric { .. }, serde_json::Value::Number(n)) => {
                let v = n.as_f64().filter(|v| v.is_finite()).ok_or_else(|| {
                    format!("column {}: non-finite number", col.name)
                })?;
                Cell::Number(v)
            }
            (ColumnKind::Numeric { .. }, serde_json::Value::String(s)) => {
                let v = parse_finite(s).ok_or_else(|| {
                    format!("column {}: expected number, got string {s:?}", col.name)
                })?;
                Cell::Number(v)
            }
            (ColumnKind::Categorical { categories }, value) => {
                let text = match value {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Number(n) => {
                        n.as_f64().map(number_to_text).unwrap_or_else(|| n.to_string())
                    }
                    serde_json::Value::Bool(b) => b.to_string(),
                    other => {
                        return Err(format!(
                            "column {}: expected string, got {other}",
                            col.name
                        ))
                    }
                };
                if !categories.contains(&text) {
                    if strict_categories {
                        return Err(format!(
                            "column {}: unknown category {text:?}",
                            col.name
                        ));
                    }
                    oov.push((col.name.clone(), text.clone()));
                }
                Cell::Category(text)
            }
            (ColumnKind::Numeric { .. }, other) => {
                return Err(format!(
                    "column {}: expected number, got {other}",
                    col.name
                ))
            }
        };
        row.push(cell);
    }
    Ok((row, oov))
}

/// Deterministic, row-disjoint split; `|train| = round(fraction * N)`.
pub fn split_train_holdout(
    table: &Table,
    fraction: f64,
    seed: u64,
) -> Result<(Table, Table), TableError> {
    if !(0.0..1.0).contains(&fraction) || fraction == 0.0 {
        return Err(TableError::BadFraction(fraction));
    }
    let n = table.len();
    if n < 2 {
        return Err(TableError::TooFewRows(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let train_n = (fraction * n as f64).round() as usize;
    let mut train_idx: Vec<usize> = indices[..train_n].to_vec();
    let mut holdout_idx: Vec<usize> = indices[train_n..].to_vec();
    train_idx.sort_unstable();
    holdout_idx.sort_unstable();
    Ok((table.subset(&train_idx)?, table.subset(&holdout_idx)?))
}

/// Width of an encoded row under the reference schema:
/// one slot per numeric column plus one per category.
pub fn encoded_width(reference: &Schema) -> usize {
    reference
        .columns
        .iter()
        .map(|c| match &c.kind {
            ColumnKind::Numeric { .. } => 1,
            ColumnKind::Categorical { categories } => categories.len(),
        })
        .sum()
}

/// Encode rows as real vectors against a reference schema: numeric columns
/// min-max normalized over the reference range and clipped to [0,1]
/// (missing -> 0.5), categorical columns one-hot over the reference
/// vocabulary (out-of-vocabulary and missing -> all-zero block).
pub fn encode_rows(table: &Table, reference: &Schema) -> Result<Vec<Vec<f64>>, TableError> {
    if !table.schema().compatible_with(reference) {
        return Err(TableError::Schema(
            "table does not conform to the reference schema".into(),
        ));
    }
    let width = encoded_width(reference);
    let mut out = Vec::with_capacity(table.len());
    for row in table.rows() {
        let mut encoded = Vec::with_capacity(width);
        for (cell, col) in row.iter().zip(&reference.columns) {
            match &col.kind {
                ColumnKind::Numeric { range: (min, max) } => {
                    let v = match cell {
                        Cell::Number(v) => {
                            let width = max - min;
                            if width > 0.0 {
                                ((v - min) / width).clamp(0.0, 1.0)
                            } else {
                                0.5
                            }
                        }
                        _ => 0.5,
                    };
                    encoded.push(v);
                }
                ColumnKind::Categorical { categories } => {
                    let hit = cell
                        .as_category()
                        .and_then(|s| categories.iter().position(|c| c == s));
                    for i in 0..categories.len() {
                        encoded.push(if hit == Some(i) { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        out.push(encoded);
    }
    Ok(out)
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Table[{} rows x {} columns]",
            self.rows.len(),
            self.schema.columns.len()
        )
    }
}
