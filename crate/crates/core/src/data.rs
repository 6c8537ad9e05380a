//! Dataset representation, CSV ingestion and per-fold min-max scaling.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty file: a header row is required")]
    MissingHeader,
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    Parse { row: usize, column: String, value: String },
    #[error("row {row}, column `{column}`: missing value `{value}`")]
    MissingValue { row: usize, column: String, value: String },
    #[error("dataset needs at least two classes, found {0}")]
    SingleClass(usize),
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("dataset needs at least 2 samples, found {0}")]
    TooFewSamples(usize),
    #[error("dataset needs at least 1 feature")]
    NoFeatures,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("empty row set")]
    EmptyRows,
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, DataError> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(DataError::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { data, rows, cols })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, DataError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(DataError::RaggedRow { row: i + 1, expected: cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { data, rows: rows.len(), cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact panics on zero width
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.get(i, j))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// `class` if the header has it, otherwise the last column.
    #[default]
    Auto,
    Last,
    Named(String),
}

impl LabelColumn {
    pub fn parse(spec: &str) -> Self {
        match spec {
            "auto" => LabelColumn::Auto,
            "last" => LabelColumn::Last,
            name => LabelColumn::Named(name.to_string()),
        }
    }

    fn resolve(&self, header: &[String]) -> Result<usize, DataError> {
        match self {
            LabelColumn::Auto => Ok(header
                .iter()
                .position(|h| h == "class")
                .unwrap_or(header.len().saturating_sub(1))),
            LabelColumn::Last => Ok(header.len().saturating_sub(1)),
            LabelColumn::Named(name) => header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::MissingLabelColumn(name.clone())),
        }
    }
}

/// Immutable labelled numeric dataset: `m` samples by `n` features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    label_names: Vec<String>,
    label_header: String,
}

impl Dataset {
    /// Builds a dataset from already-encoded labels. `label_names[c]` is the
    /// original text of class `c`.
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self, DataError> {
        let (m, n) = (features.rows(), features.cols());
        if m < 2 {
            return Err(DataError::TooFewSamples(m));
        }
        if n == 0 {
            return Err(DataError::NoFeatures);
        }
        if labels.len() != m {
            return Err(DataError::Shape(format!("{} labels for {m} samples", labels.len())));
        }
        if feature_names.len() != n {
            return Err(DataError::Shape(format!(
                "{} feature names for {n} features",
                feature_names.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= label_names.len()) {
            return Err(DataError::Shape(format!(
                "label {bad} has no name ({} label names)",
                label_names.len()
            )));
        }
        for (idx, v) in features.as_slice().iter().enumerate() {
            if !v.is_finite() {
                return Err(DataError::MissingValue {
                    row: idx / n + 1,
                    column: feature_names[idx % n].clone(),
                    value: v.to_string(),
                });
            }
        }
        let distinct: HashSet<usize> = labels.iter().copied().collect();
        if distinct.len() < 2 {
            return Err(DataError::SingleClass(distinct.len()));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateFeature(name.clone()));
            }
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
            label_names,
            label_header: "class".to_string(),
        })
    }

    /// Convenience constructor with generated names (`f1..fn`, class names
    /// `0..c-1`).
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], labels: Vec<usize>) -> Result<Self, DataError> {
        let features = Matrix::from_rows(rows)?;
        let names = (1..=features.cols()).map(|j| format!("f{j}")).collect();
        let classes = labels.iter().max().map_or(0, |&c| c + 1);
        let label_names = (0..classes).map(|c| c.to_string()).collect();
        Dataset::new(features, labels, names, label_names)
    }

    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn label_header(&self) -> &str {
        &self.label_header
    }

    #[inline]
    pub fn value(&self, sample: usize, feature: usize) -> f64 {
        self.features.get(sample, feature)
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    /// Number of samples in each encoded class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// True when every sample has the same value for `feature`.
    pub fn is_constant(&self, feature: usize) -> bool {
        let first = self.value(0, feature);
        self.features.column(feature).all(|v| v == first)
    }

    /// Copy of this dataset with the given sample rows replaced.
    pub fn with_features(&self, features: Matrix) -> Result<Self, DataError> {
        if features.rows() != self.n_samples() || features.cols() != self.n_features() {
            return Err(DataError::Shape("replacement matrix has a different shape".into()));
        }
        let mut out = Dataset::new(
            features,
            self.labels.clone(),
            self.feature_names.clone(),
            self.label_names.clone(),
        )?;
        out.label_header = self.label_header.clone();
        Ok(out)
    }

    pub fn read_csv<R: Read>(reader: R, label_column: &LabelColumn) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
            return Err(DataError::MissingHeader);
        }
        let label_idx = label_column.resolve(&header)?;
        let feature_names: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, h)| h.clone())
            .collect();

        let mut values = Vec::new();
        let mut labels = Vec::new();
        let mut label_names: Vec<String> = Vec::new();
        let mut label_codes: HashMap<String, usize> = HashMap::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = i + 1;
            if record.len() != header.len() {
                return Err(DataError::RaggedRow { row, expected: header.len(), found: record.len() });
            }
            for (j, cell) in record.iter().enumerate() {
                if j == label_idx {
                    let code = *label_codes.entry(cell.to_string()).or_insert_with(|| {
                        label_names.push(cell.to_string());
                        label_names.len() - 1
                    });
                    labels.push(code);
                } else {
                    values.push(parse_cell(cell, row, &header[j])?);
                }
            }
        }
        let m = labels.len();
        let features = Matrix::new(m, feature_names.len(), values)?;
        let mut ds = Dataset::new(features, labels, feature_names, label_names)?;
        ds.label_header = header[label_idx].clone();
        Ok(ds)
    }

    pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Self, DataError> {
        Dataset::read_csv(File::open(path)?, label_column)
    }

    /// Writes the dataset with the label column last. Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.label_header);
        wtr.write_record(&header)?;
        for (row, &label) in self.features.iter_rows().zip(&self.labels) {
            let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            cells.push(self.label_names[label].clone());
            wtr.write_record(&cells)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64, DataError> {
    let missing = || DataError::MissingValue { row, column: column.to_string(), value: cell.to_string() };
    if cell.is_empty() || cell == "?" || cell.eq_ignore_ascii_case("na") {
        return Err(missing());
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(missing()),
        Err(_) => Err(DataError::Parse { row, column: column.to_string(), value: cell.to_string() }),
    }
}

/// Per-column min-max scaler fitted on a subset of rows.
///
/// Values outside the fitted range are not clamped, so a test row can land
/// outside `[0, 1]`. Constant columns map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    ranges: Vec<(f64, f64)>,
}

impl Scaler {
    /// Fits every feature of `dataset` over `rows`.
    pub fn fit(dataset: &Dataset, rows: &[usize]) -> Result<Self, DataError> {
        let columns: Vec<usize> = (0..dataset.n_features()).collect();
        Scaler::fit_columns(dataset, rows, &columns)
    }

    /// Fits only `columns` (in the given order) over `rows`.
    pub fn fit_columns(dataset: &Dataset, rows: &[usize], columns: &[usize]) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::EmptyRows);
        }
        let m = dataset.n_samples();
        if let Some(&bad) = rows.iter().find(|&&r| r >= m) {
            return Err(DataError::RowOutOfRange { index: bad, rows: m });
        }
        let ranges = columns
            .iter()
            .map(|&j| {
                rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                    let v = dataset.value(r, j);
                    (lo.min(v), hi.max(v))
                })
            })
            .collect();
        Ok(Scaler { ranges })
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    #[inline]
    pub fn scale(&self, column: usize, value: f64) -> f64 {
        scale_value(self.ranges[column], value)
    }

    /// Scales a full row whose length equals the scaler's.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &v)| self.scale(j, v)).collect()
    }
}

#[inline]
pub(crate) fn scale_value((lo, hi): (f64, f64), value: f64) -> f64 {
    if hi > lo {
        (value - lo) / (hi - lo)
    } else {
        0.0
    }
}
