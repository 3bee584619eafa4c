//! Dataset loading, splitting, sampling and optional rescaling.
//!
//! The bundled Iris, Diabetes and Digits snapshots live as CSV files under
//! `crates/core/data/` (override the directory with `LXDR_DATA_DIR`). Each
//! has a header line and the target in its last column.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: DataMatrix,
    pub target: Option<Vec<f64>>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: DataMatrix,
        target: Option<Vec<f64>>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if let Some(t) = &target {
            if t.len() != features.rows() {
                return Err(Error::Shape {
                    what: "target",
                    expected: features.rows(),
                    found: t.len(),
                });
            }
        }
        if feature_names.len() != features.cols() {
            return Err(Error::Shape {
                what: "feature names",
                expected: features.cols(),
                found: feature_names.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            features,
            target,
            feature_names,
        })
    }

    pub fn rows(&self) -> usize {
        self.features.rows()
    }

    pub fn cols(&self) -> usize {
        self.features.cols()
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            features: self.features.select_rows(indices),
            target: self
                .target
                .as_ref()
                .map(|t| indices.iter().map(|&i| t[i]).collect()),
            feature_names: self.feature_names.clone(),
        }
    }

    fn with_features(&self, features: DataMatrix) -> Self {
        Self {
            features,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundledDataset {
    Iris,
    Diabetes,
    Digits,
}

impl BundledDataset {
    pub const ALL: [BundledDataset; 3] = [
        BundledDataset::Iris,
        BundledDataset::Diabetes,
        BundledDataset::Digits,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BundledDataset::Iris => "iris",
            BundledDataset::Diabetes => "diabetes",
            BundledDataset::Digits => "digits",
        }
    }
}

impl fmt::Display for BundledDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BundledDataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iris" => Ok(BundledDataset::Iris),
            "diabetes" => Ok(BundledDataset::Diabetes),
            "digits" => Ok(BundledDataset::Digits),
            other => Err(Error::InvalidInput(format!(
                "unknown bundled dataset `{other}`"
            ))),
        }
    }
}

pub fn data_dir() -> PathBuf {
    std::env::var_os("LXDR_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")))
}

pub fn load_bundled(which: BundledDataset) -> Result<Dataset> {
    let path = data_dir().join(format!("{}.csv", which.name()));
    let mut ds = load_csv(&path, true, Some(TargetColumn::Last))?;
    ds.name = which.name().to_string();
    Ok(ds)
}

/// Which CSV column holds the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Last,
    Index(usize),
    Name(String),
}

pub fn load_csv(path: &Path, has_header: bool, target: Option<TargetColumn>) -> Result<Dataset> {
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::Load {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_csv(&name, &text, has_header, target).map_err(|e| match e {
        Error::Parse { .. } | Error::InvalidInput(_) | Error::Shape { .. } => Error::Load {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
        other => other,
    })
}

/// Parses comma-separated numeric text. Row and column numbers in errors
/// are 1-based positions in the file, header line included.
pub fn parse_csv(
    name: &str,
    text: &str,
    has_header: bool,
    target: Option<TargetColumn>,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (line, record) in reader.records().enumerate() {
        let line = line + 1;
        let record = record.map_err(|e| Error::Parse {
            row: line,
            col: 0,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record.get(0).is_some_and(str::is_empty) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    row: line,
                    col: record.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        if has_header && header.is_none() {
            header = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let mut values = Vec::with_capacity(record.len());
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: line,
                col: col + 1,
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    col: col + 1,
                    message: format!("`{cell}` is not finite"),
                });
            }
            values.push(v);
        }
        rows.push(values);
    }
    let width = width.ok_or_else(|| Error::InvalidInput("empty CSV".into()))?;
    if rows.is_empty() {
        return Err(Error::InvalidInput("CSV has no data rows".into()));
    }

    let names = header.unwrap_or_else(|| (0..width).map(|j| format!("f{}", j + 1)).collect());
    let target_index = match target {
        None => None,
        Some(TargetColumn::Last) => Some(width - 1),
        Some(TargetColumn::Index(i)) if i < width => Some(i),
        Some(TargetColumn::Index(i)) => {
            return Err(Error::IndexOutOfRange {
                what: "target column",
                index: i,
                len: width,
            })
        }
        Some(TargetColumn::Name(n)) => Some(
            names
                .iter()
                .position(|h| *h == n)
                .ok_or_else(|| Error::InvalidInput(format!("no column named `{n}`")))?,
        ),
    };
    if target_index.is_some() && width < 2 {
        return Err(Error::InvalidInput(
            "need at least one feature column besides the target".into(),
        ));
    }

    let mut target_values = target_index.map(|_| Vec::with_capacity(rows.len()));
    let mut values = Vec::with_capacity(rows.len() * width);
    for row in &rows {
        for (j, v) in row.iter().enumerate() {
            if Some(j) == target_index {
                target_values.as_mut().expect("target present").push(*v);
            } else {
                values.push(*v);
            }
        }
    }
    let feature_names: Vec<String> = names
        .into_iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != target_index)
        .map(|(_, n)| n)
        .collect();
    let cols = feature_names.len();
    Dataset::new(
        name,
        DataMatrix::new(rows.len(), cols, values)?,
        target_values,
        feature_names,
    )
}

/// Writes features (and target, if any, as the last column) with a header.
/// Values carry 17 significant digits so a re-read is exact.
pub fn write_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Load {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut header = dataset.feature_names.clone();
    if dataset.target.is_some() {
        header.push("target".into());
    }
    let csv_err = |e: csv::Error| Error::Load {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    writer.write_record(&header).map_err(csv_err)?;
    for (i, row) in dataset.features.iter_rows().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        if let Some(t) = &dataset.target {
            record.push(format!("{:.16e}", t[i]));
        }
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

/// Seeded uniform sample without replacement of `round(fraction · rows)`
/// rows, kept in their original order.
pub fn subsample(d: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "fraction must be in (0, 1], got {fraction}"
        )));
    }
    let n = ((fraction * d.rows() as f64).round() as usize).clamp(1, d.rows());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, d.rows(), n).into_vec();
    picked.sort_unstable();
    Ok(d.select_rows(&picked))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 42,
        }
    }
}

/// Row indices of a seeded shuffle split: the first
/// `round(train_fraction · rows)` shuffled rows train, the rest test.
pub fn train_test_indices(rows: usize, spec: SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "train_fraction must be in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    if rows < 2 {
        return Err(Error::InvalidInput("need at least 2 rows to split".into()));
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let n_train = ((spec.train_fraction * rows as f64).round() as usize).clamp(1, rows - 1);
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn train_test_split(d: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = train_test_indices(d.rows(), spec)?;
    Ok((d.select_rows(&train), d.select_rows(&test)))
}

/// Per-feature affine rescaling record from [`standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Features with zero spread; they are mapped to 0.
    pub constant: Vec<bool>,
}

impl Standardization {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| {
                if self.constant[j] {
                    0.0
                } else {
                    (v - self.mean[j]) / self.std[j]
                }
            })
            .collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(j, v)| {
                if self.constant[j] {
                    self.mean[j]
                } else {
                    v * self.std[j] + self.mean[j]
                }
            })
            .collect()
    }
}

/// `(x − μ) / σ` per feature, with population σ.
pub fn standardize(d: &Dataset) -> Result<(Dataset, Standardization)> {
    let mean = d.features.column_means();
    let n = d.rows() as f64;
    let mut var = vec![0.0; d.cols()];
    for row in d.features.iter_rows() {
        for ((acc, x), m) in var.iter_mut().zip(row).zip(&mean) {
            *acc += (x - m) * (x - m);
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
    let constant: Vec<bool> = std.iter().map(|s| *s == 0.0).collect();
    let record = Standardization {
        mean,
        std,
        constant,
    };
    let mut values = Vec::with_capacity(d.rows() * d.cols());
    for row in d.features.iter_rows() {
        values.extend(record.apply(row));
    }
    let features = DataMatrix::new(d.rows(), d.cols(), values)?;
    Ok((d.with_features(features), record))
}

/// Divides every value by the largest absolute value in the matrix, so all
/// features land in [-1, 1] with their relative scales intact. Returns the
/// divisor (1 for an all-zero matrix).
pub fn rescale_unit_range(d: &Dataset) -> Result<(Dataset, f64)> {
    let max = d
        .features
        .as_slice()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let factor = if max > 0.0 { max } else { 1.0 };
    let values = d.features.as_slice().iter().map(|v| v / factor).collect();
    Ok((
        d.with_features(DataMatrix::new(d.rows(), d.cols(), values)?),
        factor,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_values() {
        let d = parse_csv("t", "a,b\n1,2\n3,4\n", true, None).unwrap();
        assert_eq!(d.feature_names, vec!["a", "b"]);
        assert_eq!(d.features.to_rows(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(d.target.is_none());
    }

    #[test]
    fn accepts_crlf() {
        let d = parse_csv("t", "a,b\r\n1,2\r\n3,4\r\n", true, None).unwrap();
        assert_eq!(d.rows(), 2);
    }

    #[test]
    fn non_numeric_cell_names_position() {
        match parse_csv("t", "a,b\n1,2\n3,x\n", true, None) {
            Err(Error::Parse { row: 3, col: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_empty_inputs() {
        assert!(matches!(
            parse_csv("t", "1,2\n3\n", false, None),
            Err(Error::Parse { row: 2, .. })
        ));
        assert!(parse_csv("t", "", false, None).is_err());
        assert!(parse_csv("t", "a,b\n", true, None).is_err());
    }

    #[test]
    fn target_column_selection() {
        let text = "x,y,label\n1,2,0\n3,4,1\n";
        let d = parse_csv("t", text, true, Some(TargetColumn::Name("label".into()))).unwrap();
        assert_eq!(d.target, Some(vec![0.0, 1.0]));
        assert_eq!(d.feature_names, vec!["x", "y"]);
        let d = parse_csv("t", text, true, Some(TargetColumn::Index(0))).unwrap();
        assert_eq!(d.target, Some(vec![1.0, 3.0]));
        assert!(parse_csv("t", text, true, Some(TargetColumn::Index(3))).is_err());
    }

    fn toy(rows: usize) -> Dataset {
        let values: Vec<Vec<f64>> = (0..rows)
            .map(|i| vec![i as f64, (i * i) as f64 * 0.5, 3.0])
            .collect();
        let target = (0..rows).map(|i| i as f64 * 10.0).collect();
        Dataset::new(
            "toy",
            DataMatrix::from_rows(&values).unwrap(),
            Some(target),
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap()
    }

    #[test]
    fn subsample_rules() {
        let d = toy(20);
        assert_eq!(subsample(&d, 1.0, 3).unwrap(), d);
        let a = subsample(&d, 0.25, 3).unwrap();
        assert_eq!(a.rows(), 5);
        assert_eq!(a, subsample(&d, 0.25, 3).unwrap());
        assert!(subsample(&d, 0.0, 3).is_err());
        // target travels with its row
        for (row, t) in a.features.iter_rows().zip(a.target.as_ref().unwrap()) {
            assert_eq!(row[0] * 10.0, *t);
        }
    }

    #[test]
    fn split_is_partition() {
        let d = toy(442);
        let (train, test) = train_test_split(&d, SplitSpec::default()).unwrap();
        assert_eq!((train.rows(), test.rows()), (354, 88));
        let mut ids: Vec<usize> = train
            .features
            .iter_rows()
            .chain(test.features.iter_rows())
            .map(|r| r[0] as usize)
            .collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..442).collect::<Vec<_>>());
        let (train2, _) = train_test_split(&d, SplitSpec::default()).unwrap();
        assert_eq!(train, train2);
    }

    #[test]
    fn standardize_and_invert() {
        let d = toy(30);
        let (s, record) = standardize(&d).unwrap();
        assert!(record.constant[2]);
        assert!(s.features.column(2).iter().all(|v| *v == 0.0));
        for j in 0..2 {
            let col = s.features.column(j);
            let mean = col.iter().sum::<f64>() / 30.0;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 30.0;
            assert!(mean.abs() < 1e-10);
            assert!((var.sqrt() - 1.0).abs() < 1e-10);
        }
        for (orig, z) in d.features.iter_rows().zip(s.features.iter_rows()) {
            for (a, b) in record.invert(z).iter().zip(orig) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn unit_range_rescale() {
        let d = toy(5);
        let (s, factor) = rescale_unit_range(&d).unwrap();
        assert_eq!(factor, 8.0);
        assert_eq!(s.features.get(4, 1), 1.0);
        assert_eq!(s.features.get(2, 0), 0.25);
    }
}
