//! CSV datasets and probability matrices, JSON artifacts.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crembo_core::oracle::{matrix_oracle, OracleSource, TableOracle};
use crembo_core::{ClassId, Dataset, Error};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, Result};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| CliError::Read { path: path.into(), source })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Write { path: path.into(), source })
}

/// Dense class ids for raw label strings.
///
/// Labels sort numerically when every one parses as a number, otherwise
/// lexicographically; class `i` is the `i`-th label in that order.
pub fn class_mapping<'a>(raw: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let distinct: BTreeSet<&str> = raw.into_iter().collect();
    let mut names: Vec<&str> = distinct.into_iter().collect();
    let numeric: Option<Vec<f64>> = names.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(values) = numeric {
        let mut pairs: Vec<(f64, &str)> = values.into_iter().zip(names).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        names = pairs.into_iter().map(|(_, s)| s).collect();
    }
    names.into_iter().map(str::to_owned).collect()
}

/// How the label column of a CSV is used.
#[derive(Debug, Clone, Copy)]
pub enum Labels<'a> {
    /// Labels in this column, densely re-indexed (see [`class_mapping`]).
    Column(&'a str),
    /// No labels. The named column, if any, is dropped; the class count
    /// comes from elsewhere (e.g. a trained model).
    Unlabeled { skip: Option<&'a str>, num_classes: usize },
}

/// Parses a headed CSV; every column but the label column is a feature.
pub fn read_dataset<R: Read>(reader: R, labels: Labels<'_>) -> Result<Dataset, Error> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::InvalidDataset(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let label_name = match labels {
        Labels::Column(name) => Some(name),
        Labels::Unlabeled { skip, .. } => skip,
    };
    let label_idx = match label_name {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_owned()))?),
        None => None,
    };
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&i| Some(i) != label_idx).collect();
    if feature_idx.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidDataset(e.to_string()))?;
        for &j in &feature_idx {
            let field = record.get(j).unwrap_or("");
            let value = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumericFeature { row, column: headers[j].clone() })?;
            features.push(value);
        }
        if let Some(l) = label_idx {
            raw_labels.push(record.get(l).unwrap_or("").to_owned());
        }
    }
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let columns: Vec<String> = feature_idx.iter().map(|&j| headers[j].clone()).collect();
    let num_attrs = columns.len();
    match labels {
        Labels::Column(_) => {
            let names = class_mapping(raw_labels.iter().map(String::as_str));
            let ids = raw_labels
                .iter()
                .map(|l| ClassId(names.iter().position(|n| n == l).expect("label is in its own mapping")))
                .collect();
            let k = names.len();
            Dataset::new(features, num_attrs, Some(ids), k, columns, names)
        }
        Labels::Unlabeled { num_classes, .. } => {
            let names = (0..num_classes).map(|c| c.to_string()).collect();
            Dataset::new(features, num_attrs, None, num_classes, columns, names)
        }
    }
}

/// [`read_dataset`] on a labeled CSV file.
pub fn load_csv(path: &Path, label: &str) -> Result<Dataset> {
    Ok(read_dataset(open(path)?, Labels::Column(label))?)
}

pub fn load_unlabeled(path: &Path, skip: Option<&str>, num_classes: usize) -> Result<Dataset> {
    Ok(read_dataset(open(path)?, Labels::Unlabeled { skip, num_classes })?)
}

/// Reads a numeric matrix. A first line with any non-numeric field is taken
/// as a header and skipped.
pub fn read_matrix<R: Read>(reader: R) -> Result<(Vec<f64>, usize, usize), Error> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut values = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidDataset(e.to_string()))?;
        let parsed: Option<Vec<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        let Some(parsed) = parsed else {
            if i == 0 {
                continue;
            }
            return Err(Error::NonNumericFeature { row: rows, column: "matrix".into() });
        };
        match cols {
            None => cols = Some(parsed.len()),
            Some(c) if c != parsed.len() => {
                return Err(Error::ShapeMismatch { rows, classes: c, found_rows: rows + 1, found_cols: parsed.len() })
            }
            _ => {}
        }
        values.extend(parsed);
        rows += 1;
    }
    Ok((values, rows, cols.unwrap_or(0)))
}

/// Loads a probability matrix for `d`, checking its shape first.
pub fn load_matrix_oracle(path: &Path, d: &Dataset, normalize: bool) -> Result<TableOracle> {
    let (values, rows, cols) = read_matrix(open(path)?)?;
    Ok(matrix_oracle(values, rows, cols, d, normalize)?)
}

/// Writes an oracle in the matrix format: a header of class names, then one
/// row per sample in shortest round-trip decimal form.
pub fn write_matrix<W: Write>(mut w: W, o: &dyn OracleSource, class_names: &[String]) -> std::io::Result<()> {
    let header: Vec<String> = class_names.iter().map(|c| format!("p_{c}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for r in 0..o.num_rows() {
        let line: Vec<String> = o.row(r).iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

pub fn save_matrix(path: &Path, o: &dyn OracleSource, class_names: &[String]) -> Result<()> {
    write_matrix(create(path)?, o, class_names).map_err(|source| CliError::Write { path: path.into(), source })
}

/// Pretty JSON with a trailing newline.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| CliError::Json { path: path.into(), source })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|source| CliError::Write { path: path.into(), source })
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|source| CliError::Json { path: path.into(), source })
}

pub fn save_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write { path: path.into(), source })
}
