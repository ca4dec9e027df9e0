//! The model input matrix and its CSV form.

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// Feature matrix: one 50-wide row per labeled patent, aligned ids and
/// labels (`true` = VP).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub patent_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.patent_ids.len() != self.rows.len() || self.labels.len() != self.rows.len() {
            return Err(Error::LengthMismatch {
                left: self.patent_ids.len(),
                right: self.rows.len(),
            });
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.feature_names.len() {
                return Err(Error::Invalid(format!(
                    "row {i} has width {}, expected {}",
                    row.len(),
                    self.feature_names.len()
                )));
            }
        }
        let mut names = self.feature_names.clone();
        names.sort();
        names.dedup();
        if names.len() != self.feature_names.len() {
            return Err(Error::Invalid("duplicate feature names".into()));
        }
        Ok(())
    }

    /// Labels as f64 (1.0 = VP) for training code.
    pub fn label_floats(&self) -> Vec<f64> {
        self.labels.iter().map(|&vp| if vp { 1.0 } else { 0.0 }).collect()
    }

    /// Row subset in the given index order.
    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            patent_ids: indices.iter().map(|&i| self.patent_ids[i].clone()).collect(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Write the matrix as CSV: the feature columns, then `patent_id`, then
/// `label` (VP/NVP).
pub fn write_matrix_csv<W: Write>(matrix: &FeatureMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = matrix.feature_names.iter().map(String::as_str).collect();
    header.push("patent_id");
    header.push("label");
    w.write_record(&header)
        .map_err(|e| Error::Invalid(format!("matrix csv: {e}")))?;
    for i in 0..matrix.n_rows() {
        let mut rec: Vec<String> = matrix.rows[i].iter().map(|v| format_float(*v)).collect();
        rec.push(matrix.patent_ids[i].clone());
        rec.push(if matrix.labels[i] { "VP" } else { "NVP" }.to_string());
        w.write_record(&rec)
            .map_err(|e| Error::Invalid(format!("matrix csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::io("<matrix csv>", e))?;
    Ok(())
}

/// Shortest round-trip float formatting; integers render without a dot.
pub(crate) fn format_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Read a matrix CSV produced by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> Result<FeatureMatrix> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?
        .clone();
    let n = headers.len();
    if n < 3 || &headers[n - 2] != "patent_id" || &headers[n - 1] != "label" {
        return Err(Error::Invalid(format!(
            "{}: expected trailing patent_id and label columns",
            path.display()
        )));
    }
    let feature_names: Vec<String> = headers.iter().take(n - 2).map(str::to_string).collect();
    let mut matrix = FeatureMatrix {
        feature_names,
        patent_ids: Vec::new(),
        rows: Vec::new(),
        labels: Vec::new(),
    };
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedRow {
            file: path.display().to_string(),
            line: idx + 2,
            message: e.to_string(),
        })?;
        let bad = |message: String| Error::MalformedRow {
            file: path.display().to_string(),
            line: idx + 2,
            message,
        };
        let mut row = Vec::with_capacity(n - 2);
        for v in record.iter().take(n - 2) {
            row.push(v.parse::<f64>().map_err(|_| bad(format!("bad number {v:?}")))?);
        }
        let label = match &record[n - 1] {
            "VP" => true,
            "NVP" => false,
            other => return Err(bad(format!("bad label {other:?}"))),
        };
        matrix.patent_ids.push(record[n - 2].to_string());
        matrix.rows.push(row);
        matrix.labels.push(label);
    }
    matrix.validate()?;
    Ok(matrix)
}
