//! Tabular datasets: outcome vector plus predictor matrix, with CSV ingestion
//! and the center/scale transform recorded for prediction.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn new(data: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { data, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::new(data, rows.len(), cols)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// New matrix keeping the listed row indices, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            data,
            rows: indices.len(),
            cols: self.cols,
        }
    }
}

/// What the outcome column encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    /// Labels in {0, 1}.
    Binary,
    /// Labels in {1..categories}, categories >= 2.
    Ordinal { categories: usize },
}

impl OutcomeKind {
    pub fn n_classes(&self) -> usize {
        match self {
            OutcomeKind::Binary => 2,
            OutcomeKind::Ordinal { categories } => *categories,
        }
    }
}

/// Outcome vector, predictor matrix, and column metadata.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub y: Vec<u32>,
    pub x: Matrix,
    pub predictor_names: Vec<String>,
    pub outcome_kind: OutcomeKind,
}

impl Dataset {
    pub fn new(
        y: Vec<u32>,
        x: Matrix,
        predictor_names: Vec<String>,
        outcome_kind: OutcomeKind,
    ) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if y.len() != x.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} outcomes but {} predictor rows",
                y.len(),
                x.n_rows()
            )));
        }
        if x.n_cols() == 0 {
            return Err(Error::InvalidData("no predictor columns".into()));
        }
        if predictor_names.len() != x.n_cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} predictor names for {} columns",
                predictor_names.len(),
                x.n_cols()
            )));
        }
        if let Some(bad) = x.rows_iter().flatten().find(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite predictor value {bad}"
            )));
        }
        match outcome_kind {
            OutcomeKind::Binary => {
                if let Some(&bad) = y.iter().find(|&&v| v > 1) {
                    return Err(Error::InvalidData(format!(
                        "binary outcome must be 0 or 1, found {bad}"
                    )));
                }
            }
            OutcomeKind::Ordinal { categories } => {
                if categories < 2 {
                    return Err(Error::InvalidData(
                        "ordinal outcome needs at least 2 categories".into(),
                    ));
                }
                if let Some(&bad) = y.iter().find(|&&v| v < 1 || v as usize > categories) {
                    return Err(Error::InvalidData(format!(
                        "ordinal outcome must lie in 1..={categories}, found {bad}"
                    )));
                }
            }
        }
        Ok(Self {
            y,
            x,
            predictor_names,
            outcome_kind,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_predictors(&self) -> usize {
        self.x.n_cols()
    }

    /// Class labels as signed integers, the form the weights module expects.
    pub fn labels_i64(&self) -> Vec<i64> {
        self.y.iter().map(|&v| v as i64).collect()
    }

    /// New dataset keeping the listed row indices, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Dataset> {
        let y = indices.iter().map(|&i| self.y[i]).collect();
        Dataset::new(
            y,
            self.x.select_rows(indices),
            self.predictor_names.clone(),
            self.outcome_kind,
        )
    }
}

/// Center/scale transform fitted on training predictors and replayed on new rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Standardizer {
        let n = x.n_rows() as f64;
        let mut means = vec![0.0; x.n_cols()];
        for row in x.rows_iter() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut sds = vec![0.0; x.n_cols()];
        for row in x.rows_iter() {
            for ((s, v), m) in sds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut sds {
            // Population denominator n; constant columns keep scale 1 so the
            // transform stays invertible.
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { means, sds }
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.n_cols() != self.means.len() {
            return Err(Error::DimensionMismatch(format!(
                "standardizer fitted on {} columns, got {}",
                self.means.len(),
                x.n_cols()
            )));
        }
        let mut data = Vec::with_capacity(x.n_rows() * x.n_cols());
        for row in x.rows_iter() {
            for ((v, m), s) in row.iter().zip(&self.means).zip(&self.sds) {
                data.push((v - m) / s);
            }
        }
        Matrix::new(data, x.n_rows(), x.n_cols())
    }
}

/// Read a dataset from CSV. A header row is required; `outcome` names the
/// label column; every other numeric column is a predictor unless
/// `predictors` narrows the set. Ordinal labels must be 1..K.
pub fn read_dataset_csv<R: Read>(
    reader: R,
    outcome: &str,
    predictors: Option<&[String]>,
    kind_hint: OutcomeKindHint,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::InvalidData(format!("missing header row: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();

    let outcome_idx = headers
        .iter()
        .position(|h| h == outcome)
        .ok_or_else(|| Error::InvalidData(format!("outcome column '{outcome}' not found")))?;

    let predictor_idx: Vec<usize> = match predictors {
        Some(names) => {
            let mut idx = Vec::with_capacity(names.len());
            for name in names {
                let i = headers.iter().position(|h| h == name).ok_or_else(|| {
                    Error::InvalidData(format!("predictor column '{name}' not found"))
                })?;
                if i == outcome_idx {
                    return Err(Error::InvalidData(format!(
                        "column '{name}' is the outcome, not a predictor"
                    )));
                }
                idx.push(i);
            }
            idx
        }
        None => (0..headers.len()).filter(|&i| i != outcome_idx).collect(),
    };
    if predictor_idx.is_empty() {
        return Err(Error::InvalidData("no predictor columns".into()));
    }

    let mut y_raw: Vec<i64> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::CsvFormat {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |i: usize| -> Result<f64> {
            let field = record.get(i).ok_or(Error::CsvFormat {
                line,
                message: format!("missing field {}", i + 1),
            })?;
            field.trim().parse::<f64>().map_err(|_| Error::CsvFormat {
                line,
                message: format!("'{field}' in column '{}' is not a number", headers[i]),
            })
        };
        let yv = parse(outcome_idx)?;
        if yv.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&yv) {
            return Err(Error::CsvFormat {
                line,
                message: format!("outcome '{yv}' is not a non-negative integer"),
            });
        }
        y_raw.push(yv as i64);
        rows.push(
            predictor_idx
                .iter()
                .map(|&i| parse(i))
                .collect::<Result<_>>()?,
        );
    }
    if y_raw.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let outcome_kind = match kind_hint {
        OutcomeKindHint::Binary => OutcomeKind::Binary,
        OutcomeKindHint::Ordinal { categories } => {
            let k = match categories {
                Some(k) => k,
                None => *y_raw.iter().max().expect("non-empty") as usize,
            };
            OutcomeKind::Ordinal {
                categories: k.max(2),
            }
        }
    };
    let y = y_raw.into_iter().map(|v| v as u32).collect();
    let names = predictor_idx.iter().map(|&i| headers[i].clone()).collect();
    Dataset::new(y, Matrix::from_rows(&rows)?, names, outcome_kind)
}

/// How to interpret the outcome column when ingesting a CSV.
#[derive(Debug, Clone, Copy)]
pub enum OutcomeKindHint {
    Binary,
    /// `categories: None` infers K as the maximum label seen.
    Ordinal {
        categories: Option<usize>,
    },
}

/// Write a dataset in the ingestion schema: header `y,<predictors...>`.
pub fn write_dataset_csv<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["y".to_string()];
    header.extend(data.predictor_names.iter().cloned());
    wtr.write_record(&header).map_err(csv_io)?;
    for (y, row) in data.y.iter().zip(data.x.rows_iter()) {
        let mut record = vec![y.to_string()];
        record.extend(row.iter().map(|v| v.to_string()));
        wtr.write_record(&record).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_dataset_path(
    path: &Path,
    outcome: &str,
    predictors: Option<&[String]>,
    kind_hint: OutcomeKindHint,
) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_dataset_csv(
        std::io::BufReader::new(file),
        outcome,
        predictors,
        kind_hint,
    )
}

fn csv_io(e: csv::Error) -> Error {
    Error::InvalidData(format!("csv write failed: {e}"))
}
