//! Bilateral weight matrices between countries.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("flow matrix must be square, got {0}×{1}")]
    NotSquare(usize, usize),
    #[error("flow matrix has {matrix} rows but {names} country names")]
    NameCount { matrix: usize, names: usize },
    #[error("invalid flow {value} from {from} to {to}: flows must be finite and nonnegative")]
    InvalidFlow { from: String, to: String, value: f64 },
    #[error("row for {0} has no off-diagonal flows and cannot be normalized")]
    ZeroRow(String),
    #[error("all off-diagonal flows are zero")]
    AllZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Each row divided by its sum; used for foreign-variable construction.
    RowStochastic,
    /// All entries divided by the largest off-diagonal flow; used for display.
    MaxNormalized,
}

/// Normalized bilateral weights `w[i][j]` from country `i` to country `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    countries: Vec<String>,
    w: DMatrix<f64>,
    mode: WeightMode,
}

/// Normalize a square nonnegative flow matrix. The diagonal is ignored.
pub fn build_weights(
    countries: &[String],
    flows: &DMatrix<f64>,
    mode: WeightMode,
) -> Result<WeightMatrix, WeightError> {
    let (r, c) = flows.shape();
    if r != c {
        return Err(WeightError::NotSquare(r, c));
    }
    if countries.len() != r {
        return Err(WeightError::NameCount { matrix: r, names: countries.len() });
    }
    let mut w = flows.clone();
    for i in 0..r {
        for j in 0..r {
            let v = w[(i, j)];
            if i != j && !(v.is_finite() && v >= 0.0) {
                return Err(WeightError::InvalidFlow {
                    from: countries[i].clone(),
                    to: countries[j].clone(),
                    value: v,
                });
            }
        }
        w[(i, i)] = 0.0;
    }
    match mode {
        WeightMode::RowStochastic => {
            for i in 0..r {
                let sum: f64 = w.row(i).iter().sum();
                if sum <= 0.0 {
                    return Err(WeightError::ZeroRow(countries[i].clone()));
                }
                w.row_mut(i).iter_mut().for_each(|v| *v /= sum);
            }
        }
        WeightMode::MaxNormalized => {
            let max = w.iter().copied().fold(0.0, f64::max);
            if max <= 0.0 {
                return Err(WeightError::AllZero);
            }
            w.iter_mut().for_each(|v| *v /= max);
        }
    }
    Ok(WeightMatrix { countries: countries.to_vec(), w, mode })
}

impl WeightMatrix {
    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[(i, j)]
    }

    pub fn len(&self) -> usize {
        self.countries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.countries.is_empty()
    }

    /// Re-normalize the same underlying flows in another mode.
    pub fn renormalize(&self, mode: WeightMode) -> Result<WeightMatrix, WeightError> {
        build_weights(&self.countries, &self.w, mode)
    }

    /// Restrict and reorder to a subset of countries, then re-normalize.
    pub fn restrict(&self, countries: &[String]) -> Result<WeightMatrix, WeightError> {
        let idx: Vec<usize> = countries
            .iter()
            .map(|c| {
                self.countries.iter().position(|x| x == c).ok_or_else(|| WeightError::Parse {
                    line: 0,
                    message: format!("country '{c}' is missing from the weight matrix"),
                })
            })
            .collect::<Result<_, _>>()?;
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.w[(idx[i], idx[j])]);
        build_weights(countries, &sub, self.mode)
    }
}

/// Square flow matrix with a header row and a leading name column.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTable {
    pub countries: Vec<String>,
    pub flows: DMatrix<f64>,
}

impl FlowTable {
    pub fn read_path(path: impl AsRef<Path>) -> Result<FlowTable, WeightError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<FlowTable, WeightError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| WeightError::Parse { line: 1, message: e.to_string() })?.clone();
        let countries: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let n = countries.len();
        let mut flows = DMatrix::zeros(n, n);
        let mut rows = 0;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| WeightError::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rows >= n {
                return Err(WeightError::Parse { line, message: "more rows than header columns".into() });
            }
            if rec.len() != n + 1 {
                return Err(WeightError::Parse {
                    line,
                    message: format!("expected {} fields, found {}", n + 1, rec.len()),
                });
            }
            if rec[0] != countries[rows] {
                return Err(WeightError::Parse {
                    line,
                    message: format!("row label '{}' does not match column '{}'", &rec[0], countries[rows]),
                });
            }
            for j in 0..n {
                flows[(rows, j)] = rec[j + 1]
                    .parse()
                    .map_err(|_| WeightError::Parse { line, message: format!("invalid number '{}'", &rec[j + 1]) })?;
            }
            rows += 1;
        }
        if rows != n {
            return Err(WeightError::NotSquare(rows, n));
        }
        Ok(FlowTable { countries, flows })
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<(), WeightError> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| WeightError::Io(std::io::Error::other(e));
        let mut header = vec!["From/To".to_string()];
        header.extend(self.countries.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (i, c) in self.countries.iter().enumerate() {
            let mut row = vec![c.clone()];
            row.extend(self.flows.row(i).iter().map(|v| format!("{v}")));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn normalize(&self, mode: WeightMode) -> Result<WeightMatrix, WeightError> {
        build_weights(&self.countries, &self.flows, mode)
    }
}
