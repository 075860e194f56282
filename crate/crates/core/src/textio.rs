//! Plain-text serialization of named matrices and vectors.
//!
//! Every block starts with a header line `matrix <name> <rows> <cols>` or
//! `vector <name> <len>`, followed by one whitespace-separated line per row
//! (a single line for vectors). Values use Rust's shortest round-trip
//! exponent formatting, so a write/read cycle is bit-exact.

use std::io::{self, BufRead, Write};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn write_matrix<W: Write>(w: &mut W, name: &str, m: &DMatrix<f64>) -> io::Result<()> {
    writeln!(w, "matrix {name} {} {}", m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        write_values(w, m.row(r).iter())?;
    }
    Ok(())
}

pub fn write_vector<W: Write>(w: &mut W, name: &str, v: &DVector<f64>) -> io::Result<()> {
    writeln!(w, "vector {name} {}", v.len())?;
    write_values(w, v.iter())
}

fn write_values<'a, W: Write>(w: &mut W, values: impl Iterator<Item = &'a f64>) -> io::Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            w.write_all(b" ")?;
        }
        write!(w, "{v:e}")?;
        first = false;
    }
    w.write_all(b"\n")
}

/// Line-oriented reader that tracks line numbers for error messages.
pub struct LineReader<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> LineReader<R> {
    pub fn new(inner: R) -> Self {
        LineReader { inner, line: 0, buf: String::new() }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn error(&self, message: impl Into<String>) -> TextError {
        TextError::Parse { line: self.line, message: message.into() }
    }

    /// Next line without its terminator, or `None` at end of input.
    pub fn next_line(&mut self) -> Result<Option<&str>, TextError> {
        self.buf.clear();
        if self.inner.read_line(&mut self.buf)? == 0 {
            return Ok(None);
        }
        self.line += 1;
        Ok(Some(self.buf.trim_end_matches(['\n', '\r'])))
    }

    pub fn expect_line(&mut self) -> Result<String, TextError> {
        match self.next_line()? {
            Some(l) => Ok(l.to_string()),
            None => Err(TextError::Parse { line: self.line + 1, message: "unexpected end of input".into() }),
        }
    }

    /// A `key<TAB>value…` line; returns the tab-separated fields after the key.
    pub fn expect_fields(&mut self, key: &str) -> Result<Vec<String>, TextError> {
        let line = self.expect_line()?;
        let mut parts = line.split('\t');
        if parts.next() != Some(key) {
            return Err(self.error(format!("expected '{key}'")));
        }
        Ok(parts.map(str::to_string).collect())
    }

    pub fn expect_value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, TextError> {
        let fields = self.expect_fields(key)?;
        match fields.as_slice() {
            [v] => v.parse().map_err(|_| self.error(format!("invalid value for '{key}'"))),
            _ => Err(self.error(format!("'{key}' takes exactly one value"))),
        }
    }

    fn values(&mut self, n: usize) -> Result<Vec<f64>, TextError> {
        let line = self.expect_line()?;
        let vals: Vec<f64> = line
            .split_ascii_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| self.error("invalid number"))?;
        if vals.len() != n {
            return Err(self.error(format!("expected {n} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    pub fn expect_matrix(&mut self, name: &str) -> Result<DMatrix<f64>, TextError> {
        let header = self.expect_line()?;
        let parts: Vec<&str> = header.split(' ').collect();
        let dims = match parts.as_slice() {
            ["matrix", n, r, c] if *n == name => r.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
            _ => None,
        };
        let (rows, cols) = dims.ok_or_else(|| self.error(format!("expected matrix '{name}'")))?;
        let mut m = DMatrix::zeros(rows, cols);
        for r in 0..rows {
            let vals = self.values(cols)?;
            for (c, v) in vals.into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        Ok(m)
    }

    pub fn expect_vector(&mut self, name: &str) -> Result<DVector<f64>, TextError> {
        let header = self.expect_line()?;
        let parts: Vec<&str> = header.split(' ').collect();
        let len = match parts.as_slice() {
            ["vector", n, l] if *n == name => l.parse::<usize>().ok(),
            _ => None,
        };
        let len = len.ok_or_else(|| self.error(format!("expected vector '{name}'")))?;
        Ok(DVector::from_vec(self.values(len)?))
    }
}

/// Reject names that would break the tab-separated header lines.
pub fn check_name(name: &str) -> Result<(), String> {
    if name.is_empty() || name.contains(['\t', '\n', '\r']) {
        Err(format!("name {name:?} cannot be serialized"))
    } else {
        Ok(())
    }
}
