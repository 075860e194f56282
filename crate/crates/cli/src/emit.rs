//! Table and summary emitters. Every CSV carries the run provenance in its
//! first header cell so a bundle stays self-describing without extra rows.

use std::fs;
use std::path::Path;

use bgvar_core::stattests::stars;

use crate::error::CliError;

/// A rectangular table with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Grid {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Grid { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// CSV text; the provenance string is appended to the first header cell.
    pub fn to_csv(&self, provenance: &str) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = self.header.clone();
        if let Some(first) = header.first_mut() {
            *first = format!("{first} [{provenance}]");
        }
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn write_grid(path: &Path, grid: &Grid, provenance: &str) -> Result<(), CliError> {
    write_text(path, &grid.to_csv(provenance))
}

/// Shortest decimal of `x` rounded to at most `decimals` places: `77.50`
/// prints as `77.5`, `16.666…` with two places as `16.67`.
pub fn trim_decimal(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// `count/total (pp.pp%)`.
pub fn ratio(count: usize, total: usize) -> String {
    format!("{count}/{total} ({}%)", trim_decimal(bgvar_bayes::diagnostics::percent(count, total), 2))
}

/// p-value to two decimals with the `*`/`**`/`***` markers at 10/5/1%.
pub fn pvalue_cell(p: f64) -> String {
    format!("{p:.2}{}", stars(p))
}

/// p-value to four significant figures with markers.
pub fn pvalue_cell_precise(p: f64) -> String {
    format!("{}{}", significant(p, 4), stars(p))
}

/// Markers for rolling-regression grids: `^` (bold) at 10%, `*` at 5%,
/// `**` at 1%.
pub fn rolling_marker(p: f64) -> &'static str {
    if p <= 0.01 {
        "**"
    } else if p <= 0.05 {
        "*"
    } else if p <= 0.10 {
        "^"
    } else {
        ""
    }
}

/// `x` rounded to `digits` significant figures in plain decimal notation.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Fixed-decimal cell used by numeric tables; non-finite values print as
/// `NA`.
pub fn num(x: f64, decimals: usize) -> String {
    if x.is_finite() {
        let s = format!("{x:.decimals$}");
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    } else {
        "NA".into()
    }
}

/// Shortest round-trip rendering for machine-readable detail tables.
pub fn exact(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        "NA".into()
    }
}

/// Country-blocked upper-triangular variable × variable grid: diagonal `-`,
/// lower triangle empty, upper cells from `cell(country, row, col)`.
pub fn upper_triangular(
    corner: &str,
    countries: &[String],
    variables: &[String],
    mut cell: impl FnMut(usize, usize, usize) -> String,
) -> Grid {
    let mut g = Grid::new(["country".to_string(), corner.to_string()].into_iter().chain(variables.iter().cloned()));
    for (c, country) in countries.iter().enumerate() {
        for (i, row_var) in variables.iter().enumerate() {
            let mut row = vec![country.clone(), row_var.clone()];
            for j in 0..variables.len() {
                row.push(match i.cmp(&j) {
                    std::cmp::Ordering::Less => cell(c, i, j),
                    std::cmp::Ordering::Equal => "-".into(),
                    std::cmp::Ordering::Greater => String::new(),
                });
            }
            g.push(row);
        }
    }
    g
}
