//! Country × variable × time panel, long-format CSV ingestion and
//! series transformations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Variable codes of the eight-variable country system.
pub const DEFAULT_VARIABLES: [&str; 8] = ["cpi", "emp", "gdp", "mpi", "exp", "imp", "exc", "mny"];

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("duplicate observation for ({country}, {variable}, {date}) on line {line}")]
    Duplicate { country: String, variable: String, date: String, line: u64 },
    #[error("panel is not rectangular; missing observations: {}", format_triples(.missing))]
    Coverage { missing: Vec<(String, String, String)> },
    #[error("mixed period frequencies in one panel ({0} and {1})")]
    MixedFrequency(Frequency, Frequency),
    #[error("series ({country}, {variable}) has a {position} gap at {date} that cannot be interpolated")]
    EdgeGap { country: String, variable: String, date: String, position: &'static str },
    #[error("log of nonpositive value {value} in series ({country}, {variable}) at {date}")]
    Domain { country: String, variable: String, date: String, value: f64 },
    #[error("difference order {order} leaves no observations in a panel of {periods} periods")]
    TooShort { order: usize, periods: usize },
    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },
    #[error("invalid panel: {0}")]
    Invalid(String),
}

fn format_triples(t: &[(String, String, String)]) -> String {
    const SHOW: usize = 20;
    let mut s: Vec<String> = t.iter().take(SHOW).map(|(c, v, d)| format!("({c}, {v}, {d})")).collect();
    if t.len() > SHOW {
        s.push(format!("… {} more", t.len() - SHOW));
    }
    s.join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Annual,
    Quarterly,
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frequency::Annual => "annual",
            Frequency::Quarterly => "quarterly",
        })
    }
}

/// An annual (`2001`) or quarterly (`2001Q3`) period label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Period {
    pub year: i32,
    /// 1..=4 for quarterly data, 0 for annual.
    pub quarter: u8,
}

impl Period {
    pub fn annual(year: i32) -> Self {
        Period { year, quarter: 0 }
    }

    pub fn quarterly(year: i32, quarter: u8) -> Self {
        assert!((1..=4).contains(&quarter));
        Period { year, quarter }
    }

    pub fn frequency(&self) -> Frequency {
        if self.quarter == 0 {
            Frequency::Annual
        } else {
            Frequency::Quarterly
        }
    }

    /// Consecutive period index; used to detect holes in the time axis.
    pub fn ordinal(&self) -> i64 {
        match self.frequency() {
            Frequency::Annual => self.year as i64,
            Frequency::Quarterly => self.year as i64 * 4 + (self.quarter as i64 - 1),
        }
    }

    pub fn from_ordinal(ordinal: i64, freq: Frequency) -> Self {
        match freq {
            Frequency::Annual => Period::annual(ordinal as i32),
            Frequency::Quarterly => Period::quarterly(ordinal.div_euclid(4) as i32, (ordinal.rem_euclid(4) + 1) as u8),
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.quarter {
            0 => write!(f, "{}", self.year),
            q => write!(f, "{}Q{}", self.year, q),
        }
    }
}

impl FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let upper = s.to_ascii_uppercase();
        if let Some(pos) = upper.find('Q') {
            let year_part = upper[..pos].trim_end_matches(['-', ' ']);
            let q_part = &upper[pos + 1..];
            let year: i32 = year_part.parse().map_err(|_| format!("invalid year in period '{s}'"))?;
            let quarter: u8 = q_part.parse().map_err(|_| format!("invalid quarter in period '{s}'"))?;
            if !(1..=4).contains(&quarter) {
                return Err(format!("quarter out of range in period '{s}'"));
            }
            Ok(Period::quarterly(year, quarter))
        } else {
            if s.len() != 4 {
                return Err(format!("period '{s}' is neither YYYY nor YYYYQn"));
            }
            let year: i32 = s.parse().map_err(|_| format!("invalid year '{s}'"))?;
            Ok(Period::annual(year))
        }
    }
}

/// One transformation applied to a series, with everything needed to undo it.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformStep {
    pub log: bool,
    pub diff: usize,
    /// First value of each intermediate series before each differencing pass.
    pub anchors: Vec<f64>,
    /// Leading values of the differenced series dropped to align with other
    /// series differenced more often.
    pub dropped_head: Vec<f64>,
}

impl TransformStep {
    /// Reconstruct the pre-transform series from the transformed one.
    pub fn invert(&self, transformed: &[f64]) -> Vec<f64> {
        let mut s: Vec<f64> = self.dropped_head.iter().chain(transformed).copied().collect();
        for anchor in self.anchors.iter().rev() {
            let mut out = Vec::with_capacity(s.len() + 1);
            let mut acc = *anchor;
            out.push(acc);
            for d in &s {
                acc += d;
                out.push(acc);
            }
            s = out;
        }
        if self.log {
            s.iter_mut().for_each(|v| *v = v.exp());
        }
        s
    }
}

/// Requested transformation for one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformSpec {
    pub log: bool,
    pub diff: usize,
}

/// Panel of observations indexed by country, variable and period.
///
/// Values are stored country-major with time innermost, so every series is a
/// contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    countries: Vec<String>,
    variables: Vec<String>,
    periods: Vec<Period>,
    values: Vec<f64>,
    transform_log: Vec<Vec<TransformStep>>,
    gap_filled: Vec<bool>,
}

/// Options for [`Panel::read_long_csv`].
#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Linearly interpolate interior gaps instead of rejecting them.
    pub interpolate_gaps: bool,
}

impl Panel {
    /// Build a panel from a dense `[country][variable][time]` tensor.
    pub fn new(
        countries: Vec<String>,
        variables: Vec<String>,
        periods: Vec<Period>,
        values: Vec<f64>,
    ) -> Result<Self, PanelError> {
        let n = countries.len() * variables.len() * periods.len();
        if values.len() != n {
            return Err(PanelError::Invalid(format!("expected {n} values, got {}", values.len())));
        }
        check_unique("country", &countries)?;
        check_unique("variable", &variables)?;
        if let Some(first) = periods.first() {
            for p in &periods {
                if p.frequency() != first.frequency() {
                    return Err(PanelError::MixedFrequency(first.frequency(), p.frequency()));
                }
            }
        }
        if periods.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PanelError::Invalid("time index must be strictly increasing".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let (c, v, t) = unflatten(i, variables.len(), periods.len());
            return Err(PanelError::Invalid(format!(
                "non-finite value in ({}, {}, {})",
                countries[c], variables[v], periods[t]
            )));
        }
        let n_series = countries.len() * variables.len();
        Ok(Panel {
            countries,
            variables,
            periods,
            values,
            transform_log: vec![Vec::new(); n_series],
            gap_filled: vec![false; n_series],
        })
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn frequency(&self) -> Option<Frequency> {
        self.periods.first().map(|p| p.frequency())
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.countries.len(), self.variables.len(), self.periods.len())
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn country_index(&self, name: &str) -> Result<usize, PanelError> {
        self.countries
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| PanelError::Unknown { kind: "country", name: name.to_string() })
    }

    pub fn variable_index(&self, name: &str) -> Result<usize, PanelError> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PanelError::Unknown { kind: "variable", name: name.to_string() })
    }

    fn series_index(&self, c: usize, v: usize) -> usize {
        c * self.variables.len() + v
    }

    pub fn series(&self, c: usize, v: usize) -> &[f64] {
        let t = self.periods.len();
        let start = self.series_index(c, v) * t;
        &self.values[start..start + t]
    }

    pub fn value(&self, c: usize, v: usize, t: usize) -> f64 {
        self.series(c, v)[t]
    }

    pub fn transform_log(&self, c: usize, v: usize) -> &[TransformStep] {
        &self.transform_log[self.series_index(c, v)]
    }

    /// Whether the series contained gaps that were filled by interpolation.
    pub fn is_gap_filled(&self, c: usize, v: usize) -> bool {
        self.gap_filled[self.series_index(c, v)]
    }

    /// `T × k` block of one country's variables (rows are periods).
    pub fn country_block(&self, c: usize) -> nalgebra::DMatrix<f64> {
        let t = self.periods.len();
        let k = self.variables.len();
        nalgebra::DMatrix::from_fn(t, k, |r, v| self.value(c, v, r))
    }

    /// Keep only the named countries and variables, in the given order.
    pub fn select(&self, countries: &[String], variables: &[String]) -> Result<Panel, PanelError> {
        let ci: Vec<usize> = countries.iter().map(|c| self.country_index(c)).collect::<Result<_, _>>()?;
        let vi: Vec<usize> = variables.iter().map(|v| self.variable_index(v)).collect::<Result<_, _>>()?;
        let mut values = Vec::with_capacity(ci.len() * vi.len() * self.periods.len());
        let mut log = Vec::new();
        let mut gaps = Vec::new();
        for &c in &ci {
            for &v in &vi {
                values.extend_from_slice(self.series(c, v));
                log.push(self.transform_log[self.series_index(c, v)].clone());
                gaps.push(self.gap_filled[self.series_index(c, v)]);
            }
        }
        Ok(Panel {
            countries: countries.to_vec(),
            variables: variables.to_vec(),
            periods: self.periods.clone(),
            values,
            transform_log: log,
            gap_filled: gaps,
        })
    }

    pub fn read_long_csv(path: impl AsRef<Path>, opts: IngestOptions) -> Result<Panel, PanelError> {
        let file = std::fs::File::open(path)?;
        Self::from_long_csv_reader(file, opts)
    }

    /// Parse long-format `country,variable,date,value` records.
    pub fn from_long_csv_reader<R: Read>(reader: R, opts: IngestOptions) -> Result<Panel, PanelError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| PanelError::Parse { line: 1, message: e.to_string() })?.clone();
        let expected = ["country", "variable", "date", "value"];
        if header.len() != 4 || header.iter().zip(expected).any(|(a, b)| a != b) {
            return Err(PanelError::Parse {
                line: 1,
                message: format!(
                    "header must be exactly 'country,variable,date,value', found '{}'",
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }

        let mut countries: Vec<String> = Vec::new();
        let mut variables: Vec<String> = Vec::new();
        let mut cmap: HashMap<String, usize> = HashMap::new();
        let mut vmap: HashMap<String, usize> = HashMap::new();
        let mut obs: HashMap<(usize, usize), BTreeMap<Period, Option<f64>>> = HashMap::new();
        let mut freq: Option<Frequency> = None;

        for rec in rdr.records() {
            let rec = rec.map_err(|e| PanelError::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() != 4 {
                return Err(PanelError::Parse { line, message: format!("expected 4 fields, found {}", rec.len()) });
            }
            let country = rec[0].to_string();
            let variable = rec[1].to_string();
            if country.is_empty() || variable.is_empty() {
                return Err(PanelError::Parse { line, message: "empty country or variable".into() });
            }
            let period: Period = rec[2].parse().map_err(|m: String| PanelError::Parse { line, message: m })?;
            match freq {
                None => freq = Some(period.frequency()),
                Some(f) if f != period.frequency() => return Err(PanelError::MixedFrequency(f, period.frequency())),
                _ => {}
            }
            let raw = &rec[3];
            let value = if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("nan") {
                None
            } else {
                let v: f64 =
                    raw.parse().map_err(|_| PanelError::Parse { line, message: format!("invalid value '{raw}'") })?;
                if !v.is_finite() {
                    return Err(PanelError::Parse { line, message: format!("non-finite value '{raw}'") });
                }
                Some(v)
            };
            let ci = *cmap.entry(country.clone()).or_insert_with(|| {
                countries.push(country.clone());
                countries.len() - 1
            });
            let vi = *vmap.entry(variable.clone()).or_insert_with(|| {
                variables.push(variable.clone());
                variables.len() - 1
            });
            let series = obs.entry((ci, vi)).or_default();
            if series.insert(period, value).is_some() {
                return Err(PanelError::Duplicate { country, variable, date: period.to_string(), line });
            }
        }

        let Some(freq) = freq else {
            return Err(PanelError::Invalid("no observations".into()));
        };
        let mut all_periods: Vec<Period> = obs.values().flat_map(|s| s.keys().copied()).collect();
        all_periods.sort();
        all_periods.dedup();
        let first = all_periods[0].ordinal();
        let last = all_periods[all_periods.len() - 1].ordinal();
        let periods: Vec<Period> = (first..=last).map(|o| Period::from_ordinal(o, freq)).collect();

        let t_len = periods.len();
        let mut values = vec![f64::NAN; countries.len() * variables.len() * t_len];
        let mut gap_filled = vec![false; countries.len() * variables.len()];
        let mut missing = Vec::new();
        let mut edge_gap: Option<PanelError> = None;
        for c in 0..countries.len() {
            for v in 0..variables.len() {
                let series = obs.get(&(c, v));
                let mut raw: Vec<Option<f64>> =
                    periods.iter().map(|p| series.and_then(|s| s.get(p).copied().flatten())).collect();
                if raw.iter().all(|x| x.is_some()) {
                } else if opts.interpolate_gaps {
                    match interpolate_interior(&mut raw) {
                        Ok(()) => gap_filled[c * variables.len() + v] = true,
                        Err((pos, position)) => {
                            edge_gap.get_or_insert(PanelError::EdgeGap {
                                country: countries[c].clone(),
                                variable: variables[v].clone(),
                                date: periods[pos].to_string(),
                                position,
                            });
                        }
                    }
                } else {
                    for (t, x) in raw.iter().enumerate() {
                        if x.is_none() {
                            missing.push((countries[c].clone(), variables[v].clone(), periods[t].to_string()));
                        }
                    }
                }
                let base = (c * variables.len() + v) * t_len;
                for (t, x) in raw.iter().enumerate() {
                    values[base + t] = x.unwrap_or(f64::NAN);
                }
            }
        }
        if let Some(e) = edge_gap {
            return Err(e);
        }
        if !missing.is_empty() {
            return Err(PanelError::Coverage { missing });
        }
        let mut panel = Panel::new(countries, variables, periods, values)?;
        panel.gap_filled = gap_filled;
        Ok(panel)
    }

    /// Write the panel back out in long format.
    pub fn write_long_csv<W: Write>(&self, writer: W) -> Result<(), PanelError> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| PanelError::Io(std::io::Error::other(e));
        w.write_record(["country", "variable", "date", "value"]).map_err(io)?;
        for (c, country) in self.countries.iter().enumerate() {
            for (v, variable) in self.variables.iter().enumerate() {
                for (t, p) in self.periods.iter().enumerate() {
                    w.write_record([
                        country.as_str(),
                        variable.as_str(),
                        &p.to_string(),
                        &format!("{}", self.value(c, v, t)),
                    ])
                    .map_err(io)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_long_csv_path(&self, path: impl AsRef<Path>) -> Result<(), PanelError> {
        let f = std::fs::File::create(path)?;
        self.write_long_csv(std::io::BufWriter::new(f))
    }

    /// Apply log and/or differencing per variable.
    ///
    /// Variables missing from `specs` are left unchanged. All series are
    /// truncated to the common sample implied by the largest difference order.
    pub fn transform(&self, specs: &HashMap<String, TransformSpec>) -> Result<Panel, PanelError> {
        for name in specs.keys() {
            self.variable_index(name)?;
        }
        let spec_of = |v: usize| specs.get(&self.variables[v]).copied().unwrap_or_default();
        let max_d = (0..self.variables.len()).map(|v| spec_of(v).diff).max().unwrap_or(0);
        let t_len = self.periods.len();
        if max_d >= t_len {
            return Err(PanelError::TooShort { order: max_d, periods: t_len });
        }
        let new_len = t_len - max_d;
        let mut values = Vec::with_capacity(self.countries.len() * self.variables.len() * new_len);
        let mut log = self.transform_log.clone();
        for c in 0..self.countries.len() {
            for v in 0..self.variables.len() {
                let spec = spec_of(v);
                let mut s = self.series(c, v).to_vec();
                if spec.log {
                    for (t, x) in s.iter_mut().enumerate() {
                        if *x <= 0.0 {
                            return Err(PanelError::Domain {
                                country: self.countries[c].clone(),
                                variable: self.variables[v].clone(),
                                date: self.periods[t].to_string(),
                                value: *x,
                            });
                        }
                        *x = x.ln();
                    }
                }
                let mut anchors = Vec::with_capacity(spec.diff);
                for _ in 0..spec.diff {
                    anchors.push(s[0]);
                    s = s.windows(2).map(|w| w[1] - w[0]).collect();
                }
                let extra = max_d - spec.diff;
                let dropped_head = s[..extra].to_vec();
                values.extend_from_slice(&s[extra..]);
                // Every series gets a step, identity included, so histories stay level-aligned.
                log[self.series_index(c, v)].push(TransformStep {
                    log: spec.log,
                    diff: spec.diff,
                    anchors,
                    dropped_head,
                });
            }
        }
        Ok(Panel {
            countries: self.countries.clone(),
            variables: self.variables.clone(),
            periods: self.periods[max_d..].to_vec(),
            values,
            transform_log: log,
            gap_filled: self.gap_filled.clone(),
        })
    }

    /// Undo every recorded transformation, restoring the original series.
    pub fn untransform(&self) -> Result<Panel, PanelError> {
        let n_series = self.countries.len() * self.variables.len();
        let mut series: Vec<Vec<f64>> = (0..n_series)
            .map(|i| {
                let t = self.periods.len();
                self.values[i * t..(i + 1) * t].to_vec()
            })
            .collect();
        let mut periods_back = 0usize;
        let depth = self.transform_log.iter().map(|l| l.len()).max().unwrap_or(0);
        for level in (0..depth).rev() {
            let mut grow = None;
            for (i, s) in series.iter_mut().enumerate() {
                let steps = &self.transform_log[i];
                let len_before = s.len();
                if let Some(step) = steps.get(level) {
                    *s = step.invert(s);
                }
                let g = s.len() - len_before;
                match grow {
                    None => grow = Some(g),
                    Some(prev) if prev != g => {
                        return Err(PanelError::Invalid("inconsistent transform history".into()))
                    }
                    _ => {}
                }
            }
            periods_back += grow.unwrap_or(0);
        }
        let freq = self.frequency().ok_or_else(|| PanelError::Invalid("empty panel".into()))?;
        let start = self.periods[0].ordinal() - periods_back as i64;
        let periods: Vec<Period> =
            (0..self.periods.len() + periods_back).map(|i| Period::from_ordinal(start + i as i64, freq)).collect();
        let mut out = Panel::new(self.countries.clone(), self.variables.clone(), periods, series.concat())?;
        out.gap_filled = self.gap_filled.clone();
        Ok(out)
    }
}

fn unflatten(i: usize, n_vars: usize, n_periods: usize) -> (usize, usize, usize) {
    let t = i % n_periods;
    let s = i / n_periods;
    (s / n_vars, s % n_vars, t)
}

fn check_unique(kind: &str, names: &[String]) -> Result<(), PanelError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(PanelError::Invalid(format!("duplicate {kind} '{n}'")));
        }
    }
    Ok(())
}

/// Fill interior `None`s by linear interpolation. Returns the position of the
/// first leading or trailing gap on failure.
fn interpolate_interior(raw: &mut [Option<f64>]) -> Result<(), (usize, &'static str)> {
    let n = raw.len();
    if raw[0].is_none() {
        return Err((0, "leading"));
    }
    if raw[n - 1].is_none() {
        return Err((n - 1, "trailing"));
    }
    let mut t = 1;
    while t < n {
        if raw[t].is_none() {
            let lo = t - 1;
            let mut hi = t;
            while raw[hi].is_none() {
                hi += 1;
            }
            let (a, b) = (raw[lo].unwrap(), raw[hi].unwrap());
            for (j, slot) in raw.iter_mut().enumerate().take(hi).skip(t) {
                let w = (j - lo) as f64 / (hi - lo) as f64;
                *slot = Some(a + w * (b - a));
            }
            t = hi;
        }
        t += 1;
    }
    Ok(())
}
