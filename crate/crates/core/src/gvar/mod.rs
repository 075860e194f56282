//! Two-layer global VAR: foreign (star) variables, country VARX\*(1,1)
//! models, link matrices and the stacked global system.

mod global;
mod io;
mod link;
mod star;
mod varx;

pub use global::{
    estimate_gvar, solve_global, stack_global, GlobalModel, GvarEstimate, SolvedGlobal, StackOptions,
    DEFAULT_CONDITION_CEILING,
};
pub use io::{read_global_model, write_global_model};
pub use link::{build_link, LinkMatrix};
pub use star::{build_star, global_data};
pub use varx::{estimate_varx, varx_design, varx_labels, CountryModel};

use thiserror::Error;

use crate::panel::Panel;
use crate::var::VarError;

#[derive(Debug, Error)]
pub enum GvarError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{country}: collinear regressors, '{label}' (column {column}) is a linear combination of earlier columns")]
    Collinear { country: String, column: usize, label: String },
    #[error("{country}: {n} observations are too few; at least {required} are needed")]
    InsufficientData { country: String, n: usize, required: usize },
    #[error("contemporaneous matrix G is not safely invertible (condition number {condition:.3e}); nearest-singular block: {country}")]
    Singular { country: String, condition: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl GvarError {
    pub(crate) fn from_var(country: &str, e: VarError) -> Self {
        match e {
            VarError::Collinear { column, label } => {
                GvarError::Collinear { country: country.to_string(), column, label }
            }
            VarError::InsufficientData { n, required } => {
                GvarError::InsufficientData { country: country.to_string(), n, required }
            }
            VarError::Config(m) => GvarError::Config(m),
            VarError::Numerical(m) => GvarError::Numerical(m),
        }
    }
}

/// Ordering of the global vector: country-major, with every country carrying
/// the same variable list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalLayout {
    pub countries: Vec<String>,
    pub variables: Vec<String>,
}

impl GlobalLayout {
    pub fn new(countries: Vec<String>, variables: Vec<String>) -> Result<Self, GvarError> {
        if countries.is_empty() || variables.is_empty() {
            return Err(GvarError::Config("layout needs at least one country and one variable".into()));
        }
        for (what, names) in [("country", &countries), ("variable", &variables)] {
            for (i, n) in names.iter().enumerate() {
                if names[..i].contains(n) {
                    return Err(GvarError::Config(format!("duplicate {what} '{n}'")));
                }
            }
        }
        Ok(GlobalLayout { countries, variables })
    }

    pub fn from_panel(panel: &Panel) -> Self {
        GlobalLayout { countries: panel.countries().to_vec(), variables: panel.variables().to_vec() }
    }

    pub fn n_countries(&self) -> usize {
        self.countries.len()
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    /// Length `k` of the global vector.
    pub fn dim(&self) -> usize {
        self.countries.len() * self.variables.len()
    }

    pub fn index(&self, country: usize, variable: usize) -> usize {
        country * self.variables.len() + variable
    }

    /// Position of a `(country, variable)` pair given by name.
    pub fn find(&self, country: &str, variable: &str) -> Option<usize> {
        let c = self.countries.iter().position(|x| x == country)?;
        let v = self.variables.iter().position(|x| x == variable)?;
        Some(self.index(c, v))
    }

    pub fn label(&self, i: usize) -> (String, String) {
        let kv = self.variables.len();
        (self.countries[i / kv].clone(), self.variables[i % kv].clone())
    }

    pub fn country_position(&self, country: &str) -> Result<usize, GvarError> {
        self.countries
            .iter()
            .position(|x| x == country)
            .ok_or_else(|| GvarError::Config(format!("unknown country '{country}'")))
    }
}
