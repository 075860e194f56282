#![allow(dead_code)]

use bgvar_core::panel::{Panel, Period};
use bgvar_core::weights::{build_weights, WeightMatrix, WeightMode};
use nalgebra::DMatrix;

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Panel from a `T × (countries·variables)` country-major data matrix.
pub fn panel_from_global(data: &DMatrix<f64>, n_countries: usize, n_vars: usize) -> Panel {
    let t = data.nrows();
    let periods = (0..t).map(|s| Period::quarterly(1990 + (s / 4) as i32, (s % 4 + 1) as u8)).collect();
    let mut values = Vec::with_capacity(data.len());
    for c in 0..n_countries {
        for v in 0..n_vars {
            values.extend(data.column(c * n_vars + v).iter());
        }
    }
    Panel::new(names("c", n_countries), names("v", n_vars), periods, values).unwrap()
}

pub fn weights(flows: &DMatrix<f64>) -> WeightMatrix {
    build_weights(&names("c", flows.nrows()), flows, WeightMode::RowStochastic).unwrap()
}
