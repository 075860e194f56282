use nalgebra::DMatrix;

use super::GvarError;
use crate::panel::Panel;
use crate::weights::{WeightMatrix, WeightMode};

/// Panel columns of the weight matrix's countries, in weight order.
pub(crate) fn weight_columns(panel: &Panel, weights: &WeightMatrix) -> Result<Vec<usize>, GvarError> {
    weights
        .countries()
        .iter()
        .map(|c| {
            panel.country_index(c).map_err(|_| GvarError::Config(format!("weight country '{c}' is not in the panel")))
        })
        .collect()
}

pub(crate) fn require_row_stochastic(weights: &WeightMatrix) -> Result<(), GvarError> {
    if weights.mode() != WeightMode::RowStochastic {
        return Err(GvarError::Config(
            "foreign variables require row-stochastic weights; max-normalized weights are for display only".into(),
        ));
    }
    Ok(())
}

/// Trade-weighted foreign averages `x*_{i,t} = Σ_j w_ij x_{j,t}` for every
/// panel variable, as a `T × k_v` block.
pub fn build_star(panel: &Panel, weights: &WeightMatrix, country: &str) -> Result<DMatrix<f64>, GvarError> {
    require_row_stochastic(weights)?;
    let cols = weight_columns(panel, weights)?;
    let i = weights
        .countries()
        .iter()
        .position(|c| c == country)
        .ok_or_else(|| GvarError::Config(format!("country '{country}' is not in the weight matrix")))?;
    let (_, kv, t) = panel.dims();
    let mut star = DMatrix::zeros(t, kv);
    for (j, &pc) in cols.iter().enumerate() {
        let w = weights.get(i, j);
        if j == i || w == 0.0 {
            continue;
        }
        for v in 0..kv {
            for (s, x) in panel.series(pc, v).iter().enumerate() {
                star[(s, v)] += w * x;
            }
        }
    }
    Ok(star)
}

/// The stacked global vector `x_t` for every period as a `T × k` matrix,
/// country-major in panel order.
pub fn global_data(panel: &Panel) -> DMatrix<f64> {
    let (n, kv, t) = panel.dims();
    DMatrix::from_fn(t, n * kv, |s, g| panel.value(g / kv, g % kv, s))
}
