use nalgebra::DMatrix;

use super::star::require_row_stochastic;
use super::{GlobalLayout, GvarError};
use crate::weights::WeightMatrix;

/// `W_i` mapping the global vector to `z_{i,t} = (x_{i,t}, x*_{i,t})`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMatrix {
    pub country: String,
    /// `(k_i + k_i*) × k`.
    pub w: DMatrix<f64>,
}

/// Selector rows for the country's own variables followed by one weight row
/// per foreign variable.
pub fn build_link(layout: &GlobalLayout, country: &str, weights: &WeightMatrix) -> Result<LinkMatrix, GvarError> {
    require_row_stochastic(weights)?;
    if weights.countries() != layout.countries.as_slice() {
        return Err(GvarError::Config(format!(
            "weight matrix country order [{}] does not match the model order [{}]",
            weights.countries().join(", "),
            layout.countries.join(", ")
        )));
    }
    let i = layout.country_position(country)?;
    let kv = layout.n_variables();
    let mut w = DMatrix::zeros(2 * kv, layout.dim());
    for v in 0..kv {
        w[(v, layout.index(i, v))] = 1.0;
        for j in 0..layout.n_countries() {
            if j != i {
                w[(kv + v, layout.index(j, v))] = weights.get(i, j);
            }
        }
    }
    Ok(LinkMatrix { country: country.to_string(), w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{build_weights, WeightMode};

    #[test]
    fn two_country_scalar() {
        let names = vec!["a".to_string(), "b".to_string()];
        let layout = GlobalLayout::new(names.clone(), vec!["x".into()]).unwrap();
        let flows = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 2.0, 0.0]);
        let w = build_weights(&names, &flows, WeightMode::RowStochastic).unwrap();
        let l = build_link(&layout, "a", &w).unwrap();
        assert_eq!(l.w, DMatrix::<f64>::identity(2, 2));
        let l = build_link(&layout, "b", &w).unwrap();
        assert_eq!(l.w, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn order_mismatch() {
        let names = vec!["a".to_string(), "b".to_string()];
        let rev = vec!["b".to_string(), "a".to_string()];
        let layout = GlobalLayout::new(rev, vec!["x".into()]).unwrap();
        let w = build_weights(&names, &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), WeightMode::RowStochastic)
            .unwrap();
        assert!(matches!(build_link(&layout, "a", &w), Err(GvarError::Config(_))));
    }
}
