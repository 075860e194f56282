use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

/// One draw from the inverse-Wishart `IW(ν, S)` (mean `S / (ν − k − 1)`),
/// returned together with its inverse. `None` when `S` is not positive
/// definite or `ν ≤ k − 1`.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(
    rng: &mut R,
    nu: f64,
    scale: &DMatrix<f64>,
) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let k = scale.nrows();
    if nu <= k as f64 - 1.0 || scale.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let u = nalgebra::Cholesky::new((scale + scale.transpose()) * 0.5)?.l();
    // Bartlett factor of a Wishart(ν, I) draw.
    let mut a = DMatrix::zeros(k, k);
    for i in 0..k {
        let chi = ChiSquared::new(nu - i as f64).ok()?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    // Precision U⁻ᵀ A Aᵀ U⁻¹ and covariance (U A⁻ᵀ)(U A⁻ᵀ)ᵀ.
    let m = u.transpose().solve_upper_triangular(&a)?;
    let precision = &m * m.transpose();
    let a_inv_t = a.transpose().solve_upper_triangular(&DMatrix::identity(k, k))?;
    let n = &u * a_inv_t;
    let sigma = &n * n.transpose();
    let sym = |x: DMatrix<f64>| (&x + x.transpose()) * 0.5;
    let (sigma, precision) = (sym(sigma), sym(precision));
    if sigma.iter().chain(precision.iter()).any(|v| !v.is_finite()) {
        return None;
    }
    Some((sigma, precision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn mean_matches_scale() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0]);
        let nu = 12.0;
        let mut rng = substream(5, "iw");
        let n = 20_000;
        let mut acc = DMatrix::zeros(2, 2);
        for _ in 0..n {
            let (sig, prec) = sample_inverse_wishart(&mut rng, nu, &s).unwrap();
            let eye = &sig * &prec;
            assert!((eye - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-9);
            acc += sig;
        }
        let mean = acc / n as f64;
        let want = &s / (nu - 3.0);
        assert!((mean - want).abs().max() < 0.01, "mean off");
    }

    #[test]
    fn rejects_indefinite_scale() {
        let mut rng = substream(1, "iw");
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(sample_inverse_wishart(&mut rng, 5.0, &s).is_none());
    }
}
