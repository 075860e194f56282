//! Data simulators and brute-force oracles used only by tests.
//!
//! Nothing here calls into the toolkit crates, so the oracles stay
//! independent of the code they check.

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Workspace `fixtures/` directory.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn white_noise(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn random_walk(rng: &mut Rng, n: usize) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += normal(rng);
            x
        })
        .collect()
}

pub fn ar1(rng: &mut Rng, n: usize, rho: f64) -> Vec<f64> {
    let mut x = normal(rng) / (1.0 - rho * rho).max(1e-6).sqrt();
    (0..n)
        .map(|_| {
            x = rho * x + normal(rng);
            x
        })
        .collect()
}

pub fn normal_matrix(rng: &mut Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| normal(rng))
}

/// Simulate `x_t = c + trend·t + Σ_l φ_l x_{t−l} + L ε_t` with `ε ~ N(0, I)`,
/// discarding `burn` initial periods. Returns `t × k`.
pub fn simulate_var(
    rng: &mut Rng,
    c: &DVector<f64>,
    trend: Option<&DVector<f64>>,
    phi: &[DMatrix<f64>],
    chol: &DMatrix<f64>,
    t: usize,
    burn: usize,
) -> DMatrix<f64> {
    let k = c.len();
    let p = phi.len();
    let mut hist: Vec<DVector<f64>> = vec![DVector::zeros(k); p];
    let mut out = DMatrix::zeros(t, k);
    for s in 0..burn + t {
        let row = s.saturating_sub(burn) as f64;
        let mut x = c.clone() + chol * DVector::from_fn(k, |_, _| normal(rng));
        if let Some(tr) = trend {
            x += tr * row;
        }
        for (l, a) in phi.iter().enumerate() {
            x += a * &hist[p - 1 - l];
        }
        hist.remove(0);
        hist.push(x.clone());
        if s >= burn {
            out.row_mut(s - burn).copy_from(&x.transpose());
        }
    }
    out
}

/// Coefficients of `det(λI − A) = λ^n + c_1 λ^{n−1} + … + c_n` by the
/// Faddeev–LeVerrier recursion. Returns `[1, c_1, …, c_n]`.
pub fn characteristic_polynomial(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[k - 1];
        let c = -(a * &m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// All complex roots of a monic polynomial `[1, c_1, …, c_n]` by
/// Durand–Kerner iteration.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * bound).collect();
    for _ in 0..5000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    // Polish each root with Newton steps on the original polynomial.
    let deriv: Vec<f64> = coeffs[..n].iter().enumerate().map(|(i, c)| c * (n - i) as f64).collect();
    let eval_d = |z: Complex64| deriv.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let d = eval_d(*r);
            if d.norm() == 0.0 {
                break;
            }
            *r -= eval(*r) / d;
        }
    }
    roots
}

/// Eigenvalue moduli of `a` (descending) via its characteristic polynomial.
pub fn oracle_moduli(a: &DMatrix<f64>) -> Vec<f64> {
    let mut m: Vec<f64> = polynomial_roots(&characteristic_polynomial(a)).iter().map(|z| z.norm()).collect();
    m.sort_by(|x, y| y.total_cmp(x));
    m
}

/// Empirical rejection rate helper: fraction of `true` outcomes.
pub fn rate(outcomes: &[bool]) -> f64 {
    outcomes.iter().filter(|b| **b).count() as f64 / outcomes.len() as f64
}

/// Binomial band `α ± 3·sqrt(α(1−α)/R)`.
pub fn size_band(alpha: f64, reps: usize) -> (f64, f64) {
    let se = (alpha * (1.0 - alpha) / reps as f64).sqrt();
    (alpha - 3.0 * se, alpha + 3.0 * se)
}

/// A three-country, two-variable global model built from country VARX\*(1,1)
/// blocks, with its structural and reduced-form matrices.
pub struct PlantedGlobal {
    pub weights: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub a0: DVector<f64>,
    pub f: DMatrix<f64>,
    pub b0: DVector<f64>,
    /// `G⁻¹ · diag(σ)` shock loading.
    pub shock: DMatrix<f64>,
}

/// Assemble `G`, `H` for countries with shared variable count `kv` from
/// per-country `(Ψ, Λ0, Λ1)` and a row-stochastic weight matrix, writing the
/// link matrices out by hand.
pub fn assemble_global(
    weights: &DMatrix<f64>,
    blocks: &[(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)],
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = weights.nrows();
    let kv = blocks[0].0.nrows();
    let k = n * kv;
    let mut g = DMatrix::zeros(k, k);
    let mut h = DMatrix::zeros(k, k);
    for (i, (psi, lam0, lam1)) in blocks.iter().enumerate() {
        for r in 0..kv {
            let row = i * kv + r;
            g[(row, row)] = 1.0;
            for c in 0..kv {
                h[(row, i * kv + c)] = psi[(r, c)];
            }
            for j in 0..n {
                if j == i {
                    continue;
                }
                for v in 0..kv {
                    g[(row, j * kv + v)] -= lam0[(r, v)] * weights[(i, j)];
                    h[(row, j * kv + v)] += lam1[(r, v)] * weights[(i, j)];
                }
            }
        }
    }
    (g, h)
}

pub fn planted_global(sigma: f64) -> PlantedGlobal {
    let weights = DMatrix::from_row_slice(3, 3, &[0.0, 0.6, 0.4, 0.5, 0.0, 0.5, 0.7, 0.3, 0.0]);
    let blocks = vec![
        (
            DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.1, 0.4]),
            DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.2]),
            DMatrix::from_row_slice(2, 2, &[-0.1, 0.05, 0.0, 0.1]),
        ),
        (
            DMatrix::from_row_slice(2, 2, &[0.6, 0.0, 0.1, 0.3]),
            DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.0, 0.3]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.1, -0.1]),
        ),
        (
            DMatrix::from_row_slice(2, 2, &[0.4, -0.2, 0.0, 0.5]),
            DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.1, 0.15]),
            DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.05]),
        ),
    ];
    let (g, h) = assemble_global(&weights, &blocks);
    let a0 = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.0, 0.05, 0.2]);
    let g_inv = g.clone().try_inverse().expect("planted G invertible");
    let f = &g_inv * &h;
    let b0 = &g_inv * &a0;
    let shock = &g_inv * sigma;
    PlantedGlobal { weights, g, h, a0, f, b0, shock }
}

/// Simulate the reduced form `x_t = b0 + F x_{t−1} + shock·ε_t`, `t × k`.
pub fn simulate_planted(rng: &mut Rng, m: &PlantedGlobal, t: usize, burn: usize) -> DMatrix<f64> {
    simulate_var(rng, &m.b0, None, std::slice::from_ref(&m.f), &m.shock, t, burn)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_poly_of_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        assert_eq!(characteristic_polynomial(&a), vec![1.0, -5.0, 6.0]);
        let m = oracle_moduli(&a);
        assert!((m[0] - 3.0).abs() < 1e-12 && (m[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_roots() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        let m = oracle_moduli(&a);
        assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn planted_is_stable() {
        let m = planted_global(1.0);
        assert!(oracle_moduli(&m.f)[0] < 0.95);
    }
}
