//! Generalized inverse Gaussian variates.
//!
//! `GIG(λ, χ, ψ)` has density proportional to
//! `x^{λ−1} exp(−(χ/x + ψ x)/2)` on `x > 0`. With `ω = √(χψ)` and
//! `α = √(χ/ψ)`, `X = α·e^U` where `U` has the log-concave density
//! `exp(λu − ω cosh u)`, which is sampled by the ratio-of-uniforms method
//! centred at its mode.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Draw one GIG variate. `χ` and `ψ` must be nonnegative and not both zero;
/// `χ = 0` needs `λ > 0` and `ψ = 0` needs `λ < 0`.
pub fn sample_gig<R: Rng + ?Sized>(rng: &mut R, lambda: f64, chi: f64, psi: f64) -> Result<f64, String> {
    if !(lambda.is_finite() && chi >= 0.0 && psi >= 0.0 && chi.is_finite() && psi.is_finite()) {
        return Err(format!("invalid GIG parameters ({lambda}, {chi}, {psi})"));
    }
    if chi == 0.0 {
        if lambda <= 0.0 || psi == 0.0 {
            return Err(format!("improper GIG with chi = 0 and lambda = {lambda}"));
        }
        let g = Gamma::new(lambda, 2.0 / psi).map_err(|e| e.to_string())?;
        return Ok(g.sample(rng));
    }
    if psi == 0.0 {
        if lambda >= 0.0 {
            return Err(format!("improper GIG with psi = 0 and lambda = {lambda}"));
        }
        let g = Gamma::new(-lambda, 2.0 / chi).map_err(|e| e.to_string())?;
        return Ok(1.0 / g.sample(rng));
    }
    let omega = (chi * psi).sqrt();
    let log_alpha = 0.5 * (chi.ln() - psi.ln());
    let u = sample_log_standard(rng, lambda, omega);
    Ok((log_alpha + u).exp())
}

/// Log-density of `U` up to a constant.
fn h(u: f64, lambda: f64, omega: f64) -> f64 {
    lambda * u - omega * u.cosh()
}

fn h_prime(u: f64, lambda: f64, omega: f64) -> f64 {
    lambda - omega * u.sinh()
}

/// Largest `|x|·√f(mode + x)` on one side of the mode (`sign` = ±1), where
/// `f` is the density normalised to 1 at the mode.
fn side_bound(mode: f64, lambda: f64, omega: f64, sign: f64) -> f64 {
    // q(x) = ln|x| + (h(mode + x) − h(mode))/2 has a single stationary point
    // on each side because h is concave.
    let dq = |a: f64| 1.0 / a + 0.5 * sign * h_prime(mode + sign * a, lambda, omega);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while dq(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            break;
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if dq(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    let a = 0.5 * (lo + hi);
    let h0 = h(mode, lambda, omega);
    a * (0.5 * (h(mode + sign * a, lambda, omega) - h0)).exp() * (1.0 + 1e-9)
}

fn sample_log_standard<R: Rng + ?Sized>(rng: &mut R, lambda: f64, omega: f64) -> f64 {
    let mode = (lambda / omega).asinh();
    let h0 = h(mode, lambda, omega);
    let w_plus = side_bound(mode, lambda, omega, 1.0);
    let w_minus = -side_bound(mode, lambda, omega, -1.0);
    loop {
        let v: f64 = 1.0 - rng.random::<f64>();
        let w = w_minus + (w_plus - w_minus) * rng.random::<f64>();
        let x = w / v;
        let hx = h(mode + x, lambda, omega);
        if hx.is_finite() && 2.0 * v.ln() <= hx - h0 {
            return mode + x;
        }
    }
}
