//! Approximate asymptotic p-values for Dickey-Fuller tau statistics from
//! MacKinnon's (1994) response-surface regressions, single-series case.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::Deterministic;

struct Surface {
    max: f64,
    min: f64,
    star: f64,
    small_p: [f64; 3],
    large_p: [f64; 4],
}

// MacKinnon, J.G. (1994) "Approximate asymptotic distribution functions for
// unit-root and cointegration tests", JBES 12, Table 3 (N = 1). The small-p
// quadratic term is scaled by 1e-2, the large-p terms by (1, 1e-1, 1e-1, 1e-2).
const NO_CONSTANT: Surface = Surface {
    max: 1.51,
    min: -19.04,
    star: -1.04,
    small_p: [0.6344, 1.2378, 3.2496e-2],
    large_p: [0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2],
};
const CONSTANT: Surface = Surface {
    max: 2.74,
    min: -18.83,
    star: -1.61,
    small_p: [2.1659, 1.4412, 3.8269e-2],
    large_p: [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2],
};
const CONSTANT_TREND: Surface = Surface {
    max: 0.7,
    min: -16.18,
    star: -2.89,
    small_p: [3.2512, 1.6047, 4.9588e-2],
    large_p: [2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2],
};

/// P-value of a tau statistic under the unit-root null.
pub fn mackinnon_pvalue(tau: f64, det: Deterministic) -> f64 {
    if tau.is_nan() {
        return f64::NAN;
    }
    let s = match det {
        Deterministic::None => &NO_CONSTANT,
        Deterministic::Constant => &CONSTANT,
        Deterministic::ConstantTrend => &CONSTANT_TREND,
    };
    if tau > s.max {
        return 1.0;
    }
    if tau < s.min {
        return 0.0;
    }
    let z = if tau <= s.star { poly(&s.small_p, tau) } else { poly(&s.large_p, tau) };
    Normal::standard().cdf(z)
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Five-percent asymptotic critical values (Fuller / MacKinnon tables).
    #[test]
    fn five_percent_critical_values_map_to_five_percent() {
        for (tau, det) in
            [(-1.941, Deterministic::None), (-2.862, Deterministic::Constant), (-3.410, Deterministic::ConstantTrend)]
        {
            let p = mackinnon_pvalue(tau, det);
            assert!((p - 0.05).abs() < 0.003, "{det}: {p}");
        }
    }

    #[test]
    fn one_percent_critical_values_map_to_one_percent() {
        for (tau, det) in
            [(-2.566, Deterministic::None), (-3.430, Deterministic::Constant), (-3.960, Deterministic::ConstantTrend)]
        {
            let p = mackinnon_pvalue(tau, det);
            assert!((p - 0.01).abs() < 0.002, "{det}: {p}");
        }
    }

    #[test]
    fn monotone_in_tau() {
        for det in [Deterministic::None, Deterministic::Constant, Deterministic::ConstantTrend] {
            let mut prev = 0.0;
            let mut tau = -20.0;
            while tau < 3.0 {
                let p = mackinnon_pvalue(tau, det);
                assert!(p >= prev - 1e-12, "{det} at {tau}");
                prev = p;
                tau += 0.01;
            }
        }
    }
}
