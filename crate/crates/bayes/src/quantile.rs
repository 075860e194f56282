use nalgebra::DMatrix;

/// Quantile levels reported for fan charts and impulse-response bands.
pub const LEVELS: [f64; 5] = [0.05, 0.16, 0.5, 0.84, 0.95];

/// Linear-interpolation quantile of `sorted` (ascending): the value at
/// position `(n − 1)·p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quantiles of an unsorted sample at each level.
pub fn quantiles(values: &[f64], levels: &[f64]) -> Vec<f64> {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    levels.iter().map(|&p| quantile_sorted(&s, p)).collect()
}

/// Elementwise quantiles across equally shaped matrices, one matrix per
/// level.
pub fn pointwise_quantiles(samples: &[DMatrix<f64>], levels: &[f64]) -> Vec<DMatrix<f64>> {
    assert!(!samples.is_empty(), "quantiles of an empty sample");
    let (r, c) = samples[0].shape();
    let mut out = vec![DMatrix::zeros(r, c); levels.len()];
    let mut buf = Vec::with_capacity(samples.len());
    for i in 0..r {
        for j in 0..c {
            buf.clear();
            buf.extend(samples.iter().map(|m| m[(i, j)]));
            buf.sort_by(f64::total_cmp);
            for (q, &p) in out.iter_mut().zip(levels) {
                q[(i, j)] = quantile_sorted(&buf, p);
            }
        }
    }
    out
}
