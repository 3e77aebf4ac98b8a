//! Linear functions with prescribed monotonic sharpness.

use crate::error::{construction, Result};
use crate::families::WeightVector;

/// `k` decreasing weights summing to 1 whose profile sits exactly on the
/// `(c, theta)` boundary: `W(l) = (l/(kc))^(1/theta)` for `l < k`.
pub fn construct_sharp_linear(c: f64, theta: f64, k: usize) -> Result<WeightVector> {
    if k == 0 {
        return Err(construction("k must be at least 1"));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(construction(format!("c must be >= 1, got {c}")));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(construction(format!("theta must lie in (0, 1], got {theta}")));
    }
    let kk = k as f64;
    let level = |l: usize| (l as f64 / (kk * c)).powf(1.0 / theta);
    // w[k - l] is the l-th smallest weight
    let mut w = vec![0.0; k];
    for l in 1..k {
        w[k - l] = level(l) - level(l - 1);
    }
    w[0] = 1.0 - level(k - 1);
    for l in 1..=k {
        let wi = w[k - l];
        if wi.is_nan() || wi <= 0.0 {
            return Err(construction(format!(
                "(c, theta) = ({c}, {theta}) gives a non-positive weight at l = {l}"
            )));
        }
        if l < k && w[k - l - 1] < wi * (1.0 - 1e-12) {
            return Err(construction(format!(
                "(c, theta) = ({c}, {theta}) gives unsorted weights at l = {}",
                l + 1
            )));
        }
    }
    // absorb rounding so the vector is exactly non-increasing
    for j in (0..k - 1).rev() {
        w[j] = w[j].max(w[j + 1]);
    }
    WeightVector::new(w)
}
