//! Sharpness parameter types and the guarantee formulas attached to them.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::setfun::check_delta;

/// A `(c, theta)` pair with `c >= 1` and `0 < theta <= 1`, or the
/// `theta -> 0` limit at a given `c`.
///
/// The limit point is the joint limit in which the right-hand side of the
/// monotonic inequality vanishes; every monotone submodular function
/// satisfies it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpParams {
    pub c: f64,
    /// `0.0` when `limit` is set.
    pub theta: f64,
    #[serde(default)]
    pub limit: bool,
}

impl SharpParams {
    pub fn new(c: f64, theta: f64) -> Result<Self> {
        if !(c >= 1.0 && c.is_finite()) {
            return Err(usage(format!("c must be >= 1, got {c}")));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(usage(format!("theta must lie in (0, 1], got {theta}")));
        }
        Ok(SharpParams { c, theta, limit: false })
    }

    pub fn limit(c: f64) -> Result<Self> {
        if !(c >= 1.0 && c.is_finite()) {
            return Err(usage(format!("c must be >= 1, got {c}")));
        }
        Ok(SharpParams { c, theta: 0.0, limit: true })
    }

    /// `(1, theta -> 0)`, the point every instance admits.
    pub fn classical() -> Self {
        SharpParams { c: 1.0, theta: 0.0, limit: true }
    }
}

/// Per-size parameters `(c_i, theta_i)` for `i = 0..k-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicSharpParams {
    pub levels: Vec<SharpParams>,
}

impl DynamicSharpParams {
    pub fn new(levels: Vec<SharpParams>) -> Result<Self> {
        if levels.is_empty() {
            return Err(usage("dynamic parameters need at least one level"));
        }
        Ok(DynamicSharpParams { levels })
    }

    pub fn constant(p: SharpParams, k: usize) -> Self {
        DynamicSharpParams { levels: vec![p; k] }
    }

    pub fn from_vectors(c: &[f64], theta: &[f64]) -> Result<Self> {
        if c.len() != theta.len() {
            return Err(usage("c and theta vectors differ in length"));
        }
        let levels = c
            .iter()
            .zip(theta)
            .map(|(&c, &t)| if t == 0.0 { SharpParams::limit(c) } else { SharpParams::new(c, t) })
            .collect::<Result<Vec<_>>>()?;
        DynamicSharpParams::new(levels)
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn c(&self) -> Vec<f64> {
        self.levels.iter().map(|p| p.c).collect()
    }

    pub fn theta(&self) -> Vec<f64> {
        self.levels.iter().map(|p| p.theta).collect()
    }
}

/// `(delta, c, theta)` for approximate sharpness, `delta` in `[0, 1 - 1/k]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxSharpParams {
    pub delta: f64,
    pub sharp: SharpParams,
}

impl ApproxSharpParams {
    pub fn new(delta: f64, sharp: SharpParams, k: usize) -> Result<Self> {
        check_delta(delta, k)?;
        Ok(ApproxSharpParams { delta, sharp })
    }
}

/// `(1 - theta/c)^(1/theta)`, or `exp(-1/c)` in the limit.
fn residual(p: SharpParams) -> f64 {
    if p.limit {
        (-1.0 / p.c).exp()
    } else {
        ((-p.theta / p.c).ln_1p() / p.theta).exp()
    }
}

/// Static guarantee `1 - (1 - theta/c)^(1/theta)`; `1 - e^(-1/c)` in the
/// limit.
pub fn guarantee_static(p: SharpParams) -> f64 {
    1.0 - residual(p)
}

/// Nested guarantee for per-size parameters.
///
/// Tracks the unreached fraction `u_i = 1 - b_i` through
/// `u_{i+1} = (u_i^theta_i - theta_i / (c_i k))^(1/theta_i)`; a non-positive
/// radicand means the bound has saturated at 1.
pub fn guarantee_dynamic(p: &DynamicSharpParams, k: usize) -> f64 {
    let mut u = 1.0;
    for level in p.levels.iter().take(k) {
        match dynamic_step(u, *level, k) {
            Some(next) => u = next,
            None => return 1.0,
        }
    }
    1.0 - u
}

/// One level of the nested recursion; `None` once the bound saturates.
pub(crate) fn dynamic_step(u: f64, p: SharpParams, k: usize) -> Option<f64> {
    let k = k as f64;
    if p.limit {
        return Some(u * (-1.0 / (p.c * k)).exp());
    }
    let base = u.powf(p.theta) - p.theta / (p.c * k);
    if base <= 0.0 {
        None
    } else {
        Some(base.powf(1.0 / p.theta))
    }
}

/// `1/(1 - delta + delta k c) * [1 - ((1 - delta)(1 - theta/c))^(1/theta)]`.
///
/// At `delta = 0` this is exactly [`guarantee_static`].
pub fn guarantee_approximate(p: ApproxSharpParams, k: usize) -> f64 {
    let ApproxSharpParams { delta, sharp } = p;
    if delta == 0.0 {
        return guarantee_static(sharp);
    }
    let scale = 1.0 / (1.0 - delta + delta * k as f64 * sharp.c);
    let shrink = if sharp.limit {
        0.0
    } else {
        (1.0 - delta).powf(1.0 / sharp.theta) * residual(sharp)
    };
    scale * (1.0 - shrink)
}

/// Greedy lower envelope `b_0..b_k`,
/// `b_i = opt * [1 - (1 - (theta/c)(i/k))^(1/theta)]`.
pub fn trajectory_floor(p: SharpParams, k: usize, opt: f64) -> Vec<f64> {
    (0..=k)
        .map(|i| {
            let frac = i as f64 / k as f64;
            let rest = if p.limit {
                (-frac / p.c).exp()
            } else {
                ((-p.theta / p.c * frac).ln_1p() / p.theta).exp()
            };
            opt * (1.0 - rest)
        })
        .collect()
}

/// Curvature guarantee `(1 - e^-gamma) / gamma`, 1 in the `gamma -> 0`
/// limit.
pub fn curvature_bound(gamma: f64) -> f64 {
    if gamma < 1e-9 {
        1.0
    } else {
        -(-gamma).exp_m1() / gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: f64, t: f64) -> SharpParams {
        SharpParams::new(c, t).unwrap()
    }

    #[test]
    fn static_examples() {
        assert_eq!(guarantee_static(p(1.0, 1.0)), 1.0);
        assert!((guarantee_static(SharpParams::classical()) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((guarantee_static(p(2.0, 1.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert!(SharpParams::new(0.9, 0.5).is_err());
        assert!(SharpParams::new(1.0, 0.0).is_err());
        assert!(SharpParams::new(1.0, 1.1).is_err());
        assert!(SharpParams::limit(0.5).is_err());
        assert!(ApproxSharpParams::new(0.6, p(1.0, 1.0), 2).is_err());
        assert!(DynamicSharpParams::from_vectors(&[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn dynamic_examples() {
        let d = DynamicSharpParams::from_vectors(&[1.0, 1.0], &[1.0, 0.5]).unwrap();
        let expected = 1.0 - (0.5f64.sqrt() - 0.25).powi(2);
        assert!((guarantee_dynamic(&d, 2) - expected).abs() < 1e-12);
        assert!((guarantee_dynamic(&d, 2) - 0.79105).abs() < 1e-5);
        let one = DynamicSharpParams::constant(p(1.0, 1.0), 2);
        assert!((guarantee_dynamic(&one, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dynamic_saturates_at_one() {
        // u^theta drops below theta/(c k) at the second level
        let d = DynamicSharpParams::from_vectors(&[1.0, 1.0, 1.0], &[1.0, 0.1, 1.0]).unwrap();
        let g = guarantee_dynamic(&d, 3);
        assert!(g <= 1.0 && g > 0.0);
        let sat = DynamicSharpParams::from_vectors(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(guarantee_dynamic(&sat, 1), 1.0);
    }

    #[test]
    fn dynamic_limit_levels_match_static_limit() {
        let k = 4;
        let d = DynamicSharpParams::constant(SharpParams::limit(1.5).unwrap(), k);
        let s = guarantee_static(SharpParams::limit(1.5).unwrap());
        assert!((guarantee_dynamic(&d, k) - s).abs() < 1e-12);
    }

    #[test]
    fn approximate_examples() {
        let a = ApproxSharpParams::new(0.0, p(1.0, 1.0), 2).unwrap();
        assert_eq!(guarantee_approximate(a, 2), 1.0);
        let a = ApproxSharpParams::new(0.5, p(1.0, 1.0), 2).unwrap();
        assert!((guarantee_approximate(a, 2) - 2.0 / 3.0).abs() < 1e-12);
        for c in [1.0, 1.3, 2.0, 3.0] {
            for t in [0.1, 0.4, 0.77, 1.0] {
                let a = ApproxSharpParams::new(0.0, p(c, t), 5).unwrap();
                assert!((guarantee_approximate(a, 5) - guarantee_static(p(c, t))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn floors() {
        let b = trajectory_floor(p(1.0, 1.0), 2, 1.0);
        assert_eq!(b.len(), 3);
        assert!((b[0]).abs() < 1e-15 && (b[1] - 0.5).abs() < 1e-15 && (b[2] - 1.0).abs() < 1e-15);
        let q = p(1.7, 0.35);
        let b = trajectory_floor(q, 6, 3.0);
        assert!((b[6] - 3.0 * guarantee_static(q)).abs() < 1e-12);
        assert!(b.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn curvature_bound_values() {
        assert!((curvature_bound(1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert_eq!(curvature_bound(0.0), 1.0);
        assert_eq!(curvature_bound(1e-12), 1.0);
        assert!((curvature_bound(0.5) - 0.786_938_680_574_733).abs() < 1e-12);
    }
}
