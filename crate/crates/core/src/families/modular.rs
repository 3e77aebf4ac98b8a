use serde::{Deserialize, Serialize};

use crate::error::{construction, Result};
use crate::setfun::{SetFunction, Subset};

/// Positive per-element weights.
///
/// `order` lists element indices by decreasing weight (ties by index), so
/// closed-form routines that want `w_1 >= w_2 >= ...` can map back to the
/// original labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    w: Vec<f64>,
    order: Vec<usize>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(construction("weight vector is empty"));
        }
        if let Some((i, x)) = w.iter().enumerate().find(|(_, x)| !x.is_finite() || **x <= 0.0) {
            return Err(construction(format!("weight {i} is not positive: {x}")));
        }
        let mut order: Vec<usize> = (0..w.len()).collect();
        order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
        Ok(WeightVector { w, order })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Element indices by decreasing weight.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_sorted_desc(&self) -> bool {
        self.w.windows(2).all(|p| p[0] >= p[1])
    }

    /// The same weights relabelled in decreasing order.
    pub fn sorted(&self) -> WeightVector {
        let w: Vec<f64> = self.order.iter().map(|&i| self.w[i]).collect();
        WeightVector {
            order: (0..w.len()).collect(),
            w,
        }
    }

    fn sum_over(&self, set: Subset) -> f64 {
        set.iter().fold(0.0, |acc, e| acc + self.w[e])
    }
}

/// `f(S) = sum of w_e over S`.
#[derive(Clone, Debug)]
pub struct Modular {
    weights: WeightVector,
}

impl Modular {
    pub fn new(weights: WeightVector) -> Self {
        Modular { weights }
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn eval(&self, set: Subset) -> f64 {
        self.weights.sum_over(set)
    }
}

/// `f(S) = (sum of w_e over S)^alpha` with `0 < alpha <= 1`.
#[derive(Clone, Debug)]
pub struct ConcaveModular {
    weights: WeightVector,
    alpha: f64,
}

impl ConcaveModular {
    pub fn new(weights: WeightVector, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(ConcaveModular { weights, alpha })
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(construction(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

impl SetFunction for ConcaveModular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn eval(&self, set: Subset) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        self.weights.sum_over(set).powf(self.alpha)
    }
}

/// `f(S) = min(|S|, k + 1)` over `n` elements.
#[derive(Clone, Debug)]
pub struct Truncation {
    k: usize,
    n: usize,
}

impl Truncation {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k < 2 {
            return Err(construction(format!("truncation needs k >= 2, got {k}")));
        }
        if n < k + 1 || n > crate::setfun::MAX_GROUND {
            return Err(construction(format!(
                "truncation needs k + 1 <= n <= 64, got k = {k}, n = {n}"
            )));
        }
        Ok(Truncation { k, n })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl SetFunction for Truncation {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: Subset) -> f64 {
        set.len().min(self.k + 1) as f64
    }
}
