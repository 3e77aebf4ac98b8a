use nalgebra::DMatrix;

use super::exemplar::{sq_dist, FeatureSet};
use crate::error::{construction, Error, Result};
use crate::setfun::{SetFunction, Subset, MAX_GROUND};

/// A symmetric positive-definite covariance matrix with a noise scale.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    k: DMatrix<f64>,
    sigma: f64,
}

impl KernelMatrix {
    pub fn new(k: DMatrix<f64>, sigma: f64) -> Result<Self> {
        if !k.is_square() || k.nrows() == 0 {
            return Err(construction("kernel matrix must be square and non-empty"));
        }
        if k.nrows() > MAX_GROUND {
            return Err(construction("kernel matrix exceeds the ground set limit"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(construction(format!("noise scale must be positive, got {sigma}")));
        }
        let n = k.nrows();
        for i in 0..n {
            for j in 0..i {
                if (k[(i, j)] - k[(j, i)]).abs() > 1e-12 {
                    return Err(construction(format!("kernel matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(KernelMatrix { k, sigma })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, sigma: f64) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(construction("kernel matrix must be square"));
        }
        KernelMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]), sigma)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(construction(format!("noise scale must be positive, got {sigma}")));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.k[(i, j)]
    }
}

/// Squared-exponential kernel `K(e, e') = exp(-||x_e - x_e'||^2 / h)`,
/// with unit noise scale.
pub fn se_kernel(features: &FeatureSet, h: f64) -> Result<KernelMatrix> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(construction(format!("bandwidth h must be positive, got {h}")));
    }
    let n = features.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in 0..i {
            let v = (-sq_dist(features.vector(i), features.vector(j)) / h).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    KernelMatrix::new(k, 1.0)
}

/// Information gain `f(A) = 1/2 log det(I + sigma^-2 K_{A,A})`.
#[derive(Clone, Debug)]
pub struct InformationGain {
    kernel: KernelMatrix,
    scale: f64,
}

impl InformationGain {
    /// Fails if `I + sigma^-2 K` is not positive definite; every principal
    /// submatrix is then positive definite as well.
    pub fn new(kernel: KernelMatrix) -> Result<Self> {
        let scale = kernel.sigma().powi(-2);
        let f = InformationGain { kernel, scale };
        f.try_eval(Subset::full(f.ground_size()))?;
        Ok(f)
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    pub fn try_eval(&self, set: Subset) -> Result<f64> {
        let idx = set.to_vec();
        let s = idx.len();
        if s == 0 {
            return Ok(0.0);
        }
        let m = DMatrix::from_fn(s, s, |a, b| {
            let v = self.scale * self.kernel.get(idx[a], idx[b]);
            if a == b {
                1.0 + v
            } else {
                v
            }
        });
        let chol = m.cholesky().ok_or_else(|| Error::Numeric {
            subset: set,
            message: "I + K/sigma^2 is not positive definite".into(),
        })?;
        // 1/2 log det = sum log L_ii
        Ok(chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum())
    }
}

impl SetFunction for InformationGain {
    fn ground_size(&self) -> usize {
        self.kernel.n()
    }

    fn eval(&self, set: Subset) -> f64 {
        self.try_eval(set)
            .expect("principal submatrix of a positive-definite matrix")
    }
}
