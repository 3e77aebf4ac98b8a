use serde::{Deserialize, Serialize};

use crate::error::{construction, Result};
use crate::setfun::{SetFunction, Subset, MAX_GROUND};

/// One feature vector per element plus an auxiliary reference point `e0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    vectors: Vec<Vec<f64>>,
    origin: Vec<f64>,
}

impl FeatureSet {
    /// Features with `e0` at the origin.
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        FeatureSet::with_origin(vectors, vec![0.0; dim])
    }

    pub fn with_origin(vectors: Vec<Vec<f64>>, origin: Vec<f64>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(construction("feature set is empty"));
        }
        let dim = origin.len();
        if dim == 0 {
            return Err(construction("feature vectors have dimension 0"));
        }
        if let Some(i) = vectors.iter().position(|v| v.len() != dim) {
            return Err(construction(format!(
                "vector {i} has dimension {}, expected {dim}",
                vectors[i].len()
            )));
        }
        if vectors.iter().flatten().chain(&origin).any(|x| !x.is_finite()) {
            return Err(construction("feature vectors contain non-finite values"));
        }
        Ok(FeatureSet { vectors, origin })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn vector(&self, e: usize) -> &[f64] {
        &self.vectors[e]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Each vector shifted to zero mean and scaled to unit Euclidean norm.
    pub fn normalized(&self) -> Result<FeatureSet> {
        let mut out = Vec::with_capacity(self.len());
        for (i, v) in self.vectors.iter().enumerate() {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let centered: Vec<f64> = v.iter().map(|x| x - mean).collect();
            let norm = centered.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm <= 1e-12 {
                return Err(construction(format!(
                    "vector {i} has zero norm after centering; cannot normalize"
                )));
            }
            out.push(centered.into_iter().map(|x| x / norm).collect());
        }
        FeatureSet::with_origin(out, self.origin.clone())
    }

    /// Keeps the listed elements, in the given order.
    pub fn select(&self, idx: &[usize]) -> Result<FeatureSet> {
        if let Some(i) = idx.iter().find(|&&i| i >= self.len()) {
            return Err(construction(format!("element {i} out of range")));
        }
        FeatureSet::with_origin(
            idx.iter().map(|&i| self.vectors[i].clone()).collect(),
            self.origin.clone(),
        )
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exemplar-based clustering objective `f(A) = L({e0}) - L(A + e0)` where
/// `L(A) = (1/|V|) sum_{e in V} min_{v in A} d(e, v)` and `d` is Euclidean.
#[derive(Clone, Debug)]
pub struct Exemplar {
    n: usize,
    /// `dist[e * n + v]`
    dist: Vec<f64>,
    to_origin: Vec<f64>,
    base: f64,
}

impl Exemplar {
    pub fn new(features: &FeatureSet) -> Result<Self> {
        let n = features.len();
        if n > MAX_GROUND {
            return Err(construction(format!("{n} elements exceed the ground set limit")));
        }
        let mut dist = vec![0.0; n * n];
        for e in 0..n {
            for v in 0..n {
                dist[e * n + v] = euclidean(features.vector(e), features.vector(v));
            }
        }
        let to_origin: Vec<f64> = (0..n)
            .map(|e| euclidean(features.vector(e), features.origin()))
            .collect();
        let base = to_origin.iter().sum::<f64>() / n as f64;
        Ok(Exemplar {
            n,
            dist,
            to_origin,
            base,
        })
    }

    /// `L(A + e0)`.
    pub fn loss(&self, set: Subset) -> f64 {
        let total: f64 = (0..self.n)
            .map(|e| {
                set.iter()
                    .map(|v| self.dist[e * self.n + v])
                    .fold(self.to_origin[e], f64::min)
            })
            .sum();
        total / self.n as f64
    }
}

impl SetFunction for Exemplar {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: Subset) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        (self.base - self.loss(set)).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_instance() {
        let fs = FeatureSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let f = Exemplar::new(&fs).unwrap();
        assert!((f.eval(Subset::from_elements(2, [0]).unwrap()) - 0.5).abs() < 1e-12);
        assert_eq!(f.eval(Subset::empty(2)), 0.0);
        assert!((f.eval(Subset::full(2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalization() {
        let fs = FeatureSet::new(vec![vec![2.0, 0.0]]).unwrap().normalized().unwrap();
        let r = 0.5f64.sqrt();
        assert!((fs.vector(0)[0] - r).abs() < 1e-12);
        assert!((fs.vector(0)[1] + r).abs() < 1e-12);
        assert!(FeatureSet::new(vec![vec![0.0, 0.0]]).unwrap().normalized().is_err());
        assert!(FeatureSet::new(vec![vec![3.0, 3.0]]).unwrap().normalized().is_err());
    }

    #[test]
    fn invalid_feature_sets() {
        assert!(FeatureSet::new(vec![]).is_err());
        assert!(FeatureSet::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
