//! CSV loaders and seeded synthetic data.
//!
//! Synthetic data is drawn from ChaCha8 seeded with `seed_from_u64`, so a
//! seed names the same matrix on every platform.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{construction, Error, Result};
use crate::families::{FeatureSet, RatingsMatrix};

fn read_numeric_rows(path: &Path, header: bool) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| parse_err(format!("column {}: '{cell}' is not a number", col + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(format!(
                    "expected {} columns, found {}",
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

/// One row per user, one column per item. `users` keeps the first `m`
/// rows.
pub fn load_ratings_csv(path: impl AsRef<Path>, header: bool, users: Option<usize>) -> Result<RatingsMatrix> {
    let path = path.as_ref();
    let rows = read_numeric_rows(path, header)?;
    let mut r = RatingsMatrix::new(rows).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    if let Some(m) = users {
        if m == 0 {
            return Err(construction("users must be positive"));
        }
        r.truncate_users(m);
    }
    Ok(r)
}

/// One feature vector per row; the origin is the exemplar reference point.
pub fn load_features_csv(path: impl AsRef<Path>, header: bool, normalize: bool) -> Result<FeatureSet> {
    let rows = read_numeric_rows(path.as_ref(), header)?;
    let set = FeatureSet::new(rows)?;
    if normalize {
        set.normalized()
    } else {
        Ok(set)
    }
}

/// `m x n` integer ratings drawn uniformly from `0..=5`.
pub fn synth_ratings(m: usize, n: usize, seed: u64) -> Result<RatingsMatrix> {
    if m == 0 || n == 0 {
        return Err(construction("ratings need at least one user and one item"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(0..=5u8) as f64).collect())
        .collect();
    RatingsMatrix::new(rows)
}

/// `n` points drawn uniformly from the unit sphere in `dim` dimensions.
pub fn synth_features(n: usize, dim: usize, seed: u64) -> Result<FeatureSet> {
    if n == 0 || dim == 0 {
        return Err(construction("features need at least one point and one dimension"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = Vec::with_capacity(n);
    while vectors.len() < n {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            vectors.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    FeatureSet::new(vectors)
}

/// `n` weights drawn uniformly from `(0, 1]`.
pub fn synth_weights(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| 1.0 - rng.random::<f64>()).collect()
}
