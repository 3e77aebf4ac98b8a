//! Instance specifications and seeded sampling of ground sets.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{load_features_csv, load_ratings_csv, synth_features, synth_ratings, synth_weights};
use crate::error::{usage, Result};
use crate::families::{
    se_kernel, ConcaveModular, ConcaveRatings, Exemplar, FacilityLocation, FeatureSet, InformationGain,
    KernelMatrix, Modular, NwfCoverage, RatingsMatrix, Truncation, WeightVector,
};
use crate::setfun::{SetFunction, ValueOracle, MAX_GROUND};
use crate::sharpness::Grid;

/// Offset separating the sampling stream from the data stream of a seed.
const SAMPLE_STREAM: u64 = 0x5EED_5A3D_1E5B_0001;

pub const DEFAULT_USERS: usize = 200;
pub const DEFAULT_DIM: usize = 5;

fn default_users() -> usize {
    DEFAULT_USERS
}

fn default_dim() -> usize {
    DEFAULT_DIM
}

fn default_true() -> bool {
    true
}

fn default_ratings_alpha() -> f64 {
    0.8
}

fn default_h() -> f64 {
    0.75
}

fn default_sigma() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum RatingsSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        header: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        users: Option<usize>,
    },
    /// Items defaults to `n`; the data seed defaults to the instance seed.
    Synthetic {
        #[serde(default = "default_users")]
        users: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        items: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl Default for RatingsSource {
    fn default() -> Self {
        RatingsSource::Synthetic {
            users: DEFAULT_USERS,
            items: None,
            seed: None,
        }
    }
}

impl RatingsSource {
    pub fn load(&self, n: usize, seed: u64) -> Result<RatingsMatrix> {
        match self {
            RatingsSource::Csv { path, header, users } => load_ratings_csv(path, *header, *users),
            RatingsSource::Synthetic { users, items, seed: data } => {
                synth_ratings(*users, items.unwrap_or(n), data.unwrap_or(seed))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum FeatureSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        header: bool,
        #[serde(default = "default_true")]
        normalize: bool,
    },
    /// Points defaults to `n`; the data seed defaults to the instance seed.
    Synthetic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<usize>,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl Default for FeatureSource {
    fn default() -> Self {
        FeatureSource::Synthetic {
            points: None,
            dim: DEFAULT_DIM,
            seed: None,
        }
    }
}

impl FeatureSource {
    pub fn load(&self, n: usize, seed: u64) -> Result<FeatureSet> {
        match self {
            FeatureSource::Csv { path, header, normalize } => load_features_csv(path, *header, *normalize),
            FeatureSource::Synthetic { points, dim, seed: data } => {
                synth_features(points.unwrap_or(n), *dim, data.unwrap_or(seed))
            }
        }
    }
}

/// A family of monotone submodular functions with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    /// Missing weights are drawn uniformly from `(0, 1]`.
    Modular {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    ConcaveModular {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        alpha: f64,
    },
    /// `min(|S|, k + 1)`.
    Truncation,
    /// The tight coverage instance on `2k - 1` sets.
    NwfCoverage,
    FacilityLocation {
        #[serde(default)]
        ratings: RatingsSource,
    },
    ConcaveRatings {
        #[serde(default)]
        ratings: RatingsSource,
        #[serde(default = "default_ratings_alpha")]
        alpha: f64,
    },
    InformationGain {
        #[serde(default)]
        features: FeatureSource,
        #[serde(default = "default_h")]
        h: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Exemplar {
        #[serde(default)]
        features: FeatureSource,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Modular { .. } => "modular",
            Family::ConcaveModular { .. } => "concave_modular",
            Family::Truncation => "truncation",
            Family::NwfCoverage => "nwf_coverage",
            Family::FacilityLocation { .. } => "facility_location",
            Family::ConcaveRatings { .. } => "concave_ratings",
            Family::InformationGain { .. } => "information_gain",
            Family::Exemplar { .. } => "exemplar",
        }
    }

    /// Ground-set size this family uses for budget `k` when `n` follows
    /// the `n = 2k` rule.
    pub fn paper_n(&self, k: usize) -> usize {
        match self {
            Family::NwfCoverage => 2 * k - 1,
            _ => 2 * k,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One instance: a family, its ground-set size and budget, and a seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl InstanceSpec {
    pub fn new(family: Family, n: usize, k: usize, seed: u64) -> Self {
        InstanceSpec {
            family,
            n,
            k,
            seed,
            grid: Grid::default(),
            delta: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: InstanceSpec = serde_json::from_str(text)?;
        spec.grid.validate()?;
        Ok(spec)
    }
}

/// A sampled instance ready for analysis.
#[derive(Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub oracle: ValueOracle,
    /// Source indices of the sampled elements, ascending.
    pub elements: Vec<usize>,
    pub labels: Vec<String>,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.oracle.ground_size()
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }
}

/// `n` distinct indices out of `pool`, ascending.
fn sample_indices(pool: usize, n: usize, seed: u64, what: &str) -> Result<Vec<usize>> {
    if n > pool {
        return Err(usage(format!("cannot sample n = {n} {what} from a pool of {pool}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SAMPLE_STREAM);
    let mut idx = rand::seq::index::sample(&mut rng, pool, n).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

fn select_weights(weights: &Option<Vec<f64>>, n: usize, seed: u64) -> Result<(WeightVector, Vec<usize>)> {
    let pool = weights.clone().unwrap_or_else(|| synth_weights(n, seed));
    let idx = sample_indices(pool.len(), n, seed, "weights")?;
    let w = WeightVector::new(idx.iter().map(|&i| pool[i]).collect())?;
    Ok((w, idx))
}

/// Builds the oracle for `spec`, sampling `n` elements from the family's
/// source without replacement.
pub fn sample_instance(spec: &InstanceSpec) -> Result<Instance> {
    let InstanceSpec { n, k, seed, .. } = *spec;
    if n == 0 || n > MAX_GROUND {
        return Err(usage(format!("n must lie in 1..={MAX_GROUND}, got {n}")));
    }
    if k == 0 || k > n {
        return Err(usage(format!("budget k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    let (f, elements): (Arc<dyn SetFunction>, Vec<usize>) = match &spec.family {
        Family::Modular { weights } => {
            let (w, idx) = select_weights(weights, n, seed)?;
            (Arc::new(Modular::new(w)), idx)
        }
        Family::ConcaveModular { weights, alpha } => {
            let (w, idx) = select_weights(weights, n, seed)?;
            (Arc::new(ConcaveModular::new(w, *alpha)?), idx)
        }
        Family::Truncation => (Arc::new(Truncation::new(k, n)?), (0..n).collect()),
        Family::NwfCoverage => {
            if n != 2 * k - 1 {
                return Err(usage(format!("nwf_coverage with k = {k} has n = {}, got {n}", 2 * k - 1)));
            }
            (Arc::new(NwfCoverage::new(k)?), (0..n).collect())
        }
        Family::FacilityLocation { ratings } => {
            let r = ratings.load(n, seed)?;
            let idx = sample_indices(r.items(), n, seed, "items")?;
            (Arc::new(FacilityLocation::new(r.select_items(&idx)?)?), idx)
        }
        Family::ConcaveRatings { ratings, alpha } => {
            let r = ratings.load(n, seed)?;
            let idx = sample_indices(r.items(), n, seed, "items")?;
            (Arc::new(ConcaveRatings::new(&r.select_items(&idx)?, *alpha)?), idx)
        }
        Family::InformationGain { features, h, sigma } => {
            let x = features.load(n, seed)?;
            let idx = sample_indices(x.len(), n, seed, "points")?;
            let kernel: KernelMatrix = se_kernel(&x.select(&idx)?, *h)?.with_sigma(*sigma)?;
            (Arc::new(InformationGain::new(kernel)?), idx)
        }
        Family::Exemplar { features } => {
            let x = features.load(n, seed)?;
            let idx = sample_indices(x.len(), n, seed, "points")?;
            (Arc::new(Exemplar::new(&x.select(&idx)?)?), idx)
        }
    };
    let labels = match &spec.family {
        Family::NwfCoverage => NwfCoverage::new(k)?.labels(),
        _ => elements.iter().map(|e| e.to_string()).collect(),
    };
    Ok(Instance {
        spec: spec.clone(),
        oracle: ValueOracle::from_arc(f),
        elements,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfun::Subset;

    #[test]
    fn json_spec_round_trip() {
        let text = r#"{"family":"facility_location","params":{"ratings":{"source":"synthetic","users":10,"items":10}},"n":4,"k":2,"seed":9,"grid":{"c_max":2.0,"c_step":0.05}}"#;
        let spec = InstanceSpec::from_json(text).unwrap();
        assert_eq!(spec.n, 4);
        assert_eq!(spec.grid, Grid::new(2.0, 0.05).unwrap());
        let back: InstanceSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let plain = InstanceSpec::from_json(r#"{"family":"truncation","n":10,"k":5}"#).unwrap();
        assert_eq!(plain.family, Family::Truncation);
        assert_eq!(plain.grid, Grid::default());
        let cr = InstanceSpec::from_json(r#"{"family":"concave_ratings","params":{},"n":6,"k":3}"#).unwrap();
        assert_eq!(
            cr.family,
            Family::ConcaveRatings {
                ratings: RatingsSource::default(),
                alpha: 0.8
            }
        );
        assert!(InstanceSpec::from_json(r#"{"family":"nope","n":1,"k":1}"#).is_err());
    }

    #[test]
    fn facility_sampling() {
        let fam = Family::FacilityLocation {
            ratings: RatingsSource::Synthetic {
                users: 20,
                items: Some(10),
                seed: None,
            },
        };
        let spec = InstanceSpec::new(fam, 4, 2, 5);
        let a = sample_instance(&spec).unwrap();
        let b = sample_instance(&spec).unwrap();
        assert_eq!(a.n(), 4);
        assert_eq!(a.elements, b.elements);
        assert!(a.elements.windows(2).all(|w| w[0] < w[1]));
        let full = Subset::full(4);
        assert_eq!(a.oracle.eval(full), b.oracle.eval(full));
        let too_many = InstanceSpec { n: 11, ..spec };
        assert!(matches!(sample_instance(&too_many), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn every_family_builds() {
        let families = [
            Family::Modular { weights: None },
            Family::ConcaveModular { weights: None, alpha: 0.5 },
            Family::Truncation,
            Family::FacilityLocation { ratings: RatingsSource::default() },
            Family::ConcaveRatings { ratings: RatingsSource::default(), alpha: 0.8 },
            Family::InformationGain { features: FeatureSource::default(), h: 0.75, sigma: 1.0 },
            Family::Exemplar { features: FeatureSource::default() },
        ];
        for fam in families {
            let inst = sample_instance(&InstanceSpec::new(fam.clone(), 6, 3, 1)).unwrap();
            assert_eq!(inst.n(), 6, "{fam}");
            assert_eq!(inst.oracle.eval(Subset::empty(6)), 0.0, "{fam}");
        }
        let cov = sample_instance(&InstanceSpec::new(Family::NwfCoverage, 5, 3, 0)).unwrap();
        assert_eq!(cov.oracle.eval(Subset::full(5)), 27.0);
        assert!(sample_instance(&InstanceSpec::new(Family::NwfCoverage, 6, 3, 0)).is_err());
    }
}
