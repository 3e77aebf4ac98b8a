//! Full per-instance analysis and the k sweep.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance::{sample_instance, Family, FeatureSource, Instance, InstanceSpec, RatingsSource};
use crate::error::{usage, Error, Result};
use crate::families::{validate_monotone_submodular, ValidationReport};
use crate::optimize::{greedy, lazy_greedy, optima_from_table, worst_tie_greedy, GreedyTrajectory, DEFAULT_NODE_BUDGET};
use crate::setfun::{Subset, Table, EPS_VAL};
use crate::sharpness::{
    curvature, curvature_bound, fit_notions, optima_multiplicity, trajectory_floor, FitOptions, FitResult,
    Multiplicity, Notion,
};

/// Slack allowed between a realized ratio and a guarantee.
pub const SOUNDNESS_TOL: f64 = 1e-7;

/// Ground sets up to this size are validated unless told otherwise.
pub const AUTO_VALIDATE_MAX: usize = 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidateMode {
    /// Validate when `n <= 12`.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub fit: FitOptions,
    pub notions: Vec<Notion>,
    pub curvature: bool,
    /// Used by the approximate notion.
    pub delta: f64,
    pub validate: ValidateMode,
    pub lazy: bool,
    pub worst_tie_budget: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            fit: FitOptions::default(),
            notions: Notion::ALL.to_vec(),
            curvature: true,
            delta: 0.0,
            validate: ValidateMode::Auto,
            lazy: false,
            worst_tie_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub gamma: f64,
    pub bound: f64,
}

/// A guarantee the realized greedy run fails to meet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessViolation {
    /// Notion name, `curvature`, or `floor[i]`.
    pub source: String,
    /// `greedy` or `worst_tie`.
    pub run: String,
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub instance: InstanceSpec,
    pub elements: Vec<usize>,
    pub labels: Vec<String>,
    pub opt: f64,
    pub optimum: Subset,
    pub optima: Multiplicity,
    pub greedy: GreedyTrajectory,
    pub greedy_ratio: f64,
    pub worst_tie_value: f64,
    pub worst_tie_picks: Vec<usize>,
    pub worst_tie_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<CurvatureReport>,
    pub fits: Vec<FitResult>,
    /// Trajectory floor of the fitted static monotonic parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    /// Oracle evaluations spent by greedy.
    pub queries: u64,
    /// Oracle evaluations spent tabulating the function.
    pub table_queries: u64,
    pub violations: Vec<SoundnessViolation>,
    pub wall_ms: f64,
}

impl AnalysisReport {
    pub fn k(&self) -> usize {
        self.instance.k
    }

    pub fn fit(&self, notion: Notion) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.notion == notion)
    }

    pub fn bound(&self, notion: Notion) -> Option<f64> {
        self.fit(notion).map(|f| f.bound)
    }

    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }
}

fn ratio(value: f64, opt: f64) -> f64 {
    if opt <= EPS_VAL {
        1.0
    } else {
        value / opt
    }
}

fn should_validate(mode: ValidateMode, n: usize) -> bool {
    match mode {
        ValidateMode::Auto => n <= AUTO_VALIDATE_MAX,
        ValidateMode::Always => true,
        ValidateMode::Never => false,
    }
}

/// Samples and analyzes one instance.
pub fn analyze(spec: &InstanceSpec, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    analyze_instance(&sample_instance(spec)?, opts)
}

/// Runs the whole pipeline on a sampled instance: optional validation,
/// exhaustive optima, greedy and worst-tie greedy, curvature, the
/// requested fits and trajectory floors, then checks every guarantee
/// against the realized ratios.
pub fn analyze_instance(inst: &Instance, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let start = Instant::now();
    let n = inst.n();
    let k = inst.k();
    let mut fit_opts = opts.fit;
    fit_opts.grid = inst.spec.grid;
    fit_opts.grid.validate()?;
    let delta = inst.spec.delta.unwrap_or(opts.delta);

    let validation = if should_validate(opts.validate, n) {
        let report = validate_monotone_submodular(&inst.oracle)?;
        if let Some(v) = &report.violation {
            return Err(Error::Validation(format!(
                "{} instance (k = {k}, seed = {}) is not monotone submodular: {}",
                inst.spec.family,
                inst.spec.seed,
                serde_json::to_string(v)?
            )));
        }
        Some(report)
    } else {
        log::info!("skipping submodularity validation for n = {n}");
        None
    };

    inst.oracle.reset_queries();
    let run = if opts.lazy {
        lazy_greedy(&inst.oracle, k)?
    } else {
        greedy(&inst.oracle, k)?
    };
    inst.oracle.reset_queries();
    let table = Table::build(&inst.oracle)?;
    let table_queries = inst.oracle.queries();

    let optima = optima_from_table(&table, k)?;
    let opt = optima.opt_value;
    let worst = worst_tie_greedy(&table, k, opts.worst_tie_budget)?;
    let curv = if opts.curvature {
        let gamma = curvature(&table)?;
        Some(CurvatureReport {
            gamma,
            bound: curvature_bound(gamma),
        })
    } else {
        None
    };
    let fits = if opts.notions.is_empty() {
        Vec::new()
    } else {
        fit_notions(&table, &optima, &opts.notions, delta, &fit_opts)?
    };
    let floors = fits
        .iter()
        .find(|f| f.notion == Notion::Monotonic)
        .and_then(FitResult::static_params)
        .map(|p| trajectory_floor(p, k, opt));

    let greedy_ratio = ratio(run.final_value(), opt);
    let worst_tie_ratio = ratio(worst.value, opt);
    let mut report = AnalysisReport {
        instance: inst.spec.clone(),
        elements: inst.elements.clone(),
        labels: inst.labels.clone(),
        opt,
        optimum: optima.optima[0],
        optima: optima_multiplicity(&optima),
        greedy: run,
        greedy_ratio,
        worst_tie_value: worst.value,
        worst_tie_picks: worst.picks,
        worst_tie_ratio,
        curvature: curv,
        fits,
        floors,
        validation,
        queries: 0,
        table_queries,
        violations: Vec::new(),
        wall_ms: 0.0,
    };
    report.queries = report.greedy.queries;
    report.violations = soundness_violations(&report);
    for v in &report.violations {
        log::warn!(
            "{} run misses the {} guarantee: ratio {} < bound {}",
            v.run,
            v.source,
            v.ratio,
            v.bound
        );
    }
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Every guarantee in the report the greedy or worst-tie run falls short
/// of by more than [`SOUNDNESS_TOL`].
pub fn soundness_violations(r: &AnalysisReport) -> Vec<SoundnessViolation> {
    let mut bounds: Vec<(String, f64)> = r.fits.iter().map(|f| (f.notion.name().to_string(), f.bound)).collect();
    if let Some(c) = r.curvature {
        bounds.push(("curvature".into(), c.bound));
    }
    let mut out = Vec::new();
    for (run, value) in [("greedy", r.greedy_ratio), ("worst_tie", r.worst_tie_ratio)] {
        for (source, bound) in &bounds {
            if value < bound - SOUNDNESS_TOL {
                out.push(SoundnessViolation {
                    source: source.clone(),
                    run: run.into(),
                    ratio: value,
                    bound: *bound,
                });
            }
        }
    }
    if let Some(floors) = &r.floors {
        for (i, (a, b)) in r.greedy.values.iter().zip(floors).enumerate() {
            let (a, b) = (ratio(*a, r.opt), ratio(*b, r.opt));
            if a < b - SOUNDNESS_TOL {
                out.push(SoundnessViolation {
                    source: format!("floor[{i}]"),
                    run: "greedy".into(),
                    ratio: a,
                    bound: b,
                });
            }
        }
    }
    out
}

/// A sweep over budgets with `n` following the `n = 2k` rule unless set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    pub k_min: usize,
    pub k_max: usize,
    /// Fixed ground-set size; `None` samples `n = 2k` per row.
    pub n: Option<usize>,
    pub seed: u64,
    pub repeats: usize,
    pub grid: crate::sharpness::Grid,
    pub delta: Option<f64>,
    pub analysis: AnalysisOptions,
}

impl ExperimentConfig {
    pub fn new(family: Family, k_min: usize, k_max: usize, seed: u64) -> Self {
        ExperimentConfig {
            family,
            k_min,
            k_max,
            n: None,
            seed,
            repeats: 1,
            grid: Default::default(),
            delta: None,
            analysis: AnalysisOptions {
                notions: super::report::CSV_NOTIONS.to_vec(),
                ..Default::default()
            },
        }
    }

    fn n_for(&self, k: usize) -> usize {
        self.n.unwrap_or_else(|| self.family.paper_n(k))
    }

    /// Synthetic sources without their own seed draw from the base seed
    /// and a pool sized for the largest row, so every row samples from
    /// one dataset.
    fn pinned_family(&self) -> Family {
        let pool = (self.k_min..=self.k_max).map(|k| self.n_for(k)).max().unwrap_or(0);
        let pin_ratings = |r: &RatingsSource| match r {
            RatingsSource::Synthetic { users, items, seed } => RatingsSource::Synthetic {
                users: *users,
                items: Some(items.unwrap_or(pool)),
                seed: Some(seed.unwrap_or(self.seed)),
            },
            other => other.clone(),
        };
        let pin_features = |x: &FeatureSource| match x {
            FeatureSource::Synthetic { points, dim, seed } => FeatureSource::Synthetic {
                points: Some(points.unwrap_or(pool)),
                dim: *dim,
                seed: Some(seed.unwrap_or(self.seed)),
            },
            other => other.clone(),
        };
        match &self.family {
            Family::FacilityLocation { ratings } => Family::FacilityLocation {
                ratings: pin_ratings(ratings),
            },
            Family::ConcaveRatings { ratings, alpha } => Family::ConcaveRatings {
                ratings: pin_ratings(ratings),
                alpha: *alpha,
            },
            Family::InformationGain { features, h, sigma } => Family::InformationGain {
                features: pin_features(features),
                h: *h,
                sigma: *sigma,
            },
            Family::Exemplar { features } => Family::Exemplar {
                features: pin_features(features),
            },
            other => other.clone(),
        }
    }

    /// Instance specs of every row, in report order.
    pub fn rows(&self) -> Result<Vec<InstanceSpec>> {
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(usage(format!("empty budget range {}..={}", self.k_min, self.k_max)));
        }
        if self.repeats == 0 {
            return Err(usage("repeats must be at least 1"));
        }
        let family = self.pinned_family();
        let mut rows = Vec::new();
        for k in self.k_min..=self.k_max {
            for rep in 0..self.repeats {
                rows.push(InstanceSpec {
                    family: family.clone(),
                    n: self.n_for(k),
                    k,
                    seed: row_seed(self.seed, k, rep),
                    grid: self.grid,
                    delta: self.delta,
                });
            }
        }
        Ok(rows)
    }
}

/// Seed of the `rep`-th row at budget `k`.
pub fn row_seed(seed: u64, k: usize, rep: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((k as u64) << 32 | rep as u64)
}

/// Analyzes every row in parallel, keeping `k` order. Rows that fail
/// submodularity validation are dropped with a warning.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<AnalysisReport>> {
    cfg.grid.validate()?;
    let rows = cfg.rows()?;
    let results: Vec<Result<AnalysisReport>> = rows.par_iter().map(|spec| analyze(spec, &cfg.analysis)).collect();
    let mut out = Vec::with_capacity(results.len());
    for (spec, r) in rows.iter().zip(results) {
        match r {
            Ok(report) => {
                log::info!("k = {} seed = {} done in {:.1} ms", spec.k, spec.seed, report.wall_ms);
                out.push(report)
            }
            Err(Error::Validation(msg)) => log::warn!("skipping row k = {}: {msg}", spec.k),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
