//! Grid search for the largest guarantee each sharpness notion certifies.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::{
    dynamic_step, guarantee_approximate, guarantee_dynamic, guarantee_static, ApproxSharpParams,
    DynamicSharpParams, SharpParams,
};
use super::profile::Admissible;
use crate::error::{usage, Result};
use crate::optimize::OptimaSet;
use crate::setfun::{check_delta, masks_up_to, Subset, Table, EPS_VAL};

/// Relative slack under which a gap counts as equal to OPT.
const NEAR_OPT: f64 = 1e-12;

/// Default cap on how many optimal sets a fit examines.
pub const DEFAULT_MAX_OPTIMA: usize = 1024;

/// The `c` grid `1, 1 + step, ..., c_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub c_max: f64,
    pub c_step: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { c_max: 3.0, c_step: 0.01 }
    }
}

impl Grid {
    pub fn new(c_max: f64, c_step: f64) -> Result<Self> {
        let g = Grid { c_max, c_step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_max >= 1.0 && self.c_max.is_finite()) {
            return Err(usage(format!("c_max must be >= 1, got {}", self.c_max)));
        }
        if !(self.c_step > 0.0 && self.c_step.is_finite()) {
            return Err(usage(format!("c_step must be positive, got {}", self.c_step)));
        }
        if (self.c_max - 1.0) / self.c_step > 1e7 {
            return Err(usage("grid has more than 10^7 points"));
        }
        Ok(())
    }

    /// Grid points `1 + j * step`, computed without accumulation.
    pub fn points(&self) -> Vec<f64> {
        let steps = ((self.c_max - 1.0) / self.c_step + 1e-9).floor() as usize;
        (0..=steps).map(|j| 1.0 + j as f64 * self.c_step).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub grid: Grid,
    /// Walk `c` upward and stop at the first point that does not improve
    /// the bound, instead of sweeping the whole grid.
    #[serde(default)]
    pub paper_heuristic: bool,
    pub max_optima: usize,
    /// Sets ranged over by the static monotonic and approximate fits.
    #[serde(default)]
    pub admissible: Admissible,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            grid: Grid::default(),
            paper_heuristic: false,
            max_optima: DEFAULT_MAX_OPTIMA,
            admissible: Admissible::ExactlyK,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    Monotonic,
    DynamicMonotonic,
    Submodular,
    DynamicSubmodular,
    Approximate,
}

impl Notion {
    pub const ALL: [Notion; 5] = [
        Notion::Monotonic,
        Notion::DynamicMonotonic,
        Notion::Submodular,
        Notion::DynamicSubmodular,
        Notion::Approximate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Notion::Monotonic => "monotonic",
            Notion::DynamicMonotonic => "dynamic_monotonic",
            Notion::Submodular => "submodular",
            Notion::DynamicSubmodular => "dynamic_submodular",
            Notion::Approximate => "approximate",
        }
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Notion {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Notion::ALL
            .into_iter()
            .find(|n| n.name() == key)
            .ok_or_else(|| usage(format!("unknown sharpness notion '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitParams {
    Static(SharpParams),
    Dynamic(DynamicSharpParams),
    Approximate(ApproxSharpParams),
}

/// The constraint that limits the fitted parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Every constraint is slack at `theta = 1`.
    Clamped,
    /// No grid point beats the `theta -> 0` limit.
    Limit,
    /// `W(ell)` attained at `set` bounds `theta`.
    Profile { ell: usize, set: Subset },
    /// The inequality at `set` bounds `theta`.
    Set { set: Subset },
    /// One certificate per size.
    Levels { levels: Vec<Certificate> },
    /// The constant vector of the static fit beat the per-size choice.
    Seeded { from: Box<Certificate> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub notion: Notion,
    pub params: FitParams,
    pub bound: f64,
    pub s_star: Subset,
    pub opt: f64,
    pub certificate: Certificate,
}

impl FitResult {
    /// The static pair, if the params are static.
    pub fn static_params(&self) -> Option<SharpParams> {
        match &self.params {
            FitParams::Static(p) => Some(*p),
            FitParams::Approximate(a) => Some(a.sharp),
            FitParams::Dynamic(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Witness {
    set: Subset,
    ell: Option<usize>,
}

impl Witness {
    fn certificate(self) -> Certificate {
        match self.ell {
            Some(ell) => Certificate::Profile { ell, set: self.set },
            None => Certificate::Set { set: self.set },
        }
    }
}

/// `theta <= (a + ln c) / b` with `b > 0`.
#[derive(Clone, Copy, Debug)]
struct Line {
    a: f64,
    b: f64,
    witness: Witness,
}

/// Feasible `theta` as a function of `c`.
#[derive(Clone, Debug)]
struct Constraints {
    lines: Vec<Line>,
    c_min: f64,
    never: Option<Witness>,
}

impl Constraints {
    fn new() -> Self {
        Constraints {
            lines: Vec::new(),
            c_min: 1.0,
            never: None,
        }
    }

    /// Largest feasible `theta` in `(0, 1]` at `c`, with its binding witness.
    fn theta_at(&self, c: f64) -> Option<(f64, Option<Witness>)> {
        if self.never.is_some() || c < self.c_min * (1.0 - NEAR_OPT) {
            return None;
        }
        let lc = c.ln();
        let mut theta = 1.0;
        let mut bind = None;
        for line in &self.lines {
            let t = (line.a + lc) / line.b;
            if t < theta {
                theta = t;
                bind = Some(line.witness);
            }
        }
        (theta > 0.0).then_some((theta, bind))
    }
}

/// Everything the fits need about one optimal set, from one pass over
/// `|S| <= k`.
struct Scan {
    s_star: Subset,
    opt: f64,
    k: usize,
    /// `mono[i][l - 1]`: least missing-marginal sum over `|S| = i`.
    mono: Vec<Vec<Option<(f64, Subset)>>>,
    /// Per size: gap bits -> (gap, least max-marginal, witness).
    sub: Vec<SubLevel>,
}

#[derive(Default)]
struct SubLevel {
    by_gap: HashMap<u64, (f64, f64, Subset)>,
    c_min: Option<(f64, Subset)>,
}

impl Scan {
    fn run(t: &Table, s_star: Subset, k: usize, delta: f64, with_sub: bool) -> Scan {
        let n = t.n();
        let opt = t.value(s_star.mask());
        let keep = 1.0 - delta;
        let mut mono = vec![vec![None; k]; k + 1];
        let mut sub: Vec<SubLevel> = (0..=k).map(|_| SubLevel::default()).collect();
        for m in masks_up_to(n, k) {
            let missing = s_star.mask() & !m;
            if missing == 0 {
                continue;
            }
            let size = m.count_ones() as usize;
            let base = t.value(m);
            let mut sum = 0.0;
            let mut best = f64::NEG_INFINITY;
            let mut rest = missing;
            while rest != 0 {
                let e = rest.trailing_zeros();
                rest &= rest - 1;
                let v = t.value(m | 1 << e);
                sum += v - keep * base;
                best = best.max(v - base);
            }
            let l = missing.count_ones() as usize;
            let slot = &mut mono[size][l - 1];
            if slot.is_none_or(|(w, _)| sum < w) {
                *slot = Some((sum, Subset::from_mask_unchecked(n, m)));
            }
            if !with_sub {
                continue;
            }
            let gap = opt - base;
            if gap <= EPS_VAL {
                continue;
            }
            let level = &mut sub[size];
            if gap >= opt * (1.0 - NEAR_OPT) {
                let need = opt / (k as f64 * best);
                if level.c_min.is_none_or(|(c, _)| need > c) {
                    level.c_min = Some((need, Subset::from_mask_unchecked(n, m)));
                }
                continue;
            }
            level
                .by_gap
                .entry(gap.to_bits())
                .and_modify(|entry| {
                    if best < entry.1 {
                        *entry = (gap, best, Subset::from_mask_unchecked(n, m));
                    }
                })
                .or_insert((gap, best, Subset::from_mask_unchecked(n, m)));
        }
        Scan {
            s_star,
            opt,
            k,
            mono,
            sub,
        }
    }

    fn mono_constraints(&self, sizes: std::ops::Range<usize>) -> Constraints {
        let mut cons = Constraints::new();
        let k = self.k as f64;
        for l in 1..=self.k {
            let least = sizes
                .clone()
                .filter_map(|i| self.mono[i][l - 1])
                .min_by(|a, b| a.0.total_cmp(&b.0));
            let Some((w, set)) = least else { continue };
            let witness = Witness { set, ell: Some(l) };
            if w >= self.opt * (1.0 - NEAR_OPT) {
                continue;
            }
            if w <= EPS_VAL {
                cons.never.get_or_insert(witness);
                continue;
            }
            cons.lines.push(Line {
                a: (k / l as f64).ln(),
                b: (self.opt / w).ln(),
                witness,
            });
        }
        cons
    }

    fn sub_constraints(&self, sizes: std::ops::Range<usize>) -> Constraints {
        let mut cons = Constraints::new();
        let k = self.k as f64;
        let mut merged: HashMap<u64, (f64, f64, Subset)> = HashMap::new();
        for i in sizes {
            let level = &self.sub[i];
            if let Some((c, _)) = level.c_min {
                cons.c_min = cons.c_min.max(c);
            }
            for (&key, &entry) in &level.by_gap {
                merged
                    .entry(key)
                    .and_modify(|cur| {
                        if entry.1 < cur.1 || (entry.1 == cur.1 && entry.2 < cur.2) {
                            *cur = entry;
                        }
                    })
                    .or_insert(entry);
            }
        }
        let mut entries: Vec<(f64, f64, Subset)> = merged.into_values().collect();
        entries.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (gap, w2, set) in entries {
            cons.lines.push(Line {
                a: (k * w2 / gap).ln(),
                b: (self.opt / gap).ln(),
                witness: Witness { set, ell: None },
            });
        }
        cons
    }
}

#[derive(Clone, Debug)]
struct Pick {
    params: SharpParams,
    bound: f64,
    certificate: Certificate,
}

/// Best static pair over the grid, falling back to the `theta -> 0` limit.
fn best_static<B: Fn(SharpParams) -> f64>(
    cons: &Constraints,
    points: &[f64],
    heuristic: bool,
    bound_of: B,
) -> Pick {
    let mut best: Option<Pick> = None;
    for &c in points {
        let Some((theta, bind)) = cons.theta_at(c) else {
            continue;
        };
        let params = SharpParams {
            c,
            theta,
            limit: false,
        };
        let bound = bound_of(params);
        let better = best.as_ref().is_none_or(|b| {
            bound > b.bound || (bound == b.bound && theta > b.params.theta)
        });
        if better {
            best = Some(Pick {
                params,
                bound,
                certificate: bind.map_or(Certificate::Clamped, Witness::certificate),
            });
        } else if heuristic {
            break;
        }
    }
    let limit = SharpParams::classical();
    let limit_bound = bound_of(limit);
    match best {
        Some(b) if b.bound >= limit_bound => b,
        _ => Pick {
            params: limit,
            bound: limit_bound,
            certificate: Certificate::Limit,
        },
    }
}

/// Per-size choice minimizing the unreached fraction at every step.
fn best_dynamic(levels: &[Constraints], points: &[f64], heuristic: bool, k: usize) -> (DynamicSharpParams, Vec<Certificate>) {
    let mut u = 1.0;
    let mut chosen = Vec::with_capacity(k);
    let mut certs = Vec::with_capacity(k);
    // Saturation ranks below every reachable u.
    let rank = |next: Option<f64>| next.unwrap_or(-1.0);
    for cons in levels {
        let limit = SharpParams::classical();
        let mut best: Option<(f64, SharpParams, Certificate)> = None;
        for &c in points {
            let Some((theta, bind)) = cons.theta_at(c) else {
                continue;
            };
            let p = SharpParams {
                c,
                theta,
                limit: false,
            };
            let r = rank(dynamic_step(u, p, k));
            let better = best
                .as_ref()
                .is_none_or(|(br, bp, _)| r < *br || (r == *br && theta > bp.theta));
            if better {
                best = Some((r, p, bind.map_or(Certificate::Clamped, Witness::certificate)));
            } else if heuristic {
                break;
            }
        }
        let lr = rank(dynamic_step(u, limit, k));
        let (r, p, cert) = match best {
            Some(b) if b.0 <= lr => b,
            _ => (lr, limit, Certificate::Limit),
        };
        u = r.max(0.0);
        chosen.push(p);
        certs.push(cert);
    }
    (DynamicSharpParams { levels: chosen }, certs)
}

fn candidates<'a>(optima: &'a OptimaSet, opts: &FitOptions) -> Result<&'a [Subset]> {
    opts.grid.validate()?;
    if optima.optima.is_empty() {
        return Err(usage("no optimal set to fit around"));
    }
    let all = &optima.optima;
    if all.len() > opts.max_optima {
        warn!(
            "{} optimal sets; fitting around the first {} only",
            all.len(),
            opts.max_optima
        );
        Ok(&all[..opts.max_optima])
    } else {
        Ok(all)
    }
}

/// Orders `(bound desc, c asc, theta desc, mask asc)`; `true` if `a` wins.
fn beats(a: &FitResult, b: &FitResult) -> bool {
    if a.bound != b.bound {
        return a.bound > b.bound;
    }
    let (pa, pb) = (lead(&a.params), lead(&b.params));
    if pa.c != pb.c {
        return pa.c < pb.c;
    }
    if pa.theta != pb.theta {
        return pa.theta > pb.theta;
    }
    a.s_star < b.s_star
}

fn lead(p: &FitParams) -> SharpParams {
    match p {
        FitParams::Static(p) => *p,
        FitParams::Approximate(a) => a.sharp,
        FitParams::Dynamic(d) => d.levels[0],
    }
}

fn pick_best(results: Vec<FitResult>) -> FitResult {
    results
        .into_iter()
        .reduce(|a, b| if beats(&b, &a) { b } else { a })
        .expect("at least one optimal set")
}

fn check_table(t: &Table, optima: &OptimaSet) -> Result<()> {
    let k = optima.k;
    if k == 0 || k > t.n() {
        return Err(usage(format!("budget k = {k} must satisfy 1 <= k <= n = {}", t.n())));
    }
    if let Some(s) = optima.optima.iter().find(|s| s.ground_size() != t.n()) {
        return Err(usage(format!("optimal set {s} does not match the table")));
    }
    Ok(())
}

fn static_result(notion: Notion, scan: &Scan, cons: &Constraints, opts: &FitOptions) -> FitResult {
    let pick = best_static(cons, &opts.grid.points(), opts.paper_heuristic, guarantee_static);
    FitResult {
        notion,
        params: FitParams::Static(pick.params),
        bound: pick.bound,
        s_star: scan.s_star,
        opt: scan.opt,
        certificate: pick.certificate,
    }
}

fn dynamic_result(notion: Notion, scan: &Scan, levels: &[Constraints], opts: &FitOptions) -> FitResult {
    let (params, certs) = best_dynamic(levels, &opts.grid.points(), opts.paper_heuristic, scan.k);
    FitResult {
        notion,
        bound: guarantee_dynamic(&params, scan.k),
        params: FitParams::Dynamic(params),
        s_star: scan.s_star,
        opt: scan.opt,
        certificate: Certificate::Levels { levels: certs },
    }
}

/// Replaces a dynamic fit by the static constant vector when that is better.
fn seed(dynamic: FitResult, stat: &FitResult, k: usize) -> FitResult {
    let FitParams::Static(p) = stat.params else {
        return dynamic;
    };
    let constant = DynamicSharpParams::constant(p, k);
    let bound = guarantee_dynamic(&constant, k);
    if bound > dynamic.bound {
        FitResult {
            notion: dynamic.notion,
            params: FitParams::Dynamic(constant),
            bound,
            s_star: stat.s_star,
            opt: stat.opt,
            certificate: Certificate::Seeded {
                from: Box::new(stat.certificate.clone()),
            },
        }
    } else {
        dynamic
    }
}

fn scans(t: &Table, optima: &OptimaSet, opts: &FitOptions, delta: f64, with_sub: bool) -> Result<Vec<Scan>> {
    check_table(t, optima)?;
    let sets = candidates(optima, opts)?;
    Ok(sets
        .par_iter()
        .map(|&s| Scan::run(t, s, optima.k, delta, with_sub))
        .collect())
}

/// Fits every requested notion, sharing one pass over the admissible sets
/// per optimal set. Results follow the order of `notions`.
pub fn fit_notions(
    t: &Table,
    optima: &OptimaSet,
    notions: &[Notion],
    delta: f64,
    opts: &FitOptions,
) -> Result<Vec<FitResult>> {
    let k = optima.k;
    if notions.contains(&Notion::Approximate) {
        check_delta(delta, k)?;
    }
    let needs_sub = notions
        .iter()
        .any(|n| matches!(n, Notion::Submodular | Notion::DynamicSubmodular));
    let base = scans(t, optima, opts, 0.0, needs_sub)?;
    let points = opts.grid.points();

    let static_sizes = match opts.admissible {
        Admissible::ExactlyK => k..k + 1,
        Admissible::UpToK => 0..k + 1,
    };
    let mono_static =
        |scan: &Scan| static_result(Notion::Monotonic, scan, &scan.mono_constraints(static_sizes.clone()), opts);
    let sub_static = |scan: &Scan| static_result(Notion::Submodular, scan, &scan.sub_constraints(0..k + 1), opts);

    let mut cache: HashMap<Notion, FitResult> = HashMap::new();
    let mut out = Vec::with_capacity(notions.len());
    for &notion in notions {
        if let Some(hit) = cache.get(&notion) {
            out.push(hit.clone());
            continue;
        }
        let result = match notion {
            Notion::Monotonic => pick_best(base.par_iter().map(mono_static).collect()),
            Notion::Submodular => pick_best(base.par_iter().map(sub_static).collect()),
            Notion::DynamicMonotonic => {
                let stat = match cache.get(&Notion::Monotonic) {
                    Some(s) => s.clone(),
                    None => pick_best(base.par_iter().map(mono_static).collect()),
                };
                let dynamic = pick_best(
                    base.par_iter()
                        .map(|scan| {
                            let levels: Vec<_> = (0..k).map(|i| scan.mono_constraints(i..i + 1)).collect();
                            dynamic_result(notion, scan, &levels, opts)
                        })
                        .collect(),
                );
                cache.insert(Notion::Monotonic, stat.clone());
                seed(dynamic, &stat, k)
            }
            Notion::DynamicSubmodular => {
                let stat = match cache.get(&Notion::Submodular) {
                    Some(s) => s.clone(),
                    None => pick_best(base.par_iter().map(sub_static).collect()),
                };
                let dynamic = pick_best(
                    base.par_iter()
                        .map(|scan| {
                            let levels: Vec<_> = (0..k).map(|i| scan.sub_constraints(i..i + 1)).collect();
                            dynamic_result(notion, scan, &levels, opts)
                        })
                        .collect(),
                );
                cache.insert(Notion::Submodular, stat.clone());
                seed(dynamic, &stat, k)
            }
            Notion::Approximate => {
                let owned;
                let approx_scans = if delta == 0.0 {
                    &base
                } else {
                    owned = scans(t, optima, opts, delta, false)?;
                    &owned
                };
                let bound_of = |p: SharpParams| guarantee_approximate(ApproxSharpParams { delta, sharp: p }, k);
                pick_best(
                    approx_scans
                        .par_iter()
                        .map(|scan| {
                            let pick = best_static(&scan.mono_constraints(static_sizes.clone()), &points, opts.paper_heuristic, bound_of);
                            FitResult {
                                notion,
                                params: FitParams::Approximate(ApproxSharpParams { delta, sharp: pick.params }),
                                bound: pick.bound,
                                s_star: scan.s_star,
                                opt: scan.opt,
                                certificate: pick.certificate,
                            }
                        })
                        .collect(),
                )
            }
        };
        cache.insert(notion, result.clone());
        out.push(result);
    }
    Ok(out)
}

fn fit_one(t: &Table, optima: &OptimaSet, notion: Notion, delta: f64, opts: &FitOptions) -> Result<FitResult> {
    Ok(fit_notions(t, optima, &[notion], delta, opts)?.remove(0))
}

/// Static monotonic sharpness.
pub fn fit_monotonic(t: &Table, optima: &OptimaSet, opts: &FitOptions) -> Result<FitResult> {
    fit_one(t, optima, Notion::Monotonic, 0.0, opts)
}

/// Static submodular sharpness.
pub fn fit_submodular(t: &Table, optima: &OptimaSet, opts: &FitOptions) -> Result<FitResult> {
    fit_one(t, optima, Notion::Submodular, 0.0, opts)
}

/// Per-size monotonic sharpness.
pub fn fit_dynamic_monotonic(t: &Table, optima: &OptimaSet, opts: &FitOptions) -> Result<FitResult> {
    fit_one(t, optima, Notion::DynamicMonotonic, 0.0, opts)
}

/// Per-size submodular sharpness.
pub fn fit_dynamic_submodular(t: &Table, optima: &OptimaSet, opts: &FitOptions) -> Result<FitResult> {
    fit_one(t, optima, Notion::DynamicSubmodular, 0.0, opts)
}

/// Approximate sharpness at a fixed `delta`.
pub fn fit_approximate(t: &Table, optima: &OptimaSet, delta: f64, opts: &FitOptions) -> Result<FitResult> {
    check_delta(delta, optima.k)?;
    fit_one(t, optima, Notion::Approximate, delta, opts)
}
