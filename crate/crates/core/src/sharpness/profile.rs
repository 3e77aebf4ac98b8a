//! `W(l)` profiles: the least marginal mass an admissible set can leave on
//! the `l` optimal elements it misses.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::families::WeightVector;
use crate::optimize::check_enum_size;
use crate::setfun::{check_delta, masks_up_to, SetFunction, Subset};

/// Which sets the monotonic and approximate inequalities range over.
///
/// For submodular `f` with `n >= k + |S*|` both choices give the same
/// region; below that the exact-size family is strictly smaller.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissible {
    #[default]
    ExactlyK,
    UpToK,
}

impl Admissible {
    #[inline]
    pub fn admits(self, size: usize, k: usize) -> bool {
        match self {
            Admissible::ExactlyK => size == k,
            Admissible::UpToK => size <= k,
        }
    }
}

/// Minimal missing-marginal mass per `l = |S* \ S|`.
///
/// `w[l - 1]` is `W(l)`; `None` means no admissible set misses exactly `l`
/// optimal elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WProfile {
    pub s_star: Subset,
    pub opt: f64,
    pub k: usize,
    pub w: Vec<Option<f64>>,
    /// `per_size[i][l - 1]` is `W_i(l)`, minimized over `|S| = i`, for
    /// `i = 0..k-1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_size: Option<Vec<Vec<Option<f64>>>>,
}

impl WProfile {
    /// `W(l)` for `l >= 1`.
    pub fn get(&self, l: usize) -> Option<f64> {
        l.checked_sub(1).and_then(|i| self.w.get(i).copied().flatten())
    }

    /// Least `c` with `(l/(kc))^(1/theta) OPT <= W(l)`; `None` when `W(l)`
    /// is absent or not below OPT.
    pub fn region_min_c(&self, l: usize, theta: f64) -> Option<f64> {
        let w = self.get(l)?;
        if w >= self.opt {
            return None;
        }
        Some(region_min_c(l, self.k, w / self.opt, theta))
    }
}

/// `(l/k) * ratio^(-theta)`.
pub fn region_min_c(l: usize, k: usize, ratio: f64, theta: f64) -> f64 {
    l as f64 / k as f64 * ratio.powf(-theta)
}

/// Exhaustive `W` profile of `f` around `s_star` over sets of size `k`.
pub fn w_profile<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    per_size: bool,
) -> Result<WProfile> {
    delta_profile(f, s_star, k, 0.0, per_size, Admissible::ExactlyK)
}

/// [`w_profile`] over a chosen admissible family.
pub fn w_profile_over<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    per_size: bool,
    admissible: Admissible,
) -> Result<WProfile> {
    delta_profile(f, s_star, k, 0.0, per_size, admissible)
}

/// Profile of the delta-marginals `f(S + e) - (1 - delta) f(S)`.
///
/// `delta = 0` gives exactly [`w_profile`].
pub fn w_profile_delta<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    delta: f64,
) -> Result<WProfile> {
    check_delta(delta, k)?;
    delta_profile(f, s_star, k, delta, false, Admissible::ExactlyK)
}

fn delta_profile<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    delta: f64,
    per_size: bool,
    admissible: Admissible,
) -> Result<WProfile> {
    let n = f.ground_size();
    check_enum_size(n)?;
    check_profile_args(n, s_star, k)?;
    let opt = f.eval(s_star);
    let mut w = vec![None; k];
    let mut levels = vec![vec![None; k]; k];
    let keep = 1.0 - delta;
    for m in masks_up_to(n, k) {
        let missing = s_star.mask() & !m;
        if missing == 0 {
            continue;
        }
        let set = Subset::from_mask_unchecked(n, m);
        let base = f.eval(set);
        let sum: f64 = Subset::from_mask_unchecked(n, missing)
            .iter()
            .map(|e| f.eval(set.with(e)) - keep * base)
            .sum();
        let l = missing.count_ones() as usize;
        if admissible.admits(set.len(), k) {
            lower(&mut w[l - 1], sum);
        }
        if per_size && set.len() < k {
            lower(&mut levels[set.len()][l - 1], sum);
        }
    }
    Ok(WProfile {
        s_star,
        opt,
        k,
        w,
        per_size: per_size.then_some(levels),
    })
}

fn lower(slot: &mut Option<f64>, x: f64) {
    *slot = Some(slot.map_or(x, |y: f64| y.min(x)));
}

pub(crate) fn check_profile_args(n: usize, s_star: Subset, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(usage(format!("budget k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    if s_star.ground_size() != n {
        return Err(usage(format!(
            "optimal set lives on {} elements, function on {n}",
            s_star.ground_size()
        )));
    }
    if s_star.len() > k || s_star.is_empty() {
        return Err(usage(format!("optimal set {s_star} must have 1..={k} elements")));
    }
    Ok(())
}

fn sorted_prefix(w: &WeightVector, k: usize) -> Result<&[f64]> {
    if !w.is_sorted_desc() {
        return Err(usage("weights must be sorted in decreasing order"));
    }
    if k == 0 || k > w.len() {
        return Err(usage(format!("budget k = {k} must satisfy 1 <= k <= n = {}", w.len())));
    }
    Ok(w.as_slice())
}

/// Closed form for modular functions: `W(l) = w_{k-l+1} + ... + w_k`.
pub fn linear_w_profile(w: &WeightVector, k: usize) -> Result<WProfile> {
    let ws = sorted_prefix(w, k)?;
    let profile = (1..=k).map(|l| Some(ws[k - l..k].iter().sum())).collect();
    Ok(WProfile {
        s_star: Subset::from_mask_unchecked(ws.len(), crate::setfun::full_mask(k)),
        opt: ws[..k].iter().sum(),
        k,
        w: profile,
        per_size: None,
    })
}

/// Closed form for `(sum w)^alpha`.
///
/// The minimizing set keeps the `k - l` heaviest optimal elements and adds
/// the `l` heaviest outsiders; missing outsiders count as zero weight.
pub fn concave_modular_w_profile(w: &WeightVector, alpha: f64, k: usize) -> Result<WProfile> {
    crate::families::modular_check_alpha(alpha)?;
    let ws = sorted_prefix(w, k)?;
    let weight = |j: usize| ws.get(j).copied().unwrap_or(0.0);
    let profile = (1..=k)
        .map(|l| {
            let outside: f64 = (k..k + l).map(weight).sum();
            let kept: f64 = ws[..k - l].iter().sum();
            let x = outside + kept;
            let base = x.powf(alpha);
            Some(ws[k - l..k].iter().map(|&wi| (x + wi).powf(alpha) - base).sum())
        })
        .collect();
    Ok(WProfile {
        s_star: Subset::from_mask_unchecked(ws.len(), crate::setfun::full_mask(k)),
        opt: ws[..k].iter().sum::<f64>().powf(alpha),
        k,
        w: profile,
        per_size: None,
    })
}

/// Least `c` in the `l`-th region constraint of the coverage family.
///
/// `theta = 0` evaluates the `theta -> 0` limit `l/k`.
pub fn coverage_region_min_c(k: usize, l: usize, theta: f64) -> Result<f64> {
    if k < 2 || l == 0 || l >= k {
        return Err(usage(format!("need 1 <= l <= k - 1, got l = {l}, k = {k}")));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(usage(format!("theta must lie in [0, 1], got {theta}")));
    }
    let frac = l as f64 / k as f64;
    let ratio = frac * ((k - 1) as f64 / k as f64).powi(l as i32);
    Ok(region_min_c(l, k, ratio, theta))
}
