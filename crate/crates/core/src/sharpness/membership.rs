//! Exhaustive membership checks for the sharpness inequalities.

use serde::{Deserialize, Serialize};

use super::params::{DynamicSharpParams, SharpParams};
use super::profile::{check_profile_args, Admissible};
use crate::error::{usage, Result};
use crate::optimize::check_enum_size;
use crate::setfun::{check_delta, masks_up_to, SetFunction, Subset, EPS_VAL};

/// Outcome of a membership check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Membership {
    Holds,
    Violated { set: Subset, lhs: f64, rhs: f64 },
}

impl Membership {
    pub fn holds(&self) -> bool {
        matches!(self, Membership::Holds)
    }

    pub fn violator(&self) -> Option<Subset> {
        match self {
            Membership::Holds => None,
            Membership::Violated { set, .. } => Some(*set),
        }
    }
}

#[derive(Clone, Copy)]
enum Form {
    Sum { delta: f64, admissible: Option<Admissible> },
    Max,
}

/// `(l/(kc))^(1/theta) * opt`; zero at the limit point.
fn sum_rhs(p: SharpParams, l: usize, k: usize, opt: f64) -> f64 {
    if p.limit {
        0.0
    } else {
        (l as f64 / (k as f64 * p.c)).powf(1.0 / p.theta) * opt
    }
}

/// `gap^(1 - theta) opt^theta / (kc)`.
fn max_rhs(p: SharpParams, gap: f64, k: usize, opt: f64) -> f64 {
    let scale = 1.0 / (k as f64 * p.c);
    if p.limit {
        scale * gap
    } else {
        scale * gap.powf(1.0 - p.theta) * opt.powf(p.theta)
    }
}

fn check<F, P>(f: &F, s_star: Subset, k: usize, form: Form, params_at: P) -> Result<Membership>
where
    F: SetFunction + ?Sized,
    P: Fn(usize) -> Option<SharpParams>,
{
    let n = f.ground_size();
    check_enum_size(n)?;
    check_profile_args(n, s_star, k)?;
    let opt = f.eval(s_star);
    for m in masks_up_to(n, k) {
        let missing = s_star.mask() & !m;
        if missing == 0 {
            continue;
        }
        let set = Subset::from_mask_unchecked(n, m);
        if let Form::Sum { admissible: Some(a), .. } = form {
            if !a.admits(set.len(), k) {
                continue;
            }
        }
        let Some(p) = params_at(set.len()) else {
            continue;
        };
        let base = f.eval(set);
        let gains = Subset::from_mask_unchecked(n, missing).iter().map(|e| f.eval(set.with(e)));
        let (lhs, rhs) = match form {
            Form::Sum { delta, .. } => {
                let keep = 1.0 - delta;
                let lhs: f64 = gains.map(|v| v - keep * base).sum();
                (lhs, sum_rhs(p, missing.count_ones() as usize, k, opt))
            }
            Form::Max => {
                let gap = opt - base;
                if gap <= EPS_VAL {
                    continue;
                }
                let lhs = gains.map(|v| v - base).fold(f64::NEG_INFINITY, f64::max);
                (lhs, max_rhs(p, gap, k, opt))
            }
        };
        if lhs < rhs - EPS_VAL {
            return Ok(Membership::Violated { set, lhs, rhs });
        }
    }
    Ok(Membership::Holds)
}

/// `sum_{e in S* \ S} f_S(e) >= (|S* \ S|/(kc))^(1/theta) OPT` for all
/// `|S| = k`.
pub fn holds_monotonic<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    p: SharpParams,
) -> Result<Membership> {
    holds_monotonic_over(f, s_star, k, p, Admissible::ExactlyK)
}

/// [`holds_monotonic`] over a chosen admissible family.
pub fn holds_monotonic_over<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    p: SharpParams,
    admissible: Admissible,
) -> Result<Membership> {
    let form = Form::Sum {
        delta: 0.0,
        admissible: Some(admissible),
    };
    check(f, s_star, k, form, |_| Some(p))
}

/// `max_{e in S* \ S} f_S(e) >= (OPT - f(S))^(1-theta) OPT^theta / (kc)`
/// for all `|S| <= k`.
///
/// Sets within `EPS_VAL` of OPT are exempt.
pub fn holds_submodular<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    p: SharpParams,
) -> Result<Membership> {
    check(f, s_star, k, Form::Max, |_| Some(p))
}

/// The monotonic inequality on delta-marginals `f(S + e) - (1 - delta) f(S)`.
pub fn holds_approximate<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    delta: f64,
    p: SharpParams,
) -> Result<Membership> {
    holds_approximate_over(f, s_star, k, delta, p, Admissible::ExactlyK)
}

/// [`holds_approximate`] over a chosen admissible family.
pub fn holds_approximate_over<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    delta: f64,
    p: SharpParams,
    admissible: Admissible,
) -> Result<Membership> {
    check_delta(delta, k)?;
    let form = Form::Sum {
        delta,
        admissible: Some(admissible),
    };
    check(f, s_star, k, form, |_| Some(p))
}

fn level_params(p: &DynamicSharpParams, k: usize) -> Result<impl Fn(usize) -> Option<SharpParams> + '_> {
    if p.k() != k {
        return Err(usage(format!("expected {k} levels, got {}", p.k())));
    }
    Ok(move |i: usize| p.levels.get(i).copied())
}

/// Monotonic inequality with level `|S|` parameters, `|S| < k`.
pub fn holds_dynamic_monotonic<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    p: &DynamicSharpParams,
) -> Result<Membership> {
    let form = Form::Sum {
        delta: 0.0,
        admissible: None,
    };
    check(f, s_star, k, form, level_params(p, k)?)
}

/// Submodular inequality with level `|S|` parameters, `|S| < k`.
pub fn holds_dynamic_submodular<F: SetFunction + ?Sized>(
    f: &F,
    s_star: Subset,
    k: usize,
    p: &DynamicSharpParams,
) -> Result<Membership> {
    check(f, s_star, k, Form::Max, level_params(p, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{NwfCoverage, Truncation};

    fn p(c: f64, t: f64) -> SharpParams {
        SharpParams::new(c, t).unwrap()
    }

    #[test]
    fn truncation_is_one_one_sharp() {
        let f = Truncation::new(2, 4).unwrap();
        let s = Subset::from_elements(4, [0, 1]).unwrap();
        assert!(holds_monotonic(&f, s, 2, p(1.0, 1.0)).unwrap().holds());
        assert!(holds_submodular(&f, s, 2, p(1.0, 1.0)).unwrap().holds());
    }

    #[test]
    fn coverage_boundary() {
        let f = NwfCoverage::new(3).unwrap();
        let s = Subset::from_elements(5, [f.b(1), f.b(2), f.b(3)]).unwrap();
        assert!(holds_monotonic(&f, s, 3, SharpParams::classical()).unwrap().holds());
        let m = holds_monotonic(&f, s, 3, p(1.0, 1.0 / 3.0)).unwrap();
        assert!(m.holds(), "{m:?}");
        // {A1} misses every B and falls short once small sets count
        let wide = holds_monotonic_over(&f, s, 3, p(1.0, 1.0 / 3.0), Admissible::UpToK).unwrap();
        assert_eq!(wide.violator(), Some(Subset::from_elements(5, [f.a(1)]).unwrap()));
        let bad = holds_monotonic(&f, s, 3, p(1.0, 0.5)).unwrap();
        let v = bad.violator().unwrap();
        assert!(v.len() <= 3);
        assert!(!bad.holds());
    }

    #[test]
    fn dynamic_levels() {
        let f = NwfCoverage::new(3).unwrap();
        let s = Subset::from_elements(5, [f.b(1), f.b(2), f.b(3)]).unwrap();
        let d = DynamicSharpParams::constant(p(1.0, 1.0 / 3.0), 3);
        assert!(!holds_dynamic_monotonic(&f, s, 3, &d).unwrap().holds());
        let d = DynamicSharpParams::constant(p(1.5, 1.0 / 3.0), 3);
        assert!(holds_dynamic_monotonic(&f, s, 3, &d).unwrap().holds());
        assert!(holds_dynamic_submodular(&f, s, 3, &d).unwrap().holds());
        let short = DynamicSharpParams::constant(p(1.0, 1.0), 2);
        assert!(holds_dynamic_monotonic(&f, s, 3, &short).is_err());
        let first = DynamicSharpParams::from_vectors(&[1.0, 1.5, 1.5], &[1.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(holds_dynamic_monotonic(&f, s, 3, &first).unwrap().holds());
    }

    #[test]
    fn approximate_at_zero_matches_monotonic() {
        let f = NwfCoverage::new(3).unwrap();
        let s = Subset::from_elements(5, [f.b(1), f.b(2), f.b(3)]).unwrap();
        for q in [p(1.0, 1.0), p(1.0, 1.0 / 3.0), p(1.4, 0.6)] {
            assert_eq!(
                holds_approximate(&f, s, 3, 0.0, q).unwrap(),
                holds_monotonic(&f, s, 3, q).unwrap()
            );
        }
        assert!(holds_approximate(&f, s, 3, 0.9, p(1.0, 1.0)).is_err());
    }

    #[test]
    fn truncation_delta() {
        let f = Truncation::new(2, 4).unwrap();
        let s = Subset::from_elements(4, [0, 1]).unwrap();
        // delta-marginals only grow, so (1,1) survives
        assert!(holds_approximate(&f, s, 2, 0.25, p(1.0, 1.0)).unwrap().holds());
    }
}
