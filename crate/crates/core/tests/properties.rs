use proptest::prelude::*;
use subsharp::families::{ConcaveModular, FacilityLocation, Modular, NwfCoverage, RatingsMatrix, WeightVector};
use subsharp::optimize::{greedy, lazy_greedy, optima_from_table, worst_tie_greedy, DEFAULT_NODE_BUDGET};
use subsharp::sharpness::{
    fit_notions, guarantee_approximate, guarantee_dynamic, guarantee_static, holds_approximate, holds_monotonic,
    holds_submodular, w_profile_over, Admissible, ApproxSharpParams, DynamicSharpParams, FitOptions, Notion,
    SharpParams,
};
use subsharp::{SetFunction, Subset, Table};

fn facility(rows: Vec<Vec<u8>>) -> FacilityLocation {
    let r = rows
        .into_iter()
        .map(|row| row.into_iter().map(f64::from).collect())
        .collect();
    FacilityLocation::new(RatingsMatrix::new(r).unwrap()).unwrap()
}

/// A `k` and a ratings matrix over `n >= 2k` items.
fn facility_instance() -> impl Strategy<Value = (usize, Vec<Vec<u8>>)> {
    (1usize..=4).prop_flat_map(|k| {
        (2 * k..=(2 * k + 2).min(10)).prop_flat_map(move |n| {
            let rows = prop::collection::vec(prop::collection::vec(0u8..=5, n), 3..8);
            (Just(k), rows)
        })
    })
}

fn fast_opts() -> FitOptions {
    FitOptions {
        grid: subsharp::sharpness::Grid::new(3.0, 0.05).unwrap(),
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn static_guarantee_in_unit_interval(c in 1.0f64..10.0, theta in 1e-6f64..=1.0) {
        let g = guarantee_static(SharpParams::new(c, theta).unwrap());
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!(g >= 1.0 - (-1.0 / c).exp() - 1e-12);
    }

    #[test]
    fn static_guarantee_monotone(c in 1.0f64..5.0, dc in 0.0f64..1.0, theta in 0.01f64..0.9, dt in 0.0f64..0.1) {
        let g = |c, t| guarantee_static(SharpParams::new(c, t).unwrap());
        prop_assert!(g(c + dc, theta) <= g(c, theta) + 1e-12);
        prop_assert!(g(c, theta + dt) >= g(c, theta) - 1e-12);
    }

    #[test]
    fn constant_dynamic_is_static(c in 1.0f64..4.0, theta in 0.0f64..=1.0, k in 1usize..12) {
        let p = if theta == 0.0 { SharpParams::limit(c).unwrap() } else { SharpParams::new(c, theta).unwrap() };
        let d = guarantee_dynamic(&DynamicSharpParams::constant(p, k), k);
        prop_assert!((d - guarantee_static(p)).abs() < 1e-12);
    }

    #[test]
    fn approximate_at_zero_delta_is_static(c in 1.0f64..4.0, theta in 0.01f64..=1.0, k in 1usize..10) {
        let p = SharpParams::new(c, theta).unwrap();
        let a = guarantee_approximate(ApproxSharpParams::new(0.0, p, k).unwrap(), k);
        prop_assert_eq!(a, guarantee_static(p));
    }

    #[test]
    fn lazy_greedy_matches_greedy((k, rows) in facility_instance()) {
        let f = facility(rows);
        let a = greedy(&f, k).unwrap();
        let b = lazy_greedy(&f, k).unwrap();
        prop_assert_eq!(a.picks, b.picks);
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn exact_size_equals_up_to_k((k, rows) in facility_instance()) {
        let f = facility(rows);
        let t = Table::build(&f).unwrap();
        let optima = optima_from_table(&t, k).unwrap();
        for s_star in optima.of_full_size() {
            let exact = w_profile_over(&t, s_star, k, false, Admissible::ExactlyK).unwrap();
            let up_to = w_profile_over(&t, s_star, k, false, Admissible::UpToK).unwrap();
            for l in 1..=k {
                match (exact.get(l), up_to.get(l)) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9, "l = {}: {} vs {}", l, a, b),
                    (a, b) => prop_assert_eq!(a.is_some(), b.is_some()),
                }
            }
        }
    }

    #[test]
    fn concave_modular_sizes_agree(w in prop::collection::vec(0.05f64..1.0, 4..=8), alpha in 0.1f64..1.0) {
        let k = w.len() / 2;
        let f = ConcaveModular::new(WeightVector::new(w).unwrap(), alpha).unwrap();
        let t = Table::build(&f).unwrap();
        let s_star = optima_from_table(&t, k).unwrap().of_full_size()[0];
        let exact = w_profile_over(&t, s_star, k, false, Admissible::ExactlyK).unwrap();
        let up_to = w_profile_over(&t, s_star, k, false, Admissible::UpToK).unwrap();
        for l in 1..=k {
            prop_assert!((exact.get(l).unwrap() - up_to.get(l).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn fitted_bounds_are_sound_and_ordered((k, rows) in facility_instance()) {
        let f = facility(rows);
        let t = Table::build(&f).unwrap();
        let optima = optima_from_table(&t, k).unwrap();
        prop_assume!(optima.opt_value > 0.0);
        let fits = fit_notions(&t, &optima, &Notion::ALL, 0.0, &fast_opts()).unwrap();
        let bound = |n: Notion| fits.iter().find(|r| r.notion == n).unwrap().bound;
        let worst = worst_tie_greedy(&t, k, DEFAULT_NODE_BUDGET).unwrap().value / optima.opt_value;
        let run = greedy(&t, k).unwrap().final_value() / optima.opt_value;
        prop_assert!(worst <= run + 1e-12);
        for r in &fits {
            prop_assert!((0.0..=1.0).contains(&r.bound));
            prop_assert!(worst >= r.bound - 1e-7, "{} bound {} above worst-tie ratio {}", r.notion, r.bound, worst);
        }
        prop_assert!(bound(Notion::Submodular) >= bound(Notion::Monotonic) - 1e-12);
        prop_assert!(bound(Notion::DynamicMonotonic) >= bound(Notion::Monotonic) - 1e-12);
        prop_assert!(bound(Notion::DynamicSubmodular) >= bound(Notion::Submodular) - 1e-12);
        prop_assert_eq!(bound(Notion::Approximate), bound(Notion::Monotonic));
    }

    #[test]
    fn fitted_params_are_members((k, rows) in facility_instance()) {
        let f = facility(rows);
        let t = Table::build(&f).unwrap();
        let optima = optima_from_table(&t, k).unwrap();
        prop_assume!(optima.opt_value > 0.0);
        let fits = fit_notions(&t, &optima, &[Notion::Monotonic, Notion::Submodular], 0.0, &fast_opts()).unwrap();
        let mono = &fits[0];
        let p = mono.static_params().unwrap();
        if !p.limit {
            prop_assert!(holds_monotonic(&t, mono.s_star, k, p).unwrap().holds());
        }
        let sub = &fits[1];
        let q = sub.static_params().unwrap();
        if !q.limit {
            prop_assert!(holds_submodular(&t, sub.s_star, k, q).unwrap().holds());
        }
    }

    #[test]
    fn modular_greedy_is_optimal(w in prop::collection::vec(0.01f64..1.0, 2..=10), k in 1usize..=5) {
        prop_assume!(k <= w.len());
        let f = Modular::new(WeightVector::new(w).unwrap());
        let t = Table::build(&f).unwrap();
        let opt = optima_from_table(&t, k).unwrap().opt_value;
        prop_assert!((greedy(&f, k).unwrap().final_value() - opt).abs() < 1e-12);
    }
}

/// For `delta > 0` the approximate guarantee can exceed what greedy
/// achieves: on the coverage instance with `k = 2` a feasible pair
/// certifies more than the worst greedy run.
#[test]
fn approximate_guarantee_overshoots_on_coverage() {
    let cov = NwfCoverage::new(2).unwrap();
    let t = Table::build(&cov).unwrap();
    let optima = optima_from_table(&t, 2).unwrap();
    let s_star = optima.optima[0];
    let p = SharpParams::new(1.01, 0.01).unwrap();
    assert!(holds_approximate(&cov, s_star, 2, 0.2, p).unwrap().holds());
    let certified = guarantee_approximate(ApproxSharpParams::new(0.2, p, 2).unwrap(), 2);
    let worst = worst_tie_greedy(&t, 2, DEFAULT_NODE_BUDGET).unwrap().value / optima.opt_value;
    assert_eq!(worst, 0.75);
    assert!(certified > 0.82, "{certified}");
    assert!(certified > worst);
}

#[test]
fn coverage_closed_form_matches_enumeration() {
    for k in 2..=4 {
        let cov = NwfCoverage::new(k).unwrap();
        let n = 2 * k - 1;
        for m in 0..1u64 << n {
            let s = Subset::from_mask(n, m).unwrap();
            assert_eq!(cov.eval(s), cov.covered_by_enumeration(s) as f64);
        }
    }
}
