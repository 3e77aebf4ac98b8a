//! Sharpness notions: guarantees, profiles, membership and fitting.

mod construct;
mod curvature;
mod fit;
mod membership;
mod params;
mod profile;

pub use construct::construct_sharp_linear;
pub use curvature::{curvature, optima_multiplicity, Multiplicity};
pub use fit::{
    fit_approximate, fit_dynamic_monotonic, fit_dynamic_submodular, fit_monotonic, fit_notions,
    fit_submodular, Certificate, FitOptions, FitParams, FitResult, Grid, Notion, DEFAULT_MAX_OPTIMA,
};
pub use membership::{
    holds_approximate, holds_approximate_over, holds_dynamic_monotonic, holds_dynamic_submodular, holds_monotonic,
    holds_monotonic_over, holds_submodular, Membership,
};
pub use params::{
    curvature_bound, guarantee_approximate, guarantee_dynamic, guarantee_static, trajectory_floor,
    ApproxSharpParams, DynamicSharpParams, SharpParams,
};
pub use profile::{
    concave_modular_w_profile, coverage_region_min_c, w_profile_over, Admissible, linear_w_profile, region_min_c, w_profile,
    w_profile_delta, WProfile,
};
