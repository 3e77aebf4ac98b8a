//! Monotone submodular families used by the analysis and the experiments.

mod coverage;
mod exemplar;
mod kernel;
mod modular;
mod ratings;
mod validate;

pub use coverage::NwfCoverage;
pub use exemplar::{Exemplar, FeatureSet};
pub use kernel::{se_kernel, InformationGain, KernelMatrix};
pub use modular::{ConcaveModular, Modular, Truncation, WeightVector};
pub use ratings::{ConcaveRatings, FacilityLocation, RatingsMatrix};
pub(crate) use modular::check_alpha as modular_check_alpha;
pub use validate::{validate_monotone_submodular, ValidationReport, Violation};
