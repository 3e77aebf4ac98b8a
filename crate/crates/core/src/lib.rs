//! Monotone submodular maximization under a cardinality constraint, with
//! exhaustive sharpness fitting for small instances.
//!
//! ```
//! use subsharp::families::{Modular, WeightVector};
//! use subsharp::optimize::{brute_force_optima, greedy};
//!
//! let f = Modular::new(WeightVector::new(vec![3.0, 2.0, 1.0]).unwrap());
//! let run = greedy(&f, 2).unwrap();
//! assert_eq!(run.picks, vec![0, 1]);
//! assert_eq!(brute_force_optima(&f, 2).unwrap().opt_value, 5.0);
//! ```

pub mod error;
pub mod families;
pub mod harness;
pub mod optimize;
pub mod setfun;
pub mod sharpness;

pub use error::{Error, Result};
pub use setfun::{GroundSet, SetFunction, Subset, Table, ValueOracle, EPS_VAL, MAX_ENUM, MAX_GROUND};
