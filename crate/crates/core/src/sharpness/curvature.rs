//! Total curvature and the optimum-multiplicity stability proxy.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::optimize::OptimaSet;
use crate::setfun::{SetFunction, Subset};

/// `gamma = 1 - min_{e : f(e) > 0} f_{V-e}(e) / f(e)`, clamped to `[0, 1]`.
pub fn curvature<F: SetFunction + ?Sized>(f: &F) -> Result<f64> {
    let n = f.ground_size();
    let full = Subset::full(n);
    let top = f.eval(full);
    let mut least: Option<f64> = None;
    for e in 0..n {
        let single = f.eval(Subset::empty(n).with(e));
        if single > 0.0 {
            let ratio = (top - f.eval(full.without(e))) / single;
            least = Some(least.map_or(ratio, |r| r.min(ratio)));
        }
    }
    let least = least.ok_or_else(|| usage("curvature undefined: no element has positive value"))?;
    Ok((1.0 - least).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplicity {
    pub count: usize,
    pub unique: bool,
}

/// Number of optima and whether the optimum is unique.
pub fn optima_multiplicity(opt: &OptimaSet) -> Multiplicity {
    Multiplicity {
        count: opt.count(),
        unique: opt.count() == 1,
    }
}
