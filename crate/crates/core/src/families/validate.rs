use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setfun::{SetFunction, Subset, Table, EPS_VAL};

/// Largest ground set the exhaustive validator accepts.
pub const MAX_VALIDATE: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotNormalized { value: f64 },
    Negative { set: Subset, value: f64 },
    NotMonotone { a: Subset, b: Subset, fa: f64, fb: f64 },
    /// `f_A(e) < f_B(e)` for `A ⊆ B ⊆ V - e`.
    NotSubmodular { a: Subset, b: Subset, e: usize, gain_a: f64, gain_b: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub passed: bool,
    pub violation: Option<Violation>,
}

/// Exhaustive check of normalization, non-negativity, monotonicity and
/// diminishing returns over every pair `A ⊆ B`, to within [`EPS_VAL`].
pub fn validate_monotone_submodular<F: SetFunction + ?Sized>(f: &F) -> Result<ValidationReport> {
    let n = f.ground_size();
    if n > MAX_VALIDATE {
        return Err(Error::Resource(format!(
            "exhaustive validation needs n <= {MAX_VALIDATE}, got {n}"
        )));
    }
    let t = Table::build(f)?;
    let violation = find_violation(&t);
    Ok(ValidationReport {
        n,
        passed: violation.is_none(),
        violation,
    })
}

fn find_violation(t: &Table) -> Option<Violation> {
    let n = t.n();
    let set = |m: u64| Subset::from_mask_unchecked(n, m);
    let f0 = t.value(0);
    if f0.abs() > EPS_VAL {
        return Some(Violation::NotNormalized { value: f0 });
    }
    for m in 0..1u64 << n {
        if t.value(m) < -EPS_VAL || t.value(m).is_nan() {
            return Some(Violation::Negative {
                set: set(m),
                value: t.value(m),
            });
        }
    }
    for b in 0..1u64 << n {
        let fb = t.value(b);
        // all submasks a of b, including b itself and 0
        let mut a = b;
        loop {
            let fa = t.value(a);
            if fa > fb + EPS_VAL {
                return Some(Violation::NotMonotone {
                    a: set(a),
                    b: set(b),
                    fa,
                    fb,
                });
            }
            if a != b {
                let mut free = !b & crate::setfun::full_mask(n);
                while free != 0 {
                    let e = free.trailing_zeros() as usize;
                    free &= free - 1;
                    let gain_a = t.value(a | 1 << e) - fa;
                    let gain_b = t.value(b | 1 << e) - fb;
                    if gain_a < gain_b - EPS_VAL {
                        return Some(Violation::NotSubmodular {
                            a: set(a),
                            b: set(b),
                            e,
                            gain_a,
                            gain_b,
                        });
                    }
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    None
}
