use serde::{Deserialize, Serialize};

use super::modular::check_alpha;
use crate::error::{construction, Result};
use crate::setfun::{SetFunction, Subset, MAX_GROUND};

/// Users-by-items matrix of non-negative ratings, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingsMatrix {
    users: usize,
    items: usize,
    r: Vec<f64>,
}

impl RatingsMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let users = rows.len();
        if users == 0 {
            return Err(construction("ratings matrix has no rows"));
        }
        let items = rows[0].len();
        if items == 0 {
            return Err(construction("ratings matrix has no columns"));
        }
        let mut r = Vec::with_capacity(users * items);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != items {
                return Err(construction(format!(
                    "row {i} has {} entries, expected {items}",
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(construction(format!("row {i} has a negative or non-finite rating {x}")));
            }
            r.extend(row);
        }
        Ok(RatingsMatrix { users, items, r })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn items(&self) -> usize {
        self.items
    }

    #[inline]
    pub fn get(&self, user: usize, item: usize) -> f64 {
        self.r[user * self.items + item]
    }

    pub fn row(&self, user: usize) -> &[f64] {
        &self.r[user * self.items..(user + 1) * self.items]
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_items(&self, cols: &[usize]) -> Result<RatingsMatrix> {
        if let Some(c) = cols.iter().find(|&&c| c >= self.items) {
            return Err(construction(format!("column {c} out of range")));
        }
        let rows = (0..self.users)
            .map(|u| cols.iter().map(|&c| self.get(u, c)).collect())
            .collect();
        RatingsMatrix::new(rows)
    }

    /// Keeps the first `m` users.
    pub fn truncate_users(&mut self, m: usize) {
        let m = m.clamp(1, self.users);
        self.users = m;
        self.r.truncate(m * self.items);
    }

    pub fn column_means(&self) -> Vec<f64> {
        (0..self.items)
            .map(|j| (0..self.users).map(|i| self.get(i, j)).sum::<f64>() / self.users as f64)
            .collect()
    }
}

fn check_items(items: usize) -> Result<()> {
    if items > MAX_GROUND {
        return Err(construction(format!(
            "{items} items exceed the {MAX_GROUND}-element ground set limit; sample first"
        )));
    }
    Ok(())
}

/// `f(S) = (1/m) sum_i max_{j in S} r_ij`, with the max over the empty set
/// taken as 0.
#[derive(Clone, Debug)]
pub struct FacilityLocation {
    r: RatingsMatrix,
}

impl FacilityLocation {
    pub fn new(r: RatingsMatrix) -> Result<Self> {
        check_items(r.items())?;
        Ok(FacilityLocation { r })
    }
}

impl SetFunction for FacilityLocation {
    fn ground_size(&self) -> usize {
        self.r.items()
    }

    fn eval(&self, set: Subset) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        let total: f64 = (0..self.r.users())
            .map(|i| {
                let row = self.r.row(i);
                set.iter().map(|j| row[j]).fold(0.0, f64::max)
            })
            .sum();
        total / self.r.users() as f64
    }
}

/// `f(S) = ((1/m) sum_i sum_{j in S} r_ij)^alpha`.
///
/// Equivalent to a concave-over-modular function on the column means, but
/// zero columns are allowed.
#[derive(Clone, Debug)]
pub struct ConcaveRatings {
    means: Vec<f64>,
    alpha: f64,
}

impl ConcaveRatings {
    pub fn new(r: &RatingsMatrix, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_items(r.items())?;
        Ok(ConcaveRatings {
            means: r.column_means(),
            alpha,
        })
    }

    pub fn column_means(&self) -> &[f64] {
        &self.means
    }
}

impl SetFunction for ConcaveRatings {
    fn ground_size(&self) -> usize {
        self.means.len()
    }

    fn eval(&self, set: Subset) -> f64 {
        let s: f64 = set.iter().map(|j| self.means[j]).sum();
        if s == 0.0 {
            0.0
        } else {
            s.powf(self.alpha)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{ConcaveModular, WeightVector};
    use crate::setfun::marginal;

    fn s(n: usize, el: &[usize]) -> Subset {
        Subset::from_elements(n, el.iter().copied()).unwrap()
    }

    fn small() -> RatingsMatrix {
        RatingsMatrix::new(vec![vec![5.0, 1.0], vec![3.0, 4.0]]).unwrap()
    }

    #[test]
    fn facility_values() {
        let f = FacilityLocation::new(small()).unwrap();
        assert_eq!(f.eval(s(2, &[0])), 4.0);
        assert_eq!(f.eval(s(2, &[0, 1])), 4.5);
        assert_eq!(f.eval(Subset::empty(2)), 0.0);
        assert_eq!(marginal(&f, s(2, &[0]), 1).unwrap(), 0.5);
    }

    #[test]
    fn concave_ratings_values() {
        let r = RatingsMatrix::new(vec![vec![2.0], vec![4.0]]).unwrap();
        let f = ConcaveRatings::new(&r, 1.0).unwrap();
        assert_eq!(f.eval(s(1, &[0])), 3.0);
        assert_eq!(f.eval(Subset::empty(1)), 0.0);
        assert!(ConcaveRatings::new(&r, 0.0).is_err());
    }

    #[test]
    fn concave_ratings_equals_concave_over_column_means() {
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|i| (0..10).map(|j| ((i * 7 + j * 3) % 6) as f64 + 0.5).collect())
            .collect();
        let r = RatingsMatrix::new(rows).unwrap();
        let f = ConcaveRatings::new(&r, 0.8).unwrap();
        let g = ConcaveModular::new(WeightVector::new(r.column_means()).unwrap(), 0.8).unwrap();
        for m in 0..1u64 << 10 {
            let set = Subset::from_mask(10, m).unwrap();
            assert!((f.eval(set) - g.eval(set)).abs() <= crate::EPS_VAL);
        }
    }

    #[test]
    fn ragged_and_negative_rejected() {
        assert!(RatingsMatrix::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(RatingsMatrix::new(vec![vec![-1.0]]).is_err());
        assert!(RatingsMatrix::new(vec![]).is_err());
    }

    #[test]
    fn column_selection() {
        let r = small().select_items(&[1]).unwrap();
        assert_eq!(r.items(), 1);
        assert_eq!(r.row(1), &[4.0]);
        assert!(small().select_items(&[2]).is_err());
        let mut t = small();
        t.truncate_users(1);
        assert_eq!(t.users(), 1);
        assert_eq!(t.row(0), &[5.0, 1.0]);
    }
}
