use crate::error::{construction, Result};
use crate::setfun::{SetFunction, Subset};

/// The tight worst-case coverage instance for greedy.
///
/// Points are `{1..k}^k`. For `i < k` the set `A_i` holds points with
/// `x_i = 1`; for `j <= k` the set `B_j` holds points with `x_k = j`. The
/// ground set is ordered `A_1..A_{k-1}, B_1..B_k` (2k - 1 elements) and
/// `f(S)` counts covered points.
#[derive(Clone, Debug)]
pub struct NwfCoverage {
    k: usize,
}

impl NwfCoverage {
    pub const MAX_K: usize = 8;

    pub fn new(k: usize) -> Result<Self> {
        if !(2..=Self::MAX_K).contains(&k) {
            return Err(construction(format!(
                "coverage instance needs 2 <= k <= {}, got {k}",
                Self::MAX_K
            )));
        }
        Ok(NwfCoverage { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Index of `A_i`, `1 <= i <= k - 1`.
    pub fn a(&self, i: usize) -> usize {
        assert!((1..self.k).contains(&i));
        i - 1
    }

    /// Index of `B_j`, `1 <= j <= k`.
    pub fn b(&self, j: usize) -> usize {
        assert!((1..=self.k).contains(&j));
        self.k - 1 + j - 1
    }

    pub fn labels(&self) -> Vec<String> {
        (1..self.k)
            .map(|i| format!("A{i}"))
            .chain((1..=self.k).map(|j| format!("B{j}")))
            .collect()
    }

    fn counts(&self, set: Subset) -> (u32, u32) {
        let a_mask = (1u64 << (self.k - 1)) - 1;
        let a = (set.mask() & a_mask).count_ones();
        let b = (set.mask() >> (self.k - 1)).count_ones();
        (a, b)
    }

    /// Coverage by walking every point of `{1..k}^k`. Exponential; meant
    /// for cross-checking the closed form on small `k`.
    pub fn covered_by_enumeration(&self, set: Subset) -> u64 {
        let k = self.k;
        let total = (k as u64).pow(k as u32);
        let mut covered = 0;
        let mut x = vec![0usize; k];
        for _ in 0..total {
            let hit = set.iter().any(|e| {
                if e < k - 1 {
                    x[e] == 0
                } else {
                    x[k - 1] == e - (k - 1)
                }
            });
            if hit {
                covered += 1;
            }
            for c in x.iter_mut() {
                *c += 1;
                if *c < k {
                    break;
                }
                *c = 0;
            }
        }
        covered
    }
}

impl SetFunction for NwfCoverage {
    fn ground_size(&self) -> usize {
        2 * self.k - 1
    }

    fn eval(&self, set: Subset) -> f64 {
        // Uncovered points: x_i != 1 for each chosen A_i, x_k outside the
        // chosen B's, remaining coordinates free.
        let k = self.k as u64;
        let (a, b) = self.counts(set);
        let total = k.pow(self.k as u32);
        let uncovered = (k - 1).pow(a) * (k - b as u64) * k.pow(self.k as u32 - 1 - a);
        (total - uncovered) as f64
    }
}
