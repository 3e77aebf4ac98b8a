//! Greedy maximization under a cardinality constraint, plus the exhaustive
//! optimizer every sharpness fit is anchored to.
//!
//! Ties are resolved globally the same way: an element is a tie candidate
//! when its marginal gain is within [`EPS_VAL`] of the best gain, and greedy
//! takes the lowest-indexed candidate.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::setfun::{full_mask, masks_up_to, SetFunction, Subset, Table, EPS_VAL, MAX_ENUM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrajectory {
    /// Elements in the order they were added.
    pub picks: Vec<usize>,
    /// `f(S_0), .., f(S_k)` with `S_0` empty.
    pub values: Vec<f64>,
    /// Oracle evaluations spent.
    pub queries: u64,
}

impl GreedyTrajectory {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trajectory has at least f(S_0)")
    }

    pub fn solution(&self, n: usize) -> Subset {
        Subset::from_elements(n, self.picks.iter().copied()).expect("picks inside ground set")
    }
}

fn check_budget<F: SetFunction + ?Sized>(f: &F, k: usize) -> Result<usize> {
    let n = f.ground_size();
    if k == 0 || k > n {
        return Err(usage(format!("budget k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    Ok(n)
}

/// The standard greedy algorithm: `k` times, add the element of largest
/// marginal gain.
pub fn greedy<F: SetFunction + ?Sized>(f: &F, k: usize) -> Result<GreedyTrajectory> {
    let n = check_budget(f, k)?;
    let mut set = Subset::empty(n);
    let mut current = f.eval(set);
    let mut queries = 1;
    let mut picks = Vec::with_capacity(k);
    let mut values = vec![current];
    let mut gains = vec![f64::NEG_INFINITY; n];
    let mut next = vec![0.0; n];
    for _ in 0..k {
        let mut best = f64::NEG_INFINITY;
        for e in 0..n {
            if set.contains(e) {
                gains[e] = f64::NEG_INFINITY;
                continue;
            }
            next[e] = f.eval(set.with(e));
            gains[e] = next[e] - current;
            queries += 1;
            best = best.max(gains[e]);
        }
        let pick = (0..n)
            .find(|&e| !set.contains(e) && gains[e] >= best - EPS_VAL)
            .expect("a candidate exists while |S| < n");
        set = set.with(pick);
        current = next[pick];
        picks.push(pick);
        values.push(current);
    }
    Ok(GreedyTrajectory {
        picks,
        values,
        queries,
    })
}

/// Accelerated greedy with stale upper bounds on marginal gains.
///
/// For submodular `f` the cached gain of an element never underestimates
/// its current gain, so only elements that could be tie candidates are
/// re-evaluated. Picks and values agree with [`greedy`].
pub fn lazy_greedy<F: SetFunction + ?Sized>(f: &F, k: usize) -> Result<GreedyTrajectory> {
    let n = check_budget(f, k)?;
    let mut set = Subset::empty(n);
    let mut current = f.eval(set);
    let mut queries = 1;
    // f(S + e) as of the last refresh
    let mut next: Vec<f64> = (0..n)
        .map(|e| f.eval(Subset::from_mask_unchecked(n, 1 << e)))
        .collect();
    let mut upper: Vec<f64> = next.iter().map(|v| v - current).collect();
    queries += n as u64;
    // iteration at which upper[e] was last refreshed
    let mut fresh = vec![0usize; n];
    let mut picks = Vec::with_capacity(k);
    let mut values = vec![current];

    for it in 0..k {
        let candidates = || (0..n).filter(|&e| !set.contains(e));
        let top = loop {
            let e = candidates()
                .fold(None, |acc: Option<usize>, e| match acc {
                    Some(b) if upper[b] >= upper[e] => Some(b),
                    _ => Some(e),
                })
                .expect("a candidate exists while |S| < n");
            if fresh[e] == it {
                break upper[e];
            }
            next[e] = f.eval(set.with(e));
            upper[e] = next[e] - current;
            queries += 1;
            fresh[e] = it;
        };
        // Anything whose bound reaches the tie band may still be a tie.
        let mut best = top;
        for e in candidates() {
            if fresh[e] != it && upper[e] >= best - EPS_VAL {
                next[e] = f.eval(set.with(e));
                upper[e] = next[e] - current;
                queries += 1;
                fresh[e] = it;
                best = best.max(upper[e]);
            }
        }
        let pick = candidates()
            .find(|&e| fresh[e] == it && upper[e] >= best - EPS_VAL)
            .expect("the top element is fresh");
        set = set.with(pick);
        current = next[pick];
        picks.push(pick);
        values.push(current);
    }
    Ok(GreedyTrajectory {
        picks,
        values,
        queries,
    })
}

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstTieOutcome {
    /// Smallest final value over all tie-breaking choices.
    pub value: f64,
    /// One greedy run that attains it.
    pub picks: Vec<usize>,
    /// Search states expanded.
    pub nodes: usize,
}

/// Minimum final value over every greedy run that may pick any element
/// within [`EPS_VAL`] of the best marginal gain at each step.
///
/// Depth-first over tie branches with memoization on the current set.
/// Fails with a resource error once more than `node_budget` states have
/// been expanded.
pub fn worst_tie_greedy<F: SetFunction + ?Sized>(
    f: &F,
    k: usize,
    node_budget: usize,
) -> Result<WorstTieOutcome> {
    let n = check_budget(f, k)?;
    let mut search = TieSearch {
        f,
        n,
        k,
        budget: node_budget,
        nodes: 0,
        memo: HashMap::new(),
    };
    let value = search.visit(0)?;
    // Replay the memo to recover one worst run.
    let mut picks = Vec::with_capacity(k);
    let mut mask = 0u64;
    while picks.len() < k {
        let next = search
            .children(mask)
            .into_iter()
            .find(|&e| {
                let child = mask | 1 << e;
                let v = if picks.len() + 1 == k {
                    f.eval(Subset::from_mask_unchecked(n, child))
                } else {
                    search.memo[&child]
                };
                v == search.memo[&mask]
            })
            .expect("memo holds the minimizing branch");
        picks.push(next);
        mask |= 1 << next;
    }
    Ok(WorstTieOutcome {
        value,
        picks,
        nodes: search.nodes,
    })
}

struct TieSearch<'a, F: ?Sized> {
    f: &'a F,
    n: usize,
    k: usize,
    budget: usize,
    nodes: usize,
    memo: HashMap<u64, f64>,
}

impl<F: SetFunction + ?Sized> TieSearch<'_, F> {
    fn eval(&self, mask: u64) -> f64 {
        self.f.eval(Subset::from_mask_unchecked(self.n, mask))
    }

    fn children(&self, mask: u64) -> Vec<usize> {
        let base = self.eval(mask);
        let free = !mask & full_mask(self.n);
        let gains: Vec<(usize, f64)> = Subset::from_mask_unchecked(self.n, free)
            .iter()
            .map(|e| (e, self.eval(mask | 1 << e) - base))
            .collect();
        let best = gains.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
        gains
            .into_iter()
            .filter(|g| g.1 >= best - EPS_VAL)
            .map(|g| g.0)
            .collect()
    }

    fn visit(&mut self, mask: u64) -> Result<f64> {
        if mask.count_ones() as usize == self.k {
            return Ok(self.eval(mask));
        }
        if let Some(v) = self.memo.get(&mask) {
            return Ok(*v);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Resource(format!(
                "worst-tie greedy search exceeded {} nodes; try a smaller instance",
                self.budget
            )));
        }
        let mut worst = f64::INFINITY;
        for e in self.children(mask) {
            worst = worst.min(self.visit(mask | 1 << e)?);
        }
        self.memo.insert(mask, worst);
        Ok(worst)
    }
}

/// OPT and every subset of size at most `k` attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimaSet {
    pub k: usize,
    pub opt_value: f64,
    /// Ordered by mask.
    pub optima: Vec<Subset>,
}

impl OptimaSet {
    pub fn count(&self) -> usize {
        self.optima.len()
    }

    /// Optima of size exactly `k`.
    pub fn of_full_size(&self) -> Vec<Subset> {
        self.optima.iter().copied().filter(|s| s.len() == self.k).collect()
    }
}

/// Exhaustive maximization over `|S| <= k`.
pub fn brute_force_optima<F: SetFunction + ?Sized>(f: &F, k: usize) -> Result<OptimaSet> {
    check_enum_size(f.ground_size())?;
    let t = Table::build(f)?;
    optima_from_table(&t, k)
}

pub(crate) fn check_enum_size(n: usize) -> Result<()> {
    if n > MAX_ENUM {
        return Err(Error::Resource(format!(
            "exhaustive search needs n <= {MAX_ENUM}, got n = {n}; use a smaller instance"
        )));
    }
    Ok(())
}

/// [`brute_force_optima`] on an already tabulated function.
pub fn optima_from_table(t: &Table, k: usize) -> Result<OptimaSet> {
    let n = t.n();
    if k == 0 || k > n {
        return Err(usage(format!("budget k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    let masks: Vec<u64> = masks_up_to(n, k).collect();
    let opt_value = masks
        .par_iter()
        .map(|&m| t.value(m))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let mut optima: Vec<Subset> = masks
        .par_iter()
        .filter(|&&m| t.value(m) >= opt_value - EPS_VAL)
        .map(|&m| Subset::from_mask_unchecked(n, m))
        .collect();
    optima.sort_unstable();
    Ok(OptimaSet {
        k,
        opt_value,
        optima,
    })
}

/// Exhaustive maximization over `|S| = k` only.
pub fn optima_of_size(t: &Table, k: usize) -> Result<OptimaSet> {
    let n = t.n();
    if k == 0 || k > n {
        return Err(usage(format!("budget k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    let masks: Vec<u64> = crate::setfun::masks_of_size(n, k).collect();
    let opt_value = masks.iter().map(|&m| t.value(m)).fold(f64::NEG_INFINITY, f64::max);
    let optima = masks
        .into_iter()
        .filter(|&m| t.value(m) >= opt_value - EPS_VAL)
        .map(|m| Subset::from_mask_unchecked(n, m))
        .collect();
    Ok(OptimaSet {
        k,
        opt_value,
        optima,
    })
}
