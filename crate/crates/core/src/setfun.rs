//! Ground sets, bitmask subsets and the value-oracle contract.
//!
//! Every set function in the crate is a normalized, non-negative map from
//! [`Subset`] to `f64`. Subsets are single `u64` words, so a ground set holds
//! at most [`MAX_GROUND`] elements.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{construction, usage, Error, Result};

/// Largest supported ground set.
pub const MAX_GROUND: usize = 64;

/// Largest ground set the exhaustive routines will tabulate (2^20 values).
pub const MAX_ENUM: usize = 20;

/// Absolute tolerance for value comparisons ("ties" and "optimal").
pub const EPS_VAL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundSet {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_GROUND {
            return Err(construction(format!(
                "ground set size must be in 1..={MAX_GROUND}, got {n}"
            )));
        }
        Ok(GroundSet { n, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut g = GroundSet::new(labels.len())?;
        g.labels = Some(labels);
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, e: usize) -> String {
        match &self.labels {
            Some(l) if e < l.len() => l[e].clone(),
            _ => e.to_string(),
        }
    }

    pub fn empty(&self) -> Subset {
        Subset::empty(self.n)
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.n)
    }
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A subset of a ground set `{0, .., n-1}` stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    mask: u64,
    n: u8,
}

impl Subset {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_GROUND, "ground set too large: {n}");
        Subset { mask: 0, n: n as u8 }
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_GROUND, "ground set too large: {n}");
        Subset {
            mask: full_mask(n),
            n: n as u8,
        }
    }

    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        if n > MAX_GROUND {
            return Err(usage(format!("ground set too large: {n}")));
        }
        if mask & !full_mask(n) != 0 {
            return Err(usage(format!(
                "mask {mask:#x} has bits outside a ground set of {n}"
            )));
        }
        Ok(Subset { mask, n: n as u8 })
    }

    /// Builds a subset without checking the mask; callers guarantee
    /// `mask` fits in `n` bits.
    #[inline]
    pub(crate) fn from_mask_unchecked(n: usize, mask: u64) -> Self {
        debug_assert!(mask & !full_mask(n) == 0);
        Subset { mask, n: n as u8 }
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(n: usize, elements: I) -> Result<Self> {
        let mut s = Subset::empty(n);
        for e in elements {
            if e >= n {
                return Err(usage(format!("element {e} outside ground set of {n}")));
            }
            s.mask |= 1 << e;
        }
        Ok(s)
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.mask
    }

    #[inline]
    pub fn ground_size(self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    #[inline]
    pub fn contains(self, e: usize) -> bool {
        e < 64 && self.mask >> e & 1 == 1
    }

    /// `S + e`. Panics if `e` is outside the ground set.
    #[inline]
    pub fn with(self, e: usize) -> Self {
        assert!(e < self.ground_size(), "element {e} outside ground set");
        Subset {
            mask: self.mask | 1 << e,
            n: self.n,
        }
    }

    /// `S - e`.
    #[inline]
    pub fn without(self, e: usize) -> Self {
        Subset {
            mask: self.mask & !(1u64.checked_shl(e as u32).unwrap_or(0)),
            n: self.n,
        }
    }

    fn check_same(self, other: Subset) -> Result<()> {
        if self.n != other.n {
            return Err(usage(format!(
                "subsets over different ground sets ({} vs {})",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn union(self, other: Subset) -> Result<Self> {
        self.check_same(other)?;
        Ok(Subset {
            mask: self.mask | other.mask,
            n: self.n,
        })
    }

    pub fn intersection(self, other: Subset) -> Result<Self> {
        self.check_same(other)?;
        Ok(Subset {
            mask: self.mask & other.mask,
            n: self.n,
        })
    }

    pub fn difference(self, other: Subset) -> Result<Self> {
        self.check_same(other)?;
        Ok(Subset {
            mask: self.mask & !other.mask,
            n: self.n,
        })
    }

    pub fn is_subset_of(self, other: Subset) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.mask & !other.mask == 0)
    }

    pub fn complement(self) -> Self {
        Subset {
            mask: !self.mask & full_mask(self.ground_size()),
            n: self.n,
        }
    }

    pub fn iter(self) -> Elements {
        Elements(self.mask)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl IntoIterator for Subset {
    type Item = usize;
    type IntoIter = Elements;

    fn into_iter(self) -> Elements {
        self.iter()
    }
}

/// Ascending iterator over the members of a subset.
#[derive(Clone, Debug)]
pub struct Elements(u64);

impl Iterator for Elements {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let e = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(e)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.0.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Elements {}

#[derive(Serialize, Deserialize)]
struct SubsetRepr {
    n: usize,
    elements: Vec<usize>,
}

impl Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SubsetRepr {
            n: self.ground_size(),
            elements: self.to_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SubsetRepr::deserialize(deserializer)?;
        if repr.n > MAX_GROUND {
            return Err(serde::de::Error::custom("ground set too large"));
        }
        Subset::from_elements(repr.n, repr.elements).map_err(serde::de::Error::custom)
    }
}

/// Iterates every mask of `n` bits with exactly `size` bits set, in
/// increasing numeric order (Gosper's hack).
pub fn masks_of_size(n: usize, size: usize) -> impl Iterator<Item = u64> {
    let limit = full_mask(n);
    let mut next = if size > n {
        None
    } else if size == 0 {
        Some(0u64)
    } else {
        Some(full_mask(size))
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            if r == 0 {
                None
            } else {
                let nxt = (((r ^ cur) >> 2) / c) | r;
                (nxt <= limit && nxt & !limit == 0).then_some(nxt)
            }
        };
        Some(cur)
    })
}

/// Every mask of `n` bits with at most `k` bits set, grouped by size.
pub fn masks_up_to(n: usize, k: usize) -> impl Iterator<Item = u64> {
    (0..=k.min(n)).flat_map(move |s| masks_of_size(n, s))
}

/// A normalized, non-negative, deterministic set function.
///
/// Implementors must be pure: equal subsets give bit-identical values and
/// concurrent calls are allowed.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn eval(&self, set: Subset) -> f64;
}

impl<F: SetFunction + ?Sized> SetFunction for &F {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }

    fn eval(&self, set: Subset) -> f64 {
        (**self).eval(set)
    }
}

impl<F: SetFunction + ?Sized> SetFunction for Arc<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }

    fn eval(&self, set: Subset) -> f64 {
        (**self).eval(set)
    }
}

impl<F: SetFunction + ?Sized> SetFunction for Box<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }

    fn eval(&self, set: Subset) -> f64 {
        (**self).eval(set)
    }
}

/// `f(S + e) - f(S)`.
pub fn marginal<F: SetFunction + ?Sized>(f: &F, set: Subset, e: usize) -> Result<f64> {
    check_element(f, set, e)?;
    Ok(f.eval(set.with(e)) - f.eval(set))
}

/// `f(S + e) - (1 - delta) f(S)`, with `delta` restricted to `[0, 1 - 1/k]`.
pub fn delta_marginal<F: SetFunction + ?Sized>(
    f: &F,
    set: Subset,
    e: usize,
    delta: f64,
    k: usize,
) -> Result<f64> {
    check_delta(delta, k)?;
    check_element(f, set, e)?;
    Ok(f.eval(set.with(e)) - (1.0 - delta) * f.eval(set))
}

pub(crate) fn check_delta(delta: f64, k: usize) -> Result<()> {
    let hi = if k == 0 { 0.0 } else { 1.0 - 1.0 / k as f64 };
    if !(delta >= 0.0 && delta <= hi + 1e-15) {
        return Err(usage(format!("delta {delta} outside [0, {hi}] for k = {k}")));
    }
    Ok(())
}

fn check_element<F: SetFunction + ?Sized>(f: &F, set: Subset, e: usize) -> Result<()> {
    if set.ground_size() != f.ground_size() {
        return Err(usage(format!(
            "subset over {} elements passed to an oracle over {}",
            set.ground_size(),
            f.ground_size()
        )));
    }
    if e >= f.ground_size() {
        return Err(usage(format!("element {e} outside ground set")));
    }
    if set.contains(e) {
        return Err(usage(format!("element {e} already in {set}")));
    }
    Ok(())
}

/// A set function with an attached query counter and an optional
/// memoization table.
pub struct ValueOracle {
    inner: Arc<dyn SetFunction>,
    queries: AtomicU64,
    cache: Option<RwLock<HashMap<u64, f64>>>,
}

impl ValueOracle {
    pub fn new<F: SetFunction + 'static>(f: F) -> Self {
        ValueOracle::from_arc(Arc::new(f))
    }

    pub fn from_arc(inner: Arc<dyn SetFunction>) -> Self {
        ValueOracle {
            inner,
            queries: AtomicU64::new(0),
            cache: None,
        }
    }

    /// Same function behind a lookup table. The returned oracle starts with
    /// a zero counter and counts only evaluations that miss the table.
    pub fn memoized(&self) -> ValueOracle {
        ValueOracle {
            inner: Arc::clone(&self.inner),
            queries: AtomicU64::new(0),
            cache: Some(RwLock::new(HashMap::new())),
        }
    }

    pub fn is_memoized(&self) -> bool {
        self.cache.is_some()
    }

    /// Number of evaluations of the underlying function so far.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_queries(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &Arc<dyn SetFunction> {
        &self.inner
    }
}

impl fmt::Debug for ValueOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValueOracle")
            .field("n", &self.inner.ground_size())
            .field("queries", &self.queries())
            .field("memoized", &self.is_memoized())
            .finish()
    }
}

impl SetFunction for ValueOracle {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn eval(&self, set: Subset) -> f64 {
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.read().expect("oracle cache poisoned").get(&set.mask()) {
                return *v;
            }
            let v = self.inner.eval(set);
            self.queries.fetch_add(1, Ordering::Relaxed);
            cache
                .write()
                .expect("oracle cache poisoned")
                .insert(set.mask(), v);
            v
        } else {
            self.queries.fetch_add(1, Ordering::Relaxed);
            self.inner.eval(set)
        }
    }
}

/// All `2^n` values of a set function, indexed by mask.
#[derive(Clone, Debug)]
pub struct Table {
    n: usize,
    values: Vec<f64>,
}

impl Table {
    pub fn build<F: SetFunction + ?Sized>(f: &F) -> Result<Table> {
        let n = f.ground_size();
        if n > MAX_ENUM {
            return Err(Error::Resource(format!(
                "exhaustive enumeration needs n <= {MAX_ENUM}, got n = {n}; use a smaller instance"
            )));
        }
        let values = (0..1u64 << n)
            .into_par_iter()
            .map(|m| f.eval(Subset::from_mask_unchecked(n, m)))
            .collect();
        Ok(Table { n, values })
    }

    #[inline]
    pub fn value(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }
}

impl SetFunction for Table {
    fn ground_size(&self) -> usize {
        self.n
    }

    #[inline]
    fn eval(&self, set: Subset) -> f64 {
        self.values[set.mask() as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Modular(Vec<f64>);

    impl SetFunction for Modular {
        fn ground_size(&self) -> usize {
            self.0.len()
        }

        fn eval(&self, set: Subset) -> f64 {
            set.iter().map(|e| self.0[e]).sum()
        }
    }

    fn set(n: usize, el: &[usize]) -> Subset {
        Subset::from_elements(n, el.iter().copied()).unwrap()
    }

    #[test]
    fn set_algebra() {
        let a = set(4, &[1, 2, 3]);
        assert_eq!(a.difference(set(4, &[2])).unwrap(), set(4, &[1, 3]));
        assert_eq!(Subset::empty(4).len(), 0);
        let z = set(4, &[0]);
        assert_eq!(z.union(z).unwrap(), z);
        assert_eq!(a.intersection(set(4, &[0, 1])).unwrap(), set(4, &[1]));
        assert_eq!(a.complement(), z);
        assert!(set(4, &[1]).is_subset_of(a).unwrap());
        assert_eq!(a.to_vec(), vec![1, 2, 3]);
        assert_eq!(a.to_string(), "{1,2,3}");
    }

    #[test]
    fn mismatched_ground_sets_are_rejected() {
        let a = Subset::empty(3);
        let b = Subset::empty(4);
        assert!(matches!(a.union(b), Err(Error::Usage(_))));
        assert!(matches!(a.difference(b), Err(Error::Usage(_))));
        assert!(Subset::from_mask(3, 0b1000).is_err());
        assert!(Subset::from_elements(3, [3]).is_err());
    }

    #[test]
    fn full_word_ground_set() {
        let s = Subset::full(64);
        assert_eq!(s.len(), 64);
        assert!(s.complement().is_empty());
        assert_eq!(s.without(63).len(), 63);
    }

    #[test]
    fn gosper_enumerates_binomial_counts() {
        for n in 0..=10 {
            let mut total = 0;
            for s in 0..=n {
                let masks: Vec<u64> = masks_of_size(n, s).collect();
                let expected = (0..s).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64);
                assert_eq!(masks.len() as u64, expected, "n={n} s={s}");
                assert!(masks.windows(2).all(|w| w[0] < w[1]));
                assert!(masks.iter().all(|m| m.count_ones() as usize == s));
                total += masks.len();
            }
            assert_eq!(total, 1 << n);
        }
        assert_eq!(masks_of_size(64, 64).count(), 1);
        assert_eq!(masks_of_size(3, 4).count(), 0);
    }

    #[test]
    fn marginals() {
        let f = Modular(vec![3.0, 2.0, 1.0]);
        assert_eq!(marginal(&f, set(3, &[0]), 1).unwrap(), 2.0);
        assert!(matches!(marginal(&f, set(3, &[0]), 0), Err(Error::Usage(_))));
        let g = Modular(vec![3.0, 2.0]);
        assert_eq!(delta_marginal(&g, set(2, &[0]), 1, 0.5, 2).unwrap(), 3.5);
        assert_eq!(
            delta_marginal(&g, set(2, &[0]), 1, 0.0, 2).unwrap(),
            marginal(&g, set(2, &[0]), 1).unwrap()
        );
        for d in [0.0, 0.25, 0.5] {
            assert_eq!(delta_marginal(&g, Subset::empty(2), 1, d, 2).unwrap(), 2.0);
        }
        assert!(delta_marginal(&g, Subset::empty(2), 1, 0.6, 2).is_err());
        assert!(delta_marginal(&g, Subset::empty(2), 1, -0.1, 2).is_err());
    }

    #[test]
    fn memoization_counts_underlying_queries() {
        let f = ValueOracle::new(Modular(vec![1.0, 2.0, 3.0, 4.0]));
        let m = f.memoized();
        let s = set(4, &[1, 2]);
        assert_eq!(m.eval(s), 5.0);
        assert_eq!(m.eval(s), 5.0);
        assert_eq!(m.queries(), 1);
        for mask in 0..16 {
            m.eval(Subset::from_mask(4, mask).unwrap());
        }
        assert_eq!(m.queries(), 16);
        for mask in 0..16 {
            let s = Subset::from_mask(4, mask).unwrap();
            assert_eq!(m.eval(s).to_bits(), f.eval(s).to_bits());
        }
        assert_eq!(f.queries(), 16);
    }

    #[test]
    fn table_matches_oracle() {
        let f = Modular(vec![0.5, 1.5, 2.5]);
        let t = Table::build(&f).unwrap();
        for mask in 0..8 {
            assert_eq!(t.value(mask), f.eval(Subset::from_mask(3, mask).unwrap()));
        }
        let big = Modular(vec![1.0; 21]);
        assert!(matches!(Table::build(&big), Err(Error::Resource(_))));
    }

    #[test]
    fn subset_json_roundtrip() {
        let s = set(6, &[0, 4, 5]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"n":6,"elements":[0,4,5]}"#);
        assert_eq!(serde_json::from_str::<Subset>(&j).unwrap(), s);
    }
}
