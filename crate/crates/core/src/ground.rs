//! Ground sets of resources, subsets as bitmasks and load vectors.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest ground set representable by a [`Subset`] bitmask.
pub const MAX_GROUND: usize = 64;

/// A finite, lexicographically ordered set of resource identifiers.
///
/// Cloning is cheap; all clones share the same storage.
#[derive(Clone)]
pub struct GroundSet {
    inner: Arc<GroundInner>,
}

struct GroundInner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl GroundSet {
    /// Builds a ground set from identifiers. Order is normalised to
    /// lexicographic; duplicates and empty sets are rejected.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort();
        if names.is_empty() {
            return Err(Error::InvalidSpec("ground set must be nonempty".into()));
        }
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpec(format!("duplicate element {:?}", w[0])));
        }
        if names.len() > MAX_GROUND {
            return Err(Error::GroundTooLarge { size: names.len(), limit: MAX_GROUND });
        }
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Ok(Self { inner: Arc::new(GroundInner { names, index }) })
    }

    /// `a, b, c, ...` for up to 26 elements, `e01, e02, ...` beyond.
    pub fn with_default_names(m: usize) -> Result<Self> {
        Self::new(default_names(m))
    }

    pub fn len(&self) -> usize {
        self.inner.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.inner.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.inner.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.inner
            .index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.len())
    }

    pub fn subset<S: AsRef<str>>(&self, names: &[S]) -> Result<Subset> {
        let mut s = Subset::EMPTY;
        for n in names {
            s = s.with(self.index_of(n.as_ref())?);
        }
        Ok(s)
    }

    pub fn subset_names(&self, s: Subset) -> Vec<String> {
        s.iter().map(|i| self.name(i).to_string()).collect()
    }

    pub fn same_as(&self, other: &GroundSet) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.names == other.inner.names
    }
}

impl PartialEq for GroundSet {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for GroundSet {}

impl fmt::Debug for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

pub fn default_names(m: usize) -> Vec<String> {
    if m <= 26 {
        (0..m).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    } else {
        (1..=m).map(|i| format!("e{i:02}")).collect()
    }
}

/// A subset of a ground set, stored as a bitmask over element indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(m: usize) -> Subset {
        if m >= 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << m) - 1)
        }
    }

    pub fn singleton(i: usize) -> Subset {
        Subset(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Subset {
        it.into_iter().fold(Subset::EMPTY, Subset::with)
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn with(self, i: usize) -> Subset {
        Subset(self.0 | 1u64 << i)
    }

    #[inline]
    pub fn without(self, i: usize) -> Subset {
        Subset(self.0 & !(1u64 << i))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, o: Subset) -> Subset {
        Subset(self.0 | o.0)
    }

    pub fn intersection(self, o: Subset) -> Subset {
        Subset(self.0 & o.0)
    }

    pub fn difference(self, o: Subset) -> Subset {
        Subset(self.0 & !o.0)
    }

    pub fn symmetric_difference(self, o: Subset) -> Subset {
        Subset(self.0 ^ o.0)
    }

    pub fn is_subset_of(self, o: Subset) -> bool {
        self.0 & !o.0 == 0
    }

    /// Element indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `{0..m}` in increasing bitmask order.
    pub fn all(m: usize) -> impl Iterator<Item = Subset> {
        assert!(m < 64);
        (0..1u64 << m).map(Subset)
    }

    /// Lexicographic comparison of the sorted index sequences.
    pub fn lex_cmp(self, o: Subset) -> std::cmp::Ordering {
        self.iter().cmp(o.iter())
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A point of `R_+^E`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadVector {
    ground: GroundSet,
    values: Vec<f64>,
}

impl LoadVector {
    pub fn zeros(ground: &GroundSet) -> Self {
        Self { ground: ground.clone(), values: vec![0.0; ground.len()] }
    }

    pub fn new(ground: &GroundSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != ground.len() {
            return Err(Error::InvalidSpec(format!(
                "load vector has {} entries, ground set has {}",
                values.len(),
                ground.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite load {v}")));
        }
        Ok(Self { ground: ground.clone(), values })
    }

    pub fn from_pairs<S: AsRef<str>>(ground: &GroundSet, pairs: &[(S, f64)]) -> Result<Self> {
        let mut x = Self::zeros(ground);
        for (name, v) in pairs {
            x.values[ground.index_of(name.as_ref())?] = *v;
        }
        Ok(x)
    }

    /// Characteristic vector of element `i`.
    pub fn unit(ground: &GroundSet, i: usize) -> Self {
        let mut x = Self::zeros(ground);
        x.values[i] = 1.0;
        x
    }

    pub fn indicator(ground: &GroundSet, s: Subset) -> Self {
        let mut x = Self::zeros(ground);
        for i in s.iter() {
            x.values[i] = 1.0;
        }
        x
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn get_named(&self, name: &str) -> Result<f64> {
        Ok(self.values[self.ground.index_of(name)?])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `x(U)`.
    pub fn sum_over(&self, s: Subset) -> f64 {
        s.iter().map(|i| self.values[i]).sum()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `self + alpha * (chi_to - chi_from)`.
    pub fn exchanged(&self, from: usize, to: usize, alpha: f64) -> Self {
        let mut y = self.clone();
        y.values[from] -= alpha;
        y.values[to] += alpha;
        y
    }

    pub fn max_abs_diff(&self, other: &LoadVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Convex combination `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &LoadVector, t: f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        Self { ground: self.ground.clone(), values }
    }

    pub fn named(&self) -> Vec<(String, f64)> {
        self.ground.names().iter().cloned().zip(self.values.iter().copied()).collect()
    }
}

/// Tiny union-find used by graph routines.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Returns `false` when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_is_sorted_and_unique() {
        let g = GroundSet::new(["c", "a", "b"]).unwrap();
        assert_eq!(g.names(), ["a", "b", "c"]);
        assert_eq!(g.index_of("b").unwrap(), 1);
        assert!(GroundSet::new(["a", "a"]).is_err());
        assert!(GroundSet::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn subset_ops() {
        let s = Subset::from_indices([0, 2, 5]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 2, 5]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(2) && !s.contains(1));
        assert_eq!(s.without(2).with(1), Subset::from_indices([0, 1, 5]));
        assert_eq!(Subset::full(3).0, 7);
        assert!(Subset::from_indices([1]).lex_cmp(Subset::from_indices([0, 2])).is_gt());
    }

    #[test]
    fn load_vector_sums() {
        let g = GroundSet::new(["a", "b", "c"]).unwrap();
        let x = LoadVector::new(&g, vec![1.0, 2.0, 0.5]).unwrap();
        assert_eq!(x.sum_over(Subset::from_indices([0, 2])), 1.5);
        assert_eq!(x.exchanged(1, 0, 0.5).values(), &[1.5, 1.5, 0.5]);
        assert_eq!(LoadVector::unit(&g, 2).values(), &[0.0, 0.0, 1.0]);
    }
}
