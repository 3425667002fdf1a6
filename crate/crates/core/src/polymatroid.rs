//! Submodular oracles and polymatroid base polytopes.
//!
//! A polymatroid `(E, rho)` has base polytope
//! `P = { x >= 0 : x(U) <= rho(U) for all U, x(E) = rho(E) }`.
//! Everything here that needs to look at all subsets does so by exhaustive
//! enumeration, guarded by a ground-size limit.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::{GroundSet, LoadVector, Subset};

/// Absolute tolerance for membership and capacity comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Ground-size limit for the axiom check.
pub const CERTIFY_LIMIT: usize = 16;

/// Ground-size limit for membership and exchange capacities.
pub const ENUMERATION_LIMIT: usize = 20;

type SetFn = dyn Fn(Subset) -> f64 + Send + Sync;

/// Evaluation oracle for a set function `rho: 2^E -> R`.
///
/// Values are memoised in a dense table indexed by subset bitmask the
/// first time an exhaustive operation needs them.
#[derive(Clone)]
pub struct SubmodularOracle {
    ground: GroundSet,
    eval: Arc<SetFn>,
    table: Arc<OnceLock<Vec<f64>>>,
}

impl fmt::Debug for SubmodularOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubmodularOracle")
            .field("ground", &self.ground)
            .field("total", &self.total())
            .finish()
    }
}

impl SubmodularOracle {
    pub fn from_fn<F>(ground: &GroundSet, f: F) -> Self
    where
        F: Fn(Subset) -> f64 + Send + Sync + 'static,
    {
        Self { ground: ground.clone(), eval: Arc::new(f), table: Arc::new(OnceLock::new()) }
    }

    /// Oracle backed by an explicit table with one value per subset bitmask.
    pub fn from_values(ground: &GroundSet, values: Vec<f64>) -> Result<Self> {
        let m = ground.len();
        if m > ENUMERATION_LIMIT {
            return Err(Error::GroundTooLarge { size: m, limit: ENUMERATION_LIMIT });
        }
        if values.len() != 1 << m {
            return Err(Error::InvalidSpec(format!(
                "value table has {} entries, expected {}",
                values.len(),
                1usize << m
            )));
        }
        let values = Arc::new(values);
        let lookup = Arc::clone(&values);
        let oracle = Self::from_fn(ground, move |s| lookup[s.0 as usize]);
        let _ = oracle.table.set(values.as_ref().clone());
        Ok(oracle)
    }

    /// Zero function on `ground`.
    pub fn zero(ground: &GroundSet) -> Self {
        Self::from_fn(ground, |_| 0.0)
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    #[inline]
    pub fn value(&self, s: Subset) -> f64 {
        match self.table.get() {
            Some(t) => t[s.0 as usize],
            None => (self.eval)(s),
        }
    }

    pub fn total(&self) -> f64 {
        self.value(self.ground.full())
    }

    /// Dense table of all `2^m` values, computed once.
    pub fn table(&self) -> Result<&[f64]> {
        let m = self.len();
        if m > ENUMERATION_LIMIT {
            return Err(Error::GroundTooLarge { size: m, limit: ENUMERATION_LIMIT });
        }
        Ok(self.table.get_or_init(|| Subset::all(m).map(|s| (self.eval)(s)).collect()))
    }

    /// `d * rho`.
    pub fn scale(&self, d: f64) -> Self {
        let inner = self.clone();
        Self::from_fn(&self.ground, move |s| d * inner.value(s))
    }

    /// Nonnegative combination `sum_k w_k * rho_k` over a shared ground set.
    pub fn combine(terms: &[(f64, SubmodularOracle)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidSpec("empty combination".into()))?;
        let ground = first.ground.clone();
        if let Some((_, o)) = terms.iter().find(|(_, o)| o.ground != ground) {
            return Err(Error::InvalidSpec(format!(
                "ground mismatch in combination: {:?} vs {:?}",
                o.ground, ground
            )));
        }
        if let Some((w, _)) = terms.iter().find(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::InvalidSpec(format!("negative combination weight {w}")));
        }
        let terms = terms.to_vec();
        Ok(Self::from_fn(&ground, move |s| terms.iter().map(|(w, o)| w * o.value(s)).sum()))
    }

    /// The same function viewed on a larger ground set; new elements are loops
    /// (they never change the value).
    pub fn extend_to(&self, target: &GroundSet) -> Result<Self> {
        if self.ground == *target {
            return Ok(self.clone());
        }
        let map: Vec<usize> = self
            .ground
            .names()
            .iter()
            .map(|n| target.index_of(n))
            .collect::<Result<_>>()?;
        let inner = self.clone();
        Ok(Self::from_fn(target, move |s| {
            let local = map
                .iter()
                .enumerate()
                .filter(|(_, &t)| s.contains(t))
                .fold(Subset::EMPTY, |acc, (i, _)| acc.with(i));
            inner.value(local)
        }))
    }

    /// Parses the table format
    /// `{"schema_version": 1, "ground": [...], "values": {"a,b": 2.0, ...}}`.
    ///
    /// Keys are comma-separated element lists in any order; the empty set
    /// may be omitted (it defaults to 0), every other subset is required.
    pub fn from_table_json(value: &serde_json::Value) -> Result<Self> {
        crate::check_schema_version(value)?;
        let file: TableFile = serde_json::from_value(value.clone())?;
        let ground = GroundSet::new(file.ground)?;
        let m = ground.len();
        if m > ENUMERATION_LIMIT {
            return Err(Error::GroundTooLarge { size: m, limit: ENUMERATION_LIMIT });
        }
        let mut values = vec![f64::NAN; 1 << m];
        values[0] = 0.0;
        for (key, v) in &file.values {
            let names: Vec<&str> =
                key.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            values[ground.subset(&names)?.0 as usize] = *v;
        }
        if let Some(missing) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidSpec(format!(
                "value table is missing subset {:?}",
                ground.subset_names(Subset(missing as u64)).join(",")
            )));
        }
        Self::from_values(&ground, values)
    }

    pub fn to_table_json(&self) -> Result<serde_json::Value> {
        let table = self.table()?;
        let values = Subset::all(self.len())
            .map(|s| (self.ground.subset_names(s).join(","), table[s.0 as usize]))
            .collect();
        Ok(serde_json::to_value(TableFile { schema_version: crate::SCHEMA_VERSION, ground: self.ground.names().to_vec(), values })?)
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    #[serde(default = "crate::schema_version")]
    schema_version: u32,
    ground: Vec<String>,
    values: BTreeMap<String, f64>,
}

/// Which polymatroid axiom a violating pair breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Normalized,
    Monotone,
    Submodular,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Ok,
    Violation { u: Subset, v: Subset, kind: Axiom },
}

impl Certificate {
    pub fn is_ok(&self) -> bool {
        matches!(self, Certificate::Ok)
    }
}

/// Checks normalisation, monotonicity and submodularity exhaustively.
///
/// Monotonicity and submodularity are checked in their local forms
/// (`rho(U) <= rho(U+e)` and `rho(U+e) + rho(U+f) >= rho(U+e+f) + rho(U)`),
/// which are equivalent to the pairwise forms; a reported violation is a pair
/// `(U, V)` that breaks the pairwise inequality directly.
pub fn certify_polymatroid(oracle: &SubmodularOracle) -> Result<Certificate> {
    let m = oracle.len();
    if m > CERTIFY_LIMIT {
        return Err(Error::GroundTooLarge { size: m, limit: CERTIFY_LIMIT });
    }
    let rho = oracle.table()?;
    let tol = DEFAULT_TOL;
    if rho[0].abs() > tol {
        return Ok(Certificate::Violation {
            u: Subset::EMPTY,
            v: Subset::EMPTY,
            kind: Axiom::Normalized,
        });
    }
    for u in Subset::all(m) {
        let base = rho[u.0 as usize];
        for e in (0..m).filter(|&e| !u.contains(e)) {
            let ue = u.with(e);
            if base > rho[ue.0 as usize] + tol {
                return Ok(Certificate::Violation { u, v: ue, kind: Axiom::Monotone });
            }
            for f in (e + 1..m).filter(|&f| !u.contains(f)) {
                let uf = u.with(f);
                let lhs = rho[ue.0 as usize] + rho[uf.0 as usize];
                let rhs = rho[ue.with(f).0 as usize] + base;
                if lhs + tol < rhs {
                    return Ok(Certificate::Violation { u: ue, v: uf, kind: Axiom::Submodular });
                }
            }
        }
    }
    Ok(Certificate::Ok)
}

fn check_same_ground(oracle: &SubmodularOracle, x: &LoadVector) -> Result<()> {
    if oracle.ground() != x.ground() {
        return Err(Error::InvalidSpec(format!(
            "load vector ground {:?} differs from oracle ground {:?}",
            x.ground(),
            oracle.ground()
        )));
    }
    Ok(())
}

/// `rho(U) - x(U)` for every subset `U`.
pub(crate) fn slack_table(oracle: &SubmodularOracle, x: &LoadVector) -> Result<Vec<f64>> {
    check_same_ground(oracle, x)?;
    let rho = oracle.table()?;
    let m = oracle.len();
    let mut xs = vec![0.0; 1 << m];
    for s in 1..1usize << m {
        let low = s.trailing_zeros() as usize;
        xs[s] = xs[s & (s - 1)] + x.get(low);
    }
    Ok(rho.iter().zip(xs).map(|(r, v)| r - v).collect())
}

/// Largest violation of the base-polytope constraints (0 when feasible).
pub fn polytope_violation(oracle: &SubmodularOracle, x: &LoadVector) -> Result<f64> {
    Ok(violation_from_slack(x, &slack_table(oracle, x)?))
}

fn violation_from_slack(x: &LoadVector, slack: &[f64]) -> f64 {
    let neg = x.values().iter().fold(0.0f64, |acc, &v| acc.max(-v));
    let over = slack.iter().fold(0.0f64, |acc, &s| acc.max(-s));
    neg.max(over).max(slack[slack.len() - 1].abs())
}

/// Exhaustive membership test for `P_rho` with absolute tolerance `tol`.
pub fn in_base_polytope(oracle: &SubmodularOracle, x: &LoadVector, tol: f64) -> Result<bool> {
    Ok(polytope_violation(oracle, x)? <= tol)
}

/// Greedy vertex for an ordering of element indices:
/// `x_{e_j} = rho({e_1..e_j}) - rho({e_1..e_{j-1}})`.
///
/// # Panics
///
/// If `order` is not a permutation of `0..m`.
pub fn greedy_vertex(oracle: &SubmodularOracle, order: &[usize]) -> LoadVector {
    let m = oracle.len();
    let seen = Subset::from_indices(order.iter().copied());
    assert!(
        order.len() == m && seen == Subset::full(m),
        "greedy order must be a permutation of 0..{m}"
    );
    let mut x = LoadVector::zeros(oracle.ground());
    let mut prefix = Subset::EMPTY;
    let mut prev = oracle.value(prefix);
    for &e in order {
        prefix = prefix.with(e);
        let cur = oracle.value(prefix);
        x.values_mut()[e] = cur - prev;
        prev = cur;
    }
    x
}

/// Ascending-weight order, ties broken by element index (i.e. lexicographically).
pub fn ascending_order(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    order
}

/// Minimiser of `<weights, x>` over the base polytope.
pub fn minimize_linear(oracle: &SubmodularOracle, weights: &[f64]) -> LoadVector {
    assert_eq!(weights.len(), oracle.len(), "one weight per element");
    greedy_vertex(oracle, &ascending_order(weights))
}

/// `max { alpha : x + alpha (chi_to - chi_from) in P_rho }`.
pub fn exchange_capacity(
    oracle: &SubmodularOracle,
    x: &LoadVector,
    from: usize,
    to: usize,
) -> Result<f64> {
    let m = oracle.len();
    if from == to || from >= m || to >= m {
        return Err(Error::InvalidSpec(format!("bad exchange pair ({from}, {to})")));
    }
    let slack = slack_table(oracle, x)?;
    check_slack(x, &slack)?;
    let mut cap = x.get(from);
    for u in Subset::all(m).filter(|u| u.contains(to) && !u.contains(from)) {
        cap = cap.min(slack[u.0 as usize]);
    }
    Ok(cap.max(0.0))
}

fn check_slack(x: &LoadVector, slack: &[f64]) -> Result<()> {
    let violation = violation_from_slack(x, slack);
    if violation > DEFAULT_TOL {
        return Err(Error::NotInPolytope { violation });
    }
    Ok(())
}

/// All exchange capacities `c_x(e, e')` at one point, row-major by `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityMatrix {
    m: usize,
    caps: Vec<f64>,
}

impl CapacityMatrix {
    pub fn compute(oracle: &SubmodularOracle, x: &LoadVector) -> Result<Self> {
        let m = oracle.len();
        let slack = slack_table(oracle, x)?;
        check_slack(x, &slack)?;
        let mut caps = vec![f64::INFINITY; m * m];
        let full = Subset::full(m);
        for (u, &s) in slack.iter().enumerate() {
            let u = Subset(u as u64);
            if u.is_empty() || u == full {
                continue;
            }
            let outside = full.difference(u);
            for to in u.iter() {
                for from in outside.iter() {
                    let c = &mut caps[from * m + to];
                    *c = c.min(s);
                }
            }
        }
        for from in 0..m {
            for to in 0..m {
                let c = &mut caps[from * m + to];
                *c = if from == to { 0.0 } else { c.min(x.get(from)).max(0.0) };
            }
        }
        Ok(Self { m, caps })
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.caps[from * self.m + to]
    }

    pub fn size(&self) -> usize {
        self.m
    }
}
