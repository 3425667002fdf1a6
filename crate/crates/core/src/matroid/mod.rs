//! Matroid classes with per-class rank oracles.
//!
//! Inclusions between the classes built here:
//! uniform ⊂ partition ⊂ {laminar, transversal} ⊂ gammoid ⊂ base orderable,
//! and graphic matroids of graphs without a K4 minor are gammoids.

mod gammoid;
mod graph;
mod json;
mod laminar;
mod orderable;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use gammoid::GammoidSpec;
pub use graph::{GraphEdge, MultiGraph};
pub use json::{Block, MatroidSpec};
pub use laminar::{laminar_to_gammoid, LaminarFamily};
pub use orderable::{is_base_orderable, BaseOrderability, PairBijection, BASE_LIMIT, ORDERABLE_LIMIT};

use crate::error::{Error, Result};
use crate::ground::{GroundSet, Subset};
use crate::matching::matching_size;
use crate::polymatroid::SubmodularOracle;

/// Ground-size limit for base enumeration and the axiom suite.
pub const BASES_LIMIT: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatroidClass {
    Uniform,
    Partition,
    Laminar,
    Transversal,
    Graphic,
    Gammoid,
    Explicit,
}

impl fmt::Display for MatroidClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Uniform => "uniform",
            Self::Partition => "partition",
            Self::Laminar => "laminar",
            Self::Transversal => "transversal",
            Self::Graphic => "graphic",
            Self::Gammoid => "gammoid",
            Self::Explicit => "explicit",
        };
        f.write_str(s)
    }
}

type RankFn = dyn Fn(Subset) -> usize + Send + Sync;

/// A matroid given by its rank oracle. Independence is `rank(U) == |U|`.
#[derive(Clone)]
pub struct Matroid {
    ground: GroundSet,
    class: MatroidClass,
    rank_fn: Arc<RankFn>,
}

impl fmt::Debug for Matroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matroid")
            .field("class", &self.class)
            .field("ground", &self.ground)
            .field("rank", &self.full_rank())
            .finish()
    }
}

impl Matroid {
    pub(crate) fn from_rank<F>(ground: GroundSet, class: MatroidClass, rank: F) -> Self
    where
        F: Fn(Subset) -> usize + Send + Sync + 'static,
    {
        Self { ground, class, rank_fn: Arc::new(rank) }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn class(&self) -> MatroidClass {
        self.class
    }

    pub fn rank(&self, s: Subset) -> usize {
        (self.rank_fn)(s)
    }

    pub fn full_rank(&self) -> usize {
        self.rank(self.ground.full())
    }

    pub fn is_independent(&self, s: Subset) -> bool {
        self.rank(s) == s.len()
    }

    pub fn is_base(&self, s: Subset) -> bool {
        s.len() == self.full_rank() && self.is_independent(s)
    }

    /// The rank function as a polymatroid oracle.
    pub fn rank_oracle(&self) -> SubmodularOracle {
        let rank = Arc::clone(&self.rank_fn);
        SubmodularOracle::from_fn(&self.ground, move |s| rank(s) as f64)
    }

    /// `U_{k,m}` on default element names.
    pub fn uniform(m: usize, k: usize) -> Result<Self> {
        Self::uniform_on(&GroundSet::with_default_names(m)?, k)
    }

    pub fn uniform_on(ground: &GroundSet, k: usize) -> Result<Self> {
        Ok(Self::from_rank(ground.clone(), MatroidClass::Uniform, move |s| s.len().min(k)))
    }

    /// Disjoint blocks with capacities; the ground set is the union of the blocks.
    pub fn partition<S: AsRef<str>>(blocks: &[(Vec<S>, usize)]) -> Result<Self> {
        let ground = GroundSet::new(
            blocks.iter().flat_map(|(b, _)| b.iter().map(|s| s.as_ref().to_string())),
        )
        .map_err(|e| match e {
            Error::InvalidSpec(msg) => Error::InvalidSpec(format!("partition blocks overlap: {msg}")),
            other => other,
        })?;
        let blocks: Vec<(Subset, usize)> = blocks
            .iter()
            .map(|(b, cap)| Ok((ground.subset(b)?, *cap)))
            .collect::<Result<_>>()?;
        Ok(Self::from_rank(ground, MatroidClass::Partition, move |s| {
            blocks.iter().map(|&(b, cap)| s.intersection(b).len().min(cap)).sum()
        }))
    }

    pub fn laminar(family: &LaminarFamily) -> Self {
        let fam = family.clone();
        Self::from_rank(family.ground().clone(), MatroidClass::Laminar, move |s| fam.rank(s))
    }

    /// Transversal matroid of a family of sets: `U` is independent when it can
    /// be matched into distinct sets.
    pub fn transversal<S: AsRef<str>>(sets: &[Vec<S>]) -> Result<Self> {
        let mut names: Vec<String> =
            sets.iter().flat_map(|t| t.iter().map(|s| s.as_ref().to_string())).collect();
        names.sort();
        names.dedup();
        let ground = GroundSet::new(names)?;
        let sets: Vec<Subset> = sets.iter().map(|t| ground.subset(t)).collect::<Result<_>>()?;
        let m = ground.len();
        Ok(Self::from_rank(ground, MatroidClass::Transversal, move |s| {
            let mut adj = vec![Vec::new(); m];
            for e in s.iter() {
                adj[e] = (0..sets.len()).filter(|&j| sets[j].contains(e)).collect();
            }
            matching_size(&adj, sets.len())
        }))
    }

    pub fn graphic(g: &MultiGraph) -> Result<Self> {
        g.graphic_matroid()
    }

    pub fn gammoid(spec: &GammoidSpec) -> Result<Self> {
        spec.matroid()
    }

    /// Matroid given by its list of bases; validated with the base-exchange axiom.
    pub fn explicit<S: AsRef<str>>(elements: &[S], bases: &[Vec<S>]) -> Result<Self> {
        let ground = GroundSet::new(elements.iter().map(|s| s.as_ref().to_string()))?;
        let bases: Vec<Subset> = bases.iter().map(|b| ground.subset(b)).collect::<Result<_>>()?;
        if !is_base_family(&bases) {
            return Err(Error::InvalidSpec("bases violate the base-exchange axiom".into()));
        }
        Ok(Self::from_rank(ground, MatroidClass::Explicit, move |s| {
            bases.iter().map(|b| b.intersection(s).len()).max().unwrap_or(0)
        }))
    }

    /// All bases, lexicographically sorted.
    pub fn enumerate_bases(&self) -> Result<Vec<Subset>> {
        let m = self.ground.len();
        if m > BASES_LIMIT {
            return Err(Error::GroundTooLarge { size: m, limit: BASES_LIMIT });
        }
        let r = self.full_rank();
        let mut bases: Vec<Subset> =
            Subset::all(m).filter(|s| s.len() == r && self.rank(*s) == r).collect();
        bases.sort_by(|a, b| a.lex_cmp(*b));
        Ok(bases)
    }

    /// Exhaustive check of the rank axioms. Returns a description of the first
    /// violation, if any.
    pub fn check_axioms(&self) -> Result<Option<String>> {
        let m = self.ground.len();
        if m > BASES_LIMIT {
            return Err(Error::GroundTooLarge { size: m, limit: BASES_LIMIT });
        }
        let rank: Vec<usize> = Subset::all(m).map(|s| self.rank(s)).collect();
        let name = |s: Subset| self.ground.subset_names(s).join(",");
        if rank[0] != 0 {
            return Ok(Some("rank of the empty set is not 0".into()));
        }
        for u in Subset::all(m) {
            let ru = rank[u.0 as usize];
            if ru > u.len() {
                return Ok(Some(format!("rank({{{}}}) = {ru} exceeds cardinality", name(u))));
            }
            for e in (0..m).filter(|&e| !u.contains(e)) {
                let re = rank[u.with(e).0 as usize];
                if re < ru || re > ru + 1 {
                    return Ok(Some(format!(
                        "rank jumps from {ru} to {re} adding {} to {{{}}}",
                        self.ground.name(e),
                        name(u)
                    )));
                }
                for f in (e + 1..m).filter(|&f| !u.contains(f)) {
                    let rf = rank[u.with(f).0 as usize];
                    let ref_ = rank[u.with(e).with(f).0 as usize];
                    if re + rf < ref_ + ru {
                        return Ok(Some(format!(
                            "rank not submodular on {{{}}} and {{{}}}",
                            name(u.with(e)),
                            name(u.with(f))
                        )));
                    }
                }
            }
        }
        Ok(None)
    }
}

/// True iff `sets` is the base family of a matroid: nonempty, equicardinal,
/// and closed under base exchange.
pub fn is_base_family(sets: &[Subset]) -> bool {
    let Some(first) = sets.first() else {
        return false;
    };
    if sets.iter().any(|s| s.len() != first.len()) {
        return false;
    }
    let lookup: std::collections::HashSet<Subset> = sets.iter().copied().collect();
    sets.iter().all(|&b1| {
        sets.iter().all(|&b2| {
            b1.difference(b2).iter().all(|e| {
                b2.difference(b1).iter().any(|f| lookup.contains(&b1.without(e).with(f)))
            })
        })
    })
}
