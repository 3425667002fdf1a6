use std::collections::HashSet;

use rayon::prelude::*;

use super::Matroid;
use crate::error::{Error, Result};
use crate::ground::Subset;
use crate::matching::perfect_matching;

/// Ground-size limit for base-orderability certification.
pub const ORDERABLE_LIMIT: usize = 12;
/// Base-count limit for base-orderability certification.
pub const BASE_LIMIT: usize = 200;

/// Exchange bijection `g: first -> second`, with `first - e + g(e)` and
/// `second - g(e) + e` both bases for every `e`. Shared elements map to
/// themselves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairBijection {
    pub first: Subset,
    pub second: Subset,
    pub map: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseOrderability {
    /// One bijection per unordered base pair; the reverse pair uses the inverse map.
    Orderable { bijections: Vec<PairBijection> },
    NotOrderable { first: Subset, second: Subset },
}

impl BaseOrderability {
    pub fn is_orderable(&self) -> bool {
        matches!(self, Self::Orderable { .. })
    }
}

/// Decides base orderability by a perfect-matching search per base pair.
pub fn is_base_orderable(m: &Matroid) -> Result<BaseOrderability> {
    let size = m.ground().len();
    if size > ORDERABLE_LIMIT {
        return Err(Error::GroundTooLarge { size, limit: ORDERABLE_LIMIT });
    }
    let bases = m.enumerate_bases()?;
    if bases.len() > BASE_LIMIT {
        return Err(Error::TooManyBases { count: bases.len(), limit: BASE_LIMIT });
    }
    let lookup: HashSet<Subset> = bases.iter().copied().collect();
    let pairs: Vec<(usize, usize)> =
        (0..bases.len()).flat_map(|i| (i + 1..bases.len()).map(move |j| (i, j))).collect();
    let found: Vec<Option<PairBijection>> = pairs
        .par_iter()
        .map(|&(i, j)| exchange_bijection(bases[i], bases[j], &lookup))
        .collect();
    let mut bijections = Vec::with_capacity(found.len());
    for (&(i, j), b) in pairs.iter().zip(found) {
        match b {
            Some(b) => bijections.push(b),
            None => return Ok(BaseOrderability::NotOrderable { first: bases[i], second: bases[j] }),
        }
    }
    Ok(BaseOrderability::Orderable { bijections })
}

fn exchange_bijection(b1: Subset, b2: Subset, bases: &HashSet<Subset>) -> Option<PairBijection> {
    let left: Vec<usize> = b1.difference(b2).iter().collect();
    let right: Vec<usize> = b2.difference(b1).iter().collect();
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|&e| {
            (0..right.len())
                .filter(|&k| {
                    let f = right[k];
                    bases.contains(&b1.without(e).with(f)) && bases.contains(&b2.without(f).with(e))
                })
                .collect()
        })
        .collect();
    let matched = perfect_matching(&adj)?;
    let mut map: Vec<(usize, usize)> = b1.intersection(b2).iter().map(|e| (e, e)).collect();
    map.extend(left.iter().zip(matched).map(|(&e, k)| (e, right[k])));
    map.sort_unstable();
    Some(PairBijection { first: b1, second: b2, map })
}
