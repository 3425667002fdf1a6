use super::gammoid::GammoidSpec;
use crate::error::{Error, Result};
use crate::ground::{GroundSet, Subset};

/// A laminar family of capacitated sets. `I` is independent in the laminar
/// matroid iff `|I ∩ X| <= cap(X)` for every member `X`.
#[derive(Clone, Debug)]
pub struct LaminarFamily {
    ground: GroundSet,
    /// Members sorted by `(size, input position)`; children precede parents.
    sets: Vec<Subset>,
    caps: Vec<usize>,
    parent: Vec<Option<usize>>,
    /// Elements of a member not covered by any of its children.
    own: Vec<Subset>,
    /// Elements not covered by any member.
    free: Subset,
}

impl LaminarFamily {
    /// The ground set is the union of the members plus `extra` elements.
    pub fn new<S: AsRef<str>>(family: &[(Vec<S>, usize)], extra: &[S]) -> Result<Self> {
        let mut names: Vec<String> = family
            .iter()
            .flat_map(|(s, _)| s.iter().map(|x| x.as_ref().to_string()))
            .chain(extra.iter().map(|x| x.as_ref().to_string()))
            .collect();
        names.sort();
        names.dedup();
        let ground = GroundSet::new(names)?;
        let mut members: Vec<(Subset, usize, usize)> = family
            .iter()
            .enumerate()
            .map(|(pos, (s, cap))| Ok((ground.subset(s)?, *cap, pos)))
            .collect::<Result<_>>()?;
        for (i, a) in members.iter().enumerate() {
            if a.0.is_empty() {
                return Err(Error::InvalidSpec("laminar family member is empty".into()));
            }
            for b in &members[i + 1..] {
                let meet = a.0.intersection(b.0);
                if !meet.is_empty() && meet != a.0 && meet != b.0 {
                    return Err(Error::NotLaminar {
                        first: ground.subset_names(a.0),
                        second: ground.subset_names(b.0),
                    });
                }
            }
        }
        members.sort_by_key(|&(s, _, pos)| (s.len(), pos));
        let sets: Vec<Subset> = members.iter().map(|m| m.0).collect();
        let caps = members.iter().map(|m| m.1).collect();
        let parent: Vec<Option<usize>> = (0..sets.len())
            .map(|i| (i + 1..sets.len()).find(|&j| sets[i].is_subset_of(sets[j])))
            .collect();
        let mut own = sets.clone();
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                own[p] = own[p].difference(sets[i]);
            }
        }
        let covered = sets.iter().fold(Subset::EMPTY, |acc, s| acc.union(*s));
        let free = ground.full().difference(covered);
        Ok(Self { ground, sets, caps, parent, own, free })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Members with capacities, children before parents.
    pub fn members(&self) -> impl Iterator<Item = (Subset, usize)> + '_ {
        self.sets.iter().copied().zip(self.caps.iter().copied())
    }

    pub(crate) fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    /// Rank by bottom-up recursion over the family tree:
    /// `r(X) = min(cap(X), |U ∩ own(X)| + sum over children r(child))`.
    pub fn rank(&self, u: Subset) -> usize {
        let mut child_sum = vec![0usize; self.sets.len()];
        let mut top = u.intersection(self.free).len();
        for i in 0..self.sets.len() {
            let r = self.caps[i].min(u.intersection(self.own[i]).len() + child_sum[i]);
            match self.parent[i] {
                Some(p) => child_sum[p] += r,
                None => top += r,
            }
        }
        top
    }

    /// Independence straight from the definition.
    pub fn is_independent(&self, u: Subset) -> bool {
        self.members().all(|(x, cap)| u.intersection(x).len() <= cap)
    }
}

/// Gammoid representing the same matroid as a laminar family.
///
/// Every member `X` is copied `cap(X)` times. Each element has arcs into the
/// copies of the smallest member containing it, and each copy of `X` has
/// arcs into the copies of the smallest member strictly containing `X`.
/// The terminals are the copies of the whole ground set, which is added with
/// capacity `|E|` when the family does not contain it. A path from an
/// element therefore passes through one copy of every member containing it,
/// so vertex-disjoint linkages respect every capacity.
pub fn laminar_to_gammoid(family: &LaminarFamily) -> GammoidSpec {
    let ground = family.ground();
    let full = ground.full();
    let mut sets: Vec<(Subset, usize)> = family.members().collect();
    let mut parent: Vec<Option<usize>> = (0..sets.len()).map(|i| family.parent(i)).collect();
    let root = match sets.iter().rposition(|&(s, _)| s == full) {
        Some(r) => r,
        None => {
            let r = sets.len();
            for p in parent.iter_mut().filter(|p| p.is_none()) {
                *p = Some(r);
            }
            sets.push((full, ground.len()));
            parent.push(None);
            r
        }
    };

    let copy_name = |i: usize, j: usize| {
        format!("{{{}}}#{}", ground.subset_names(sets[i].0).join(","), j + 1)
    };
    // identical members would otherwise get identical copy names
    let label = |i: usize, j: usize| format!("{}@{}", copy_name(i, j), i);

    let mut vertices: Vec<String> = ground.names().to_vec();
    let mut copies: Vec<Vec<String>> = Vec::with_capacity(sets.len());
    for (i, &(_, cap)) in sets.iter().enumerate() {
        let names: Vec<String> = (0..cap).map(|j| label(i, j)).collect();
        vertices.extend(names.iter().cloned());
        copies.push(names);
    }

    let mut arcs = Vec::new();
    for e in 0..ground.len() {
        let smallest = (0..sets.len()).find(|&i| sets[i].0.contains(e)).expect("root contains e");
        for c in &copies[smallest] {
            arcs.push((ground.name(e).to_string(), c.clone()));
        }
    }
    for (i, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            for a in &copies[i] {
                for b in &copies[p] {
                    arcs.push((a.clone(), b.clone()));
                }
            }
        }
    }
    GammoidSpec::new(vertices, arcs, ground.names().to_vec(), copies[root].clone())
        .expect("construction yields a well-formed gammoid")
}
