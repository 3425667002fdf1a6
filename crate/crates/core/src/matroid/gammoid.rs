use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Matroid, MatroidClass};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::ground::GroundSet;

/// Digraph with a ground set of starting vertices and a set of terminal
/// vertices. `X ⊆ ground` is independent iff `|X|` vertex-disjoint directed
/// paths link `X` into `targets`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammoidSpec {
    pub vertices: Vec<String>,
    pub arcs: Vec<(String, String)>,
    pub ground: Vec<String>,
    #[serde(alias = "sources")]
    pub targets: Vec<String>,
}

impl GammoidSpec {
    pub fn new(
        vertices: Vec<String>,
        arcs: Vec<(String, String)>,
        ground: Vec<String>,
        targets: Vec<String>,
    ) -> Result<Self> {
        let spec = Self { vertices, arcs, ground, targets };
        spec.resolve()?;
        Ok(spec)
    }

    fn resolve(&self) -> Result<Resolved> {
        let mut index = HashMap::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if index.insert(v.as_str(), i).is_some() {
                return Err(Error::InvalidSpec(format!("duplicate gammoid vertex {v:?}")));
            }
        }
        let lookup = |v: &str| {
            index
                .get(v)
                .copied()
                .ok_or_else(|| Error::InvalidSpec(format!("unknown gammoid vertex {v:?}")))
        };
        let arcs = self
            .arcs
            .iter()
            .map(|(u, v)| Ok((lookup(u)?, lookup(v)?)))
            .collect::<Result<Vec<_>>>()?;
        let ground = GroundSet::new(self.ground.iter().cloned())?;
        let element_vertex =
            ground.names().iter().map(|n| lookup(n)).collect::<Result<Vec<_>>>()?;
        let mut targets = self.targets.iter().map(|t| lookup(t)).collect::<Result<Vec<_>>>()?;
        targets.sort_unstable();
        targets.dedup();
        Ok(Resolved { n: self.vertices.len(), arcs, ground, element_vertex, targets })
    }

    pub fn matroid(&self) -> Result<Matroid> {
        let r = self.resolve()?;
        let ground = r.ground.clone();
        Ok(Matroid::from_rank(ground, MatroidClass::Gammoid, move |s| {
            // vertex v is split into 2v -> 2v+1 with unit capacity
            let n = r.n;
            let (src, sink) = (2 * n, 2 * n + 1);
            let mut net = FlowNetwork::new(2 * n + 2);
            for v in 0..n {
                net.add_edge(2 * v, 2 * v + 1, 1);
            }
            for &(u, v) in &r.arcs {
                net.add_edge(2 * u + 1, 2 * v, 1);
            }
            for e in s.iter() {
                net.add_edge(src, 2 * r.element_vertex[e], 1);
            }
            for &t in &r.targets {
                net.add_edge(2 * t + 1, sink, 1);
            }
            net.max_flow(src, sink) as usize
        }))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph gammoid {\n  rankdir=LR;\n");
        for v in &self.vertices {
            let shape = if self.targets.contains(v) {
                "doublecircle"
            } else if self.ground.contains(v) {
                "box"
            } else {
                "circle"
            };
            let _ = writeln!(out, "  {v:?} [shape={shape}];");
        }
        for (u, v) in &self.arcs {
            let _ = writeln!(out, "  {u:?} -> {v:?};");
        }
        out.push_str("}\n");
        out
    }
}

struct Resolved {
    n: usize,
    arcs: Vec<(usize, usize)>,
    ground: GroundSet,
    element_vertex: Vec<usize>,
    targets: Vec<usize>,
}
