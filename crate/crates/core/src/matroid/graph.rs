use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Matroid, MatroidClass};
use crate::error::{Error, Result};
use crate::ground::{DisjointSets, GroundSet};

const MINOR_VERTEX_LIMIT: usize = 12;
const MINOR_EDGE_LIMIT: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub id: String,
    pub u: String,
    pub v: String,
}

/// Undirected multigraph with named edges; parallel edges and loops allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    vertices: Vec<String>,
    edges: Vec<GraphEdge>,
    endpoints: Vec<(usize, usize)>,
}

impl MultiGraph {
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S, S)]) -> Result<Self> {
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let vertex_index = |name: &str| {
            vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::InvalidSpec(format!("edge endpoint {name:?} is not a vertex")))
        };
        let mut seen_vertices = BTreeSet::new();
        if let Some(v) = vertices.iter().find(|v| !seen_vertices.insert(v.as_str())) {
            return Err(Error::InvalidSpec(format!("duplicate vertex {v:?}")));
        }
        let mut ids = BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        let mut endpoints = Vec::with_capacity(edges.len());
        for (id, u, v) in edges {
            let (id, u, v) = (id.as_ref(), u.as_ref(), v.as_ref());
            if !ids.insert(id.to_string()) {
                return Err(Error::InvalidSpec(format!("duplicate edge id {id:?}")));
            }
            endpoints.push((vertex_index(u)?, vertex_index(v)?));
            out.push(GraphEdge { id: id.into(), u: u.into(), v: v.into() });
        }
        Ok(Self { vertices, edges: out, endpoints })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// Complete graph on `n` vertices `v1..vn`, edges `e1, e2, ...`.
    pub fn complete(n: usize) -> Self {
        let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((format!("e{}", edges.len() + 1), vertices[i].clone(), vertices[j].clone()));
            }
        }
        Self::new(&vertices, &edges).expect("complete graph is well formed")
    }

    /// Cycle `v1 - v2 - ... - vn - v1`, edge `c{i}` joins `v_i` and `v_{i+1}`.
    pub fn cycle(n: usize) -> Self {
        let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let edges: Vec<(String, String, String)> = (0..n)
            .map(|i| (format!("c{}", i + 1), vertices[i].clone(), vertices[(i + 1) % n].clone()))
            .collect();
        Self::new(&vertices, &edges).expect("cycle is well formed")
    }

    /// Graphic matroid on the edge set.
    pub fn graphic_matroid(&self) -> Result<Matroid> {
        let ground = GroundSet::new(self.edges.iter().map(|e| e.id.clone()))?;
        // ground is sorted; map ground index -> endpoints
        let ends: Vec<(usize, usize)> = ground
            .names()
            .iter()
            .map(|id| self.endpoints[self.edges.iter().position(|e| &e.id == id).unwrap()])
            .collect();
        let n = self.vertices.len();
        Ok(Matroid::from_rank(ground, MatroidClass::Graphic, move |s| {
            let mut dsu = DisjointSets::new(n);
            s.iter().filter(|&e| dsu.union(ends[e].0, ends[e].1)).count()
        }))
    }

    /// Adjacency sets of the underlying simple graph (loops and parallels dropped).
    pub(crate) fn simple_adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.vertices.len()];
        for &(u, v) in &self.endpoints {
            if u != v {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
        adj
    }

    /// Whether the graph has a K4 minor.
    ///
    /// Repeatedly deletes vertices of degree at most one and suppresses
    /// vertices of degree two (joining their neighbours) in the simple
    /// quotient. A graph reduces to nothing this way exactly when it has
    /// no K4 minor; otherwise the remainder has minimum degree three and so
    /// contains a K4 minor.
    pub fn has_k4_minor(&self) -> Result<bool> {
        if self.vertices.len() > MINOR_VERTEX_LIMIT || self.edges.len() > MINOR_EDGE_LIMIT {
            return Err(Error::GraphTooLarge { vertices: self.vertices.len(), edges: self.edges.len() });
        }
        let mut adj = self.simple_adjacency();
        let mut alive: BTreeSet<usize> = (0..adj.len()).collect();
        loop {
            let Some(&v) = alive.iter().find(|&&v| adj[v].len() <= 2) else {
                return Ok(!alive.is_empty());
            };
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            for &w in &nbrs {
                adj[w].remove(&v);
            }
            adj[v].clear();
            if let [a, b] = nbrs[..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
            alive.remove(&v);
        }
    }

    /// Generalized series-parallel: no K4 minor.
    pub fn is_gsp(&self) -> Result<bool> {
        Ok(!self.has_k4_minor()?)
    }

    /// Edge ids of every hop on a shortest vertex path from `s` to `t`,
    /// parallel edges grouped per hop. In a forest the path is unique.
    pub fn path_hops(&self, s: &str, t: &str) -> Result<Vec<Vec<String>>> {
        let index = |name: &str| {
            self.vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown vertex {name:?}")))
        };
        let (s, t) = (index(s)?, index(t)?);
        let adj = self.simple_adjacency();
        let mut prev = vec![usize::MAX; adj.len()];
        prev[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return Err(Error::InvalidSpec(format!("{:?} and {:?} are not connected", self.vertices[s], self.vertices[t])));
        }
        let mut hops = Vec::new();
        let mut v = t;
        while v != s {
            let u = prev[v];
            let ids = self
                .edges
                .iter()
                .zip(&self.endpoints)
                .filter(|(_, &(a, b))| (a, b) == (u, v) || (a, b) == (v, u))
                .map(|(e, _)| e.id.clone())
                .collect();
            hops.push(ids);
            v = u;
        }
        hops.reverse();
        Ok(hops)
    }

    /// True iff the simple quotient is a forest, i.e. there is no cycle
    /// through three or more distinct vertices.
    pub fn simple_quotient_is_forest(&self) -> bool {
        let adj = self.simple_adjacency();
        let mut dsu = DisjointSets::new(adj.len());
        adj.iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .all(|(u, v)| dsu.union(u, v))
    }
}
