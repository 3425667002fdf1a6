//! Integer max-flow (Dinic) used for transshipment feasibility and gammoid
//! linkages.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: i64,
}

/// Directed network with integer capacities. Edge `2k` is the `k`-th added
/// arc, edge `2k + 1` its residual twin.
#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    original: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        Self { edges: Vec::new(), original: Vec::new(), adj: vec![Vec::new(); n] }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds arc `u -> v` and returns its id.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64) -> usize {
        debug_assert!(cap >= 0);
        let id = self.edges.len();
        self.edges.push(Edge { to: v, cap });
        self.edges.push(Edge { to: u, cap: 0 });
        self.original.push(cap);
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id / 2
    }

    /// Flow currently routed on arc `id`.
    pub fn flow(&self, id: usize) -> i64 {
        self.original[id] - self.edges[2 * id].cap
    }

    pub fn endpoints(&self, id: usize) -> (usize, usize) {
        (self.edges[2 * id + 1].to, self.edges[2 * id].to)
    }

    pub fn arc_count(&self) -> usize {
        self.original.len()
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let n = self.node_count();
        let mut total = 0;
        loop {
            let level = self.levels(s);
            if level[t] < 0 {
                return total;
            }
            let mut it = vec![0usize; n];
            loop {
                let pushed = self.augment(s, t, i64::MAX, &level, &mut it);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn levels(&self, s: usize) -> Vec<i32> {
        let mut level = vec![-1; self.node_count()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &id in &self.adj[u] {
                let e = &self.edges[id];
                if e.cap > 0 && level[e.to] < 0 {
                    level[e.to] = level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        level
    }

    fn augment(&mut self, u: usize, t: usize, limit: i64, level: &[i32], it: &mut [usize]) -> i64 {
        if u == t {
            return limit;
        }
        while it[u] < self.adj[u].len() {
            let id = self.adj[u][it[u]];
            let (to, cap) = (self.edges[id].to, self.edges[id].cap);
            if cap > 0 && level[to] == level[u] + 1 {
                let pushed = self.augment(to, t, limit.min(cap), level, it);
                if pushed > 0 {
                    self.edges[id].cap -= pushed;
                    self.edges[id ^ 1].cap += pushed;
                    return pushed;
                }
            }
            it[u] += 1;
        }
        0
    }

    /// Nodes reachable from `s` in the residual network. After `max_flow` this
    /// is the source side of a minimum cut.
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l >= 0).collect()
    }
}
