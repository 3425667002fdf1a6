//! Maximum bipartite matching by augmenting paths.

/// Maximum matching between `left` vertices `0..adj.len()` and right
/// vertices `0..right`. Returns, for each left vertex, its partner.
pub fn maximum_matching(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; right];
    for u in 0..adj.len() {
        let mut seen = vec![false; right];
        augment(u, adj, &mut match_right, &mut seen);
    }
    let mut match_left = vec![None; adj.len()];
    for (v, u) in match_right.iter().enumerate() {
        if let Some(u) = *u {
            match_left[u] = Some(v);
        }
    }
    match_left
}

fn augment(u: usize, adj: &[Vec<usize>], match_right: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &v in &adj[u] {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if match_right[v].is_none_or(|w| augment(w, adj, match_right, seen)) {
            match_right[v] = Some(u);
            return true;
        }
    }
    false
}

pub fn matching_size(adj: &[Vec<usize>], right: usize) -> usize {
    maximum_matching(adj, right).iter().flatten().count()
}

/// A perfect matching of a square bipartite graph, if one exists.
pub fn perfect_matching(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    maximum_matching(adj, adj.len()).into_iter().collect()
}
