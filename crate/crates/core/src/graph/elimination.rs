use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};

/// Plays the elimination game on a simple graph: eliminating a vertex makes
/// its uneliminated neighbors (through original or fill edges) a clique.
///
/// Returns the fill edges as `(min, max)` pairs.
pub fn elimination_fill(adjacency: &[Vec<usize>], order: &[usize]) -> Result<BTreeSet<(usize, usize)>> {
    let n = adjacency.len();
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: order.len() });
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return Err(Error::InvalidInput("elimination order is not a permutation".into()));
        }
        seen[v] = true;
    }

    let mut adj: Vec<HashSet<usize>> = adjacency
        .iter()
        .enumerate()
        .map(|(v, nbrs)| nbrs.iter().copied().filter(|&u| u != v).collect())
        .collect();
    for (v, nbrs) in adjacency.iter().enumerate() {
        for &u in nbrs {
            if u >= n {
                return Err(Error::InvalidInput(format!("neighbor {u} of {v} out of range")));
            }
            if u != v {
                adj[u].insert(v);
            }
        }
    }

    let mut eliminated = vec![false; n];
    let mut fill = BTreeSet::new();
    for &v in order {
        eliminated[v] = true;
        let mut live: Vec<usize> = adj[v].iter().copied().filter(|&u| !eliminated[u]).collect();
        live.sort_unstable();
        for (k, &a) in live.iter().enumerate() {
            for &b in &live[k + 1..] {
                if adj[a].insert(b) {
                    adj[b].insert(a);
                    fill.insert((a, b));
                }
            }
        }
    }
    Ok(fill)
}
