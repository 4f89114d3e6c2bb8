//! Minimum-degree fill-reducing ordering on the explicit elimination graph.
//!
//! Eliminating a node turns its remaining neighbourhood into a clique; the
//! neighbourhood at elimination time is exactly the below-diagonal pattern of
//! the corresponding Cholesky column, so the symbolic factorization falls out
//! of the ordering for free.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::sparse::CsrMatrix;

pub(crate) struct Elimination {
    /// `order[k]` is the original index of the k-th eliminated node.
    pub order: Vec<usize>,
    /// Uneliminated neighbours of each original node when it was eliminated.
    pub reach: Vec<Vec<usize>>,
}

/// Symmetric pattern of `A + A^T` without the diagonal, rows sorted.
fn symmetric_adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    adj
}

/// Sorted union of `a` and `b`, dropping `skip_a` and `skip_b`.
fn merge_excluding(a: &[usize], b: &[usize], skip_a: usize, skip_b: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if next != skip_a && next != skip_b {
            out.push(next);
        }
    }
    out
}

pub(crate) fn eliminate(a: &CsrMatrix) -> Elimination {
    let n = a.nrows();
    let mut adj = symmetric_adjacency(a);
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut reach = vec![Vec::new(); n];

    // ties broken by smallest index so the ordering is deterministic
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        adj.iter().enumerate().map(|(v, nb)| Reverse((nb.len(), v))).collect();

    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || adj[v].len() != deg {
            continue;
        }
        eliminated[v] = true;
        order.push(v);
        let nbrs = std::mem::take(&mut adj[v]);
        for &u in &nbrs {
            let merged = merge_excluding(&adj[u], &nbrs, v, u);
            adj[u] = merged;
            heap.push(Reverse((adj[u].len(), u)));
        }
        reach[v] = nbrs;
    }
    debug_assert_eq!(order.len(), n);
    Elimination { order, reach }
}

/// Minimum-degree elimination order: `perm[k]` is the original index placed at position `k`.
pub fn minimum_degree(a: &CsrMatrix) -> Vec<usize> {
    eliminate(a).order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_a_permutation() {
        let mut trip = Vec::new();
        for i in 0..20 {
            trip.push((i, i, 4.0));
            if i + 1 < 20 {
                trip.push((i, i + 1, -1.0));
                trip.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(20, 20, &trip).unwrap();
        let mut p = minimum_degree(&a);
        p.sort_unstable();
        assert_eq!(p, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn arrow_matrix_hub_is_deferred() {
        // node 0 couples to everyone; eliminating it first would fill the whole matrix
        let n = 6;
        let mut trip: Vec<_> = (0..n).map(|i| (i, i, 10.0)).collect();
        for i in 1..n {
            trip.push((0, i, 1.0));
            trip.push((i, 0, 1.0));
        }
        let a = CsrMatrix::from_triplets(n, n, &trip).unwrap();
        let elim = eliminate(&a);
        // the hub ties with the final leaf once everything else is gone
        assert!(elim.order[n - 2..].contains(&0));
        // no fill: each leaf only sees the hub
        for v in 1..n {
            assert!(elim.reach[v].len() <= 1);
        }
    }

    #[test]
    fn merge_excludes_requested_nodes() {
        assert_eq!(merge_excluding(&[1, 3, 5], &[2, 3, 6], 5, 6), vec![1, 2, 3]);
    }
}
