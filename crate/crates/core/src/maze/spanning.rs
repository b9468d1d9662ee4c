//! Spanning-tree mazes: Wilson, Kruskal and the randomized depth-first backtracker.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::lattice::NodeLattice;
use super::union_find::DisjointSet;
use crate::rng::Rng;

const NONE: usize = usize::MAX;

fn random_neighbor(lattice: &NodeLattice, node: usize, rng: &mut Rng) -> usize {
    let mut buf = [0usize; 4];
    let mut n = 0;
    for nb in lattice.neighbors(node) {
        buf[n] = nb;
        n += 1;
    }
    buf[rng.random_range(0..n)]
}

/// Uniform spanning tree via loop-erased random walks.
pub fn wilson(mut lattice: NodeLattice, rng: &mut Rng) -> NodeLattice {
    let n = lattice.node_count();
    let mut in_tree = vec![false; n];
    let mut next = vec![NONE; n];
    in_tree[rng.random_range(0..n)] = true;
    for origin in 0..n {
        // Walk until hitting the tree; overwriting `next` erases loops.
        let mut u = origin;
        while !in_tree[u] {
            next[u] = random_neighbor(&lattice, u, rng);
            u = next[u];
        }
        u = origin;
        while !in_tree[u] {
            in_tree[u] = true;
            lattice.edges.push((u, next[u]));
            u = next[u];
        }
    }
    lattice
}

/// Random-order edge insertion, rejecting edges that would close a cycle.
pub fn kruskal(mut lattice: NodeLattice, rng: &mut Rng) -> NodeLattice {
    let mut edges = lattice.all_edges();
    edges.shuffle(rng);
    let mut sets = DisjointSet::new(lattice.node_count());
    let target = lattice.node_count() - 1;
    for (a, b) in edges {
        if sets.union(a, b) {
            lattice.edges.push((a, b));
            if lattice.edges.len() == target {
                break;
            }
        }
    }
    lattice
}

/// Randomized depth-first carving with backtracking.
pub fn dfs_backtracker(mut lattice: NodeLattice, rng: &mut Rng) -> NodeLattice {
    let n = lattice.node_count();
    let mut visited = vec![false; n];
    let root = rng.random_range(0..n);
    visited[root] = true;
    let mut stack = vec![root];
    let mut options = Vec::with_capacity(4);
    while let Some(&top) = stack.last() {
        options.clear();
        options.extend(lattice.neighbors(top).filter(|nb| !visited[*nb]));
        if options.is_empty() {
            stack.pop();
            continue;
        }
        let nb = options[rng.random_range(0..options.len())];
        visited[nb] = true;
        lattice.edges.push((top, nb));
        stack.push(nb);
    }
    lattice
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    type Sampler = fn(NodeLattice, &mut Rng) -> NodeLattice;

    #[test]
    fn samplers_build_spanning_trees() {
        let samplers: [Sampler; 3] = [wilson, kruskal, dfs_backtracker];
        for sampler in samplers {
            for seed in 0..20 {
                let lattice = sampler(NodeLattice::for_grid(21, 15), &mut rng_from_seed(seed));
                assert_eq!(lattice.edges.len(), lattice.node_count() - 1);
                let mut sets = DisjointSet::new(lattice.node_count());
                for &(a, b) in &lattice.edges {
                    assert!(sets.union(a, b), "cycle");
                }
            }
        }
    }
}
