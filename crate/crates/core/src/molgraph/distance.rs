use std::collections::VecDeque;

use super::graph::MolecularGraph;

/// Dense all-pairs hop-count table. Unreachable pairs hold [`DistanceTable::UNREACHABLE`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    n: usize,
    data: Vec<u32>,
}

impl DistanceTable {
    pub const UNREACHABLE: u32 = u32::MAX;

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    pub fn reachable(&self, i: usize, j: usize) -> bool {
        self.get(i, j) != Self::UNREACHABLE
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Hop distances from `root`, stopping at `limit` hops when given.
pub fn bfs_distances(g: &MolecularGraph, root: usize, limit: Option<u32>) -> Vec<u32> {
    let mut dist = vec![DistanceTable::UNREACHABLE; g.node_count()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u];
        if limit.is_some_and(|l| d >= l) {
            continue;
        }
        for &(v, _) in g.neighbors(u) {
            if dist[v] == DistanceTable::UNREACHABLE {
                dist[v] = d + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Breadth-first search from every node; bond orders are ignored.
pub fn all_pairs_distances(g: &MolecularGraph) -> DistanceTable {
    let n = g.node_count();
    let mut data = Vec::with_capacity(n * n);
    for root in 0..n {
        data.extend(bfs_distances(g, root, None));
    }
    DistanceTable { n, data }
}
