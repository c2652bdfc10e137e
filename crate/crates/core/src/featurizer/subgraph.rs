use crate::molgraph::{bfs_distances, AtomNode, BondOrder, DistanceTable, MolecularGraph};

/// Induced neighborhood of a root atom. Local node 0 is the root; nodes are
/// ordered by hop distance from the root, then by index in the source graph.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedSubgraph {
    pub height: u32,
    pub nodes: Vec<AtomNode>,
    /// Hop distance of each local node from the root.
    pub depth: Vec<u32>,
    /// Source-graph index of each local node.
    pub origin: Vec<usize>,
    /// Induced bonds in local indices, `a < b`.
    pub bonds: Vec<(usize, usize, BondOrder)>,
}

impl RootedSubgraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// All nodes within `height` hops of `root`, with every bond of `g` whose
/// endpoints are both inside.
pub fn neighborhood_subgraph(g: &MolecularGraph, root: usize, height: u32) -> RootedSubgraph {
    let dist = bfs_distances(g, root, Some(height));
    neighborhood_from_distances(g, root, height, &dist)
}

/// Same as [`neighborhood_subgraph`] given precomputed hop distances from `root`.
pub fn neighborhood_from_distances(
    g: &MolecularGraph,
    root: usize,
    height: u32,
    dist: &[u32],
) -> RootedSubgraph {
    debug_assert_eq!(dist[root], 0);
    let mut members: Vec<usize> = (0..g.node_count())
        .filter(|&v| dist[v] != DistanceTable::UNREACHABLE && dist[v] <= height)
        .collect();
    members.sort_by_key(|&v| (dist[v], v));
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, &v) in members.iter().enumerate() {
        local[v] = i;
    }
    let mut bonds: Vec<(usize, usize, BondOrder)> = g
        .bonds()
        .iter()
        .filter(|b| local[b.a] != usize::MAX && local[b.b] != usize::MAX)
        .map(|b| {
            let (x, y) = (local[b.a], local[b.b]);
            (x.min(y), x.max(y), b.order)
        })
        .collect();
    bonds.sort();
    RootedSubgraph {
        height,
        nodes: members.iter().map(|&v| g.node(v).clone()).collect(),
        depth: members.iter().map(|&v| dist[v]).collect(),
        origin: members,
        bonds,
    }
}
