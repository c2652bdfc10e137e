//! Canonical form of rooted, labeled neighborhood subgraphs.
//!
//! Colors start from (depth, node label) and are refined by the multiset of
//! (neighbor color, bond order) until stable. Remaining ties are resolved by
//! individualization: every member of the first non-singleton cell is tried
//! in turn and the lexicographically smallest adjacency code over all
//! discrete leaves wins. Automorphisms discovered at equal leaves prune
//! branches that lie in the same orbit of the stabilizer of the current
//! prefix.

use std::cmp::Ordering;

use super::subgraph::RootedSubgraph;
use super::FeatureError;

/// Largest neighborhood that will be canonicalized.
pub const MAX_SUBGRAPH_NODES: usize = 64;

/// Canonical identity of a rooted neighborhood subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    /// Node labels in canonical order (root first), `;`, then bonds as
    /// `<i><order><j>` with `i < j`, comma-separated and sorted.
    pub key: String,
    pub height: u32,
    /// Daltons, including folded hydrogens.
    pub mass: f64,
}

pub fn subgraph_mass(sig: &Signature) -> f64 {
    sig.mass
}

type Coloring = Vec<u32>;

struct Canonizer {
    n: usize,
    adjacency: Vec<Vec<(usize, u8)>>,
    best_code: Option<Vec<u32>>,
    best_order: Vec<usize>,
    automorphisms: Vec<Vec<usize>>,
}

fn bond_code(c: char) -> u8 {
    match c {
        '-' => 1,
        '=' => 2,
        '#' => 3,
        _ => 4,
    }
}

fn rank_by<K: Ord>(keys: &[K]) -> Coloring {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(&k).expect("key present") as u32)
        .collect()
}

fn cell_count(colors: &Coloring) -> usize {
    let mut seen: Vec<u32> = colors.clone();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

impl Canonizer {
    fn refine(&self, mut colors: Coloring) -> Coloring {
        let mut cells = cell_count(&colors);
        loop {
            let keys: Vec<(u32, Vec<(u32, u8)>)> = (0..self.n)
                .map(|v| {
                    let mut nb: Vec<(u32, u8)> = self.adjacency[v]
                        .iter()
                        .map(|&(u, b)| (colors[u], b))
                        .collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let next = rank_by(&keys);
            let next_cells = cell_count(&next);
            colors = next;
            if next_cells == cells {
                return colors;
            }
            cells = next_cells;
        }
    }

    /// Adjacency code of the discrete coloring: sorted (i, j, bond) with positions i < j.
    fn leaf_code(&self, colors: &Coloring) -> Vec<u32> {
        let mut code = Vec::new();
        for v in 0..self.n {
            for &(u, b) in &self.adjacency[v] {
                let (i, j) = (colors[v], colors[u]);
                if i < j {
                    code.push((i, j, b));
                }
            }
        }
        code.sort_unstable();
        code.into_iter()
            .flat_map(|(i, j, b)| [i, j, u32::from(b)])
            .collect()
    }

    fn search(&mut self, colors: Coloring, prefix: &mut Vec<usize>) {
        if cell_count(&colors) == self.n {
            let code = self.leaf_code(&colors);
            let mut order = vec![0; self.n];
            for (v, &c) in colors.iter().enumerate() {
                order[c as usize] = v;
            }
            match self.best_code.as_ref().map(|b| code.cmp(b)) {
                None | Some(Ordering::Less) => {
                    self.best_code = Some(code);
                    self.best_order = order;
                }
                Some(Ordering::Equal) => {
                    let mut gamma = vec![0; self.n];
                    for (pos, &v) in self.best_order.iter().enumerate() {
                        gamma[v] = order[pos];
                    }
                    if gamma.iter().enumerate().any(|(i, &g)| i != g) {
                        self.automorphisms.push(gamma);
                    }
                }
                Some(Ordering::Greater) => {}
            }
            return;
        }

        // first non-singleton cell in color order
        let mut sizes = vec![0usize; self.n];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let target = (0..self.n).find(|&c| sizes[c] > 1).expect("non-discrete coloring") as u32;
        let cell: Vec<usize> = (0..self.n).filter(|&v| colors[v] == target).collect();

        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if !explored.is_empty() {
                let orbit = self.orbit_ids(prefix);
                if explored.iter().any(|&u| orbit[u] == orbit[v]) {
                    continue;
                }
            }
            let individualized: Coloring = colors
                .iter()
                .enumerate()
                .map(|(u, &c)| {
                    if c == target && u != v {
                        2 * c + 1
                    } else {
                        2 * c
                    }
                })
                .collect();
            let refined = self.refine(rank_by(&individualized));
            prefix.push(v);
            self.search(refined, prefix);
            prefix.pop();
            explored.push(v);
        }
    }

    /// Orbit representative per node under the known automorphisms that fix `prefix` pointwise.
    fn orbit_ids(&self, prefix: &[usize]) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for gamma in &self.automorphisms {
            if prefix.iter().any(|&p| gamma[p] != p) {
                continue;
            }
            for (x, &y) in gamma.iter().enumerate() {
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                if rx != ry {
                    parent[rx.max(ry)] = rx.min(ry);
                }
            }
        }
        (0..self.n).map(|x| find(&mut parent, x)).collect()
    }
}

/// Canonical signature of `sub`. Two rooted subgraphs receive the same key
/// exactly when an isomorphism maps one onto the other, root to root,
/// preserving node labels and bond orders.
pub fn canonical_signature(sub: &RootedSubgraph) -> Result<Signature, FeatureError> {
    let n = sub.len();
    if n == 0 {
        return Err(FeatureError::EmptySubgraph);
    }
    if n > MAX_SUBGRAPH_NODES {
        return Err(FeatureError::SubgraphTooLarge {
            nodes: n,
            limit: MAX_SUBGRAPH_NODES,
        });
    }
    let labels: Vec<String> = sub.nodes.iter().map(|a| a.label()).collect();
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b, order) in &sub.bonds {
        let code = bond_code(order.symbol());
        adjacency[a].push((b, code));
        adjacency[b].push((a, code));
    }
    let mut canon = Canonizer {
        n,
        adjacency,
        best_code: None,
        best_order: Vec::new(),
        automorphisms: Vec::new(),
    };
    let initial: Vec<(u32, &str)> = (0..n)
        .map(|v| (sub.depth[v], labels[v].as_str()))
        .collect();
    let colors = canon.refine(rank_by(&initial));
    canon.search(colors, &mut Vec::new());

    let order = &canon.best_order;
    let mut position = vec![0usize; n];
    for (pos, &v) in order.iter().enumerate() {
        position[v] = pos;
    }
    let mut key = order
        .iter()
        .map(|&v| labels[v].as_str())
        .collect::<Vec<_>>()
        .join(",");
    key.push(';');
    let mut edges: Vec<(usize, usize, char)> = sub
        .bonds
        .iter()
        .map(|&(a, b, o)| {
            let (i, j) = (position[a], position[b]);
            (i.min(j), i.max(j), o.symbol())
        })
        .collect();
    edges.sort_unstable();
    key.push_str(
        &edges
            .iter()
            .map(|(i, j, s)| format!("{i}{s}{j}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    let mass = sub.nodes.iter().map(|a| a.mass()).sum();
    Ok(Signature {
        key,
        height: sub.height,
        mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurizer::neighborhood_subgraph;
    use crate::molgraph::{parse_smiles, AtomNode, Bond, BondOrder, MolecularGraph};

    fn sig(smiles: &str, root: usize, h: u32) -> Signature {
        let g = parse_smiles(smiles).unwrap();
        canonical_signature(&neighborhood_subgraph(&g, root, h)).unwrap()
    }

    #[test]
    fn single_node_keys_match_across_molecules() {
        assert_eq!(sig("C", 0, 0).key, "CH4;");
        assert_eq!(sig("C", 0, 0).key, sig("C.C", 1, 0).key);
        assert_eq!(sig("CCC", 0, 0).key, sig("CCO", 0, 0).key);
    }

    #[test]
    fn cyclopropane_roots_agree() {
        let keys: Vec<String> = (0..3).map(|r| sig("C1CC1", r, 1).key).collect();
        assert_eq!(keys[0], keys[1]);
        assert_eq!(keys[1], keys[2]);
    }

    #[test]
    fn ethanol_roots_differ() {
        assert_ne!(sig("CCO", 0, 1).key, sig("CCO", 2, 1).key);
        assert_eq!(sig("CCO", 0, 1).key, "CH3,CH2;0-1");
        assert_eq!(sig("CCO", 2, 1).key, "OH1,CH2;0-1");
    }

    #[test]
    fn root_position_matters_even_with_same_labels() {
        // path a-b-c with all-equal labels: root at end vs middle
        let g = MolecularGraph::new(
            "p",
            vec![AtomNode::atom("C", 0), AtomNode::atom("C", 0), AtomNode::atom("C", 0)],
            vec![
                Bond { a: 0, b: 1, order: BondOrder::Single },
                Bond { a: 1, b: 2, order: BondOrder::Single },
            ],
        )
        .unwrap();
        let end = canonical_signature(&neighborhood_subgraph(&g, 0, 2)).unwrap();
        let mid = canonical_signature(&neighborhood_subgraph(&g, 1, 2)).unwrap();
        assert_ne!(end.key, mid.key);
    }

    #[test]
    fn bond_orders_participate() {
        assert_ne!(sig("C=CC", 1, 1).key, sig("CCC", 1, 1).key);
    }

    #[test]
    fn masses() {
        assert!((sig("C", 0, 0).mass - 16.043).abs() < 1e-9);
        assert!((sig("O=C=O", 0, 0).mass - 15.999).abs() < 1e-9);
        assert!(sig("CCO", 0, 2).mass >= sig("CCO", 0, 1).mass);
    }

    #[test]
    fn symmetric_neighborhoods_are_fast() {
        // di-tert-butyl fragments produce large automorphism groups
        let s = sig("CC(C)(C)C(C(C)(C)C)(C(C)(C)C)C(C)(C)C", 4, 3);
        assert!(s.key.starts_with('C'));
    }

    #[test]
    fn oversized_subgraph_rejected() {
        let long = "C".repeat(80);
        let g = parse_smiles(&long).unwrap();
        let err = canonical_signature(&neighborhood_subgraph(&g, 40, 40)).unwrap_err();
        assert!(matches!(err, FeatureError::SubgraphTooLarge { nodes: 80, .. }));
    }
}
