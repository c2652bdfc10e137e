//! Random molecule generators and brute-force oracles shared by property tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use molforest::featurizer::FeatureVector;
use molforest::molgraph::{AtomNode, Bond, BondOrder, MolecularGraph};
use rand::seq::SliceRandom;
use rand::Rng;

const ATOMS: [&str; 9] = ["C", "C", "C", "N", "O", "S", "Cl", "[NH4+]", "[O-]"];
const BONDS: [&str; 4] = ["", "", "=", "#"];

/// Random valid SMILES and the number of heavy atoms it spells out.
pub fn random_smiles<R: Rng>(rng: &mut R) -> (String, usize) {
    let mut out = String::new();
    let mut heavy = 0;
    let mut next_ring = 10;
    chain(rng, &mut out, &mut heavy, &mut next_ring, 0);
    if rng.random_bool(0.3) {
        out.push('.');
        chain(rng, &mut out, &mut heavy, &mut next_ring, 1);
    }
    (out, heavy)
}

fn chain<R: Rng>(rng: &mut R, out: &mut String, heavy: &mut usize, next_ring: &mut u32, depth: u32) {
    let len = rng.random_range(1..=if depth == 0 { 10 } else { 4 });
    // ring closures open at atom i and close at atom j >= i + 2
    let mut closures: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    let mut openings: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    if len >= 3 && rng.random_bool(0.4) {
        let i = rng.random_range(0..len - 2);
        let j = rng.random_range(i + 2..len);
        openings.entry(i).or_default().push(*next_ring);
        closures.entry(j).or_default().push(*next_ring);
        *next_ring += 1;
    }
    for k in 0..len {
        if k > 0 {
            out.push_str(BONDS[rng.random_range(0..BONDS.len())]);
        }
        if rng.random_bool(0.08) {
            out.push_str("c1ccccc1");
            *heavy += 6;
        } else {
            out.push_str(ATOMS[rng.random_range(0..ATOMS.len())]);
            *heavy += 1;
        }
        for r in openings.get(&k).into_iter().chain(closures.get(&k)).flatten() {
            out.push_str(&format!("%{r}"));
        }
        if depth < 2 && rng.random_bool(0.25) {
            out.push('(');
            out.push_str(BONDS[rng.random_range(0..BONDS.len())]);
            chain(rng, out, heavy, next_ring, depth + 1);
            out.push(')');
        }
    }
}

/// Connected random graph: a random tree plus extra edges, random labels and bond orders.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize) -> MolecularGraph {
    let symbols = ["C", "N", "O", "S"];
    let orders = [BondOrder::Single, BondOrder::Single, BondOrder::Double, BondOrder::Aromatic];
    let nodes: Vec<AtomNode> = (0..n)
        .map(|_| AtomNode::atom(symbols[rng.random_range(0..symbols.len())], rng.random_range(0..3)))
        .collect();
    let mut edges = std::collections::BTreeSet::new();
    for v in 1..n {
        edges.insert((rng.random_range(0..v), v));
    }
    for _ in 0..rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let bonds = edges
        .into_iter()
        .map(|(a, b)| Bond {
            a,
            b,
            order: orders[rng.random_range(0..orders.len())],
        })
        .collect();
    MolecularGraph::new("random", nodes, bonds).unwrap()
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn feature_multiset(v: &FeatureVector) -> BTreeMap<String, u32> {
    v.iter().map(|(k, c)| (k.text().to_string(), c)).collect()
}

/// Calls `f` with every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation(items: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    fn heap(k: usize, items: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if k <= 1 {
            f(items);
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, items, f);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
        heap(k - 1, items, f);
    }
    let k = items.len();
    heap(k, items, f);
}

/// Root-preserving canonical form by exhaustive search: the smallest
/// (label sequence, sorted edge list) over all relabelings sending `root` to 0.
pub fn brute_rooted_form(labels: &[u8], edges: &[(usize, usize)], root: usize) -> (Vec<u8>, Vec<(usize, usize)>) {
    let n = labels.len();
    let mut rest: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    let mut best: Option<(Vec<u8>, Vec<(usize, usize)>)> = None;
    for_each_permutation(&mut rest, &mut |order: &[usize]| {
        // position of each vertex: root first, then `order`
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i + 1;
        }
        pos[root] = 0;
        let mut seq = vec![0u8; n];
        for v in 0..n {
            seq[pos[v]] = labels[v];
        }
        let mut e: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| (pos[a].min(pos[b]), pos[a].max(pos[b])))
            .collect();
        e.sort_unstable();
        let cand = (seq, e);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    });
    best.expect("at least one permutation")
}

/// Canonical unlabeled form of an edge set on `n` nodes (all permutations).
pub fn brute_unlabeled_form(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut all: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    for_each_permutation(&mut all, &mut |p: &[usize]| {
        let mut e: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b]))).collect();
        e.sort_unstable();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
    });
    best.expect("at least one permutation")
}

pub fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// One representative edge set per isomorphism class of connected graphs on `n` nodes.
pub fn connected_graph_classes(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut classes = std::collections::BTreeSet::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = (0..pairs.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| pairs[i])
            .collect();
        if edges.len() + 1 < n || !is_connected(n, &edges) {
            continue;
        }
        classes.insert(brute_unlabeled_form(n, &edges));
    }
    classes.into_iter().collect()
}
