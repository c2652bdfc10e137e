mod common;

use std::collections::HashMap;

use common::*;
use molforest::featurizer::{canonical_signature, neighborhood_subgraph, FeatureConfig};
use molforest::molgraph::{parse_smiles, AtomNode, Bond, BondOrder, MolecularGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn height_counts_equal_heavy_atoms() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let cfg = FeatureConfig::height(vec![0, 1, 2, 3]);
    for _ in 0..200 {
        let (smiles, heavy) = random_smiles(&mut rng);
        let g = parse_smiles(&smiles).unwrap_or_else(|e| panic!("{smiles}: {e}"));
        assert_eq!(g.node_count(), heavy, "{smiles}");
        let v = cfg.featurize(&g).unwrap();
        for h in 0..4 {
            assert_eq!(v.block_total(&format!("h{h}.d0")), heavy as u64, "{smiles} h={h}");
        }
    }
}

#[test]
fn permuted_graphs_share_features() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let heights = FeatureConfig::height(vec![0, 1, 2, 3]);
    let pairs = FeatureConfig::pair(vec![0, 1, 2], vec![0, 1, 2, 3]);
    for _ in 0..60 {
        let n = rng.random_range(1..14);
        let g = random_graph(&mut rng, n);
        let p = g.permuted(&random_permutation(&mut rng, n));
        for cfg in [&heights, &pairs] {
            assert_eq!(
                feature_multiset(&cfg.featurize(&g).unwrap()),
                feature_multiset(&cfg.featurize(&p).unwrap())
            );
        }
    }
}

fn labeled(labels: &[u8], edges: &[(usize, usize)]) -> MolecularGraph {
    let nodes = labels
        .iter()
        .map(|&l| AtomNode::atom(if l == 0 { "C" } else { "N" }, 0))
        .collect();
    let bonds = edges
        .iter()
        .map(|&(a, b)| Bond {
            a,
            b,
            order: BondOrder::Single,
        })
        .collect();
    MolecularGraph::new("g", nodes, bonds).unwrap()
}

#[test]
fn signatures_agree_with_exhaustive_isomorphism_up_to_five_nodes() {
    for (n, classes) in [(1, 1), (2, 1), (3, 2), (4, 6), (5, 21)] {
        let mut sig_to_form = HashMap::new();
        let mut form_to_sig = HashMap::new();
        let graphs = connected_graph_classes(n);
        assert_eq!(graphs.len(), classes);
        for edges in graphs {
            for mask in 0u32..(1 << n) {
                let labels: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
                let g = labeled(&labels, &edges);
                for root in 0..n {
                    let sig = canonical_signature(&neighborhood_subgraph(&g, root, n as u32)).unwrap().key;
                    let form = brute_rooted_form(&labels, &edges, root);
                    assert_eq!(sig_to_form.entry(sig.clone()).or_insert(form.clone()), &form);
                    assert_eq!(form_to_sig.entry(form).or_insert(sig.clone()), &sig);
                }
            }
        }
    }
}
