use thiserror::Error;

use super::elements;
use super::graph::{AtomNode, Bond, BondOrder, MolecularGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SequenceError {
    #[error("empty sequence")]
    Empty,
    #[error("illegal residue `{ch}` at position {position}")]
    IllegalResidue { ch: char, position: usize },
}

/// Path graph over residues: node `i` is residue `i`, consecutive residues
/// share a single bond. Accepts FASTA bodies: `>` header lines and
/// whitespace are dropped, lowercase letters are upcased. Positions in
/// errors count residues, not raw characters.
pub fn protein_to_chain_graph(sequence: &str) -> Result<MolecularGraph, SequenceError> {
    protein_to_chain_graph_named(sequence, "")
}

pub fn protein_to_chain_graph_named(sequence: &str, name: &str) -> Result<MolecularGraph, SequenceError> {
    let residues: Vec<char> = sequence
        .lines()
        .filter(|l| !l.trim_start().starts_with('>'))
        .flat_map(|l| l.chars())
        .filter(|c| !c.is_whitespace())
        .map(|c| c.to_ascii_uppercase())
        .collect();
    if residues.is_empty() {
        return Err(SequenceError::Empty);
    }
    if let Some((position, &ch)) = residues
        .iter()
        .enumerate()
        .find(|(_, &c)| !elements::is_amino_acid(c))
    {
        return Err(SequenceError::IllegalResidue { ch, position });
    }
    let nodes = residues.iter().map(|&c| AtomNode::residue(c)).collect();
    let bonds = (1..residues.len())
        .map(|i| Bond {
            a: i - 1,
            b: i,
            order: BondOrder::Single,
        })
        .collect();
    Ok(MolecularGraph::new(name, nodes, bonds).expect("chain graph is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_chains() {
        let g = protein_to_chain_graph("G").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (1, 0));
        assert_eq!(g.node(0).hydrogens, 0);
        let g = protein_to_chain_graph("GA").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!(g.node(1).label(), "aa:A");
    }

    #[test]
    fn fasta_body() {
        let g = protein_to_chain_graph(">sp|P1|X\nMKV\nLA\n").unwrap();
        assert_eq!(g.node_count(), 5);
    }

    #[test]
    fn illegal_characters() {
        assert_eq!(protein_to_chain_graph(""), Err(SequenceError::Empty));
        assert_eq!(
            protein_to_chain_graph("GAXG"),
            Err(SequenceError::IllegalResidue { ch: 'X', position: 2 })
        );
    }

    proptest! {
        #[test]
        fn path_graph_shape(seq in "[ACDEFGHIKLMNPQRSTVWY]{1,60}") {
            let g = protein_to_chain_graph(&seq).unwrap();
            prop_assert_eq!(g.node_count(), seq.len());
            prop_assert_eq!(g.edge_count(), seq.len() - 1);
        }
    }
}
