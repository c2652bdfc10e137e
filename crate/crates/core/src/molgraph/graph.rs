use std::fmt;

use thiserror::Error;

use super::elements;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Symbol used in canonical signatures; matches SMILES bond syntax.
    pub fn symbol(self) -> char {
        match self {
            BondOrder::Single => '-',
            BondOrder::Double => '=',
            BondOrder::Triple => '#',
            BondOrder::Aromatic => ':',
        }
    }

    /// Valence units consumed; aromatic bonds count as one.
    pub fn valence_units(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// Chemical element; `symbol` is the capitalized element symbol.
    Atom,
    /// Amino-acid residue of a chain graph; `symbol` is the one-letter code.
    Residue,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomNode {
    pub symbol: String,
    pub kind: NodeKind,
    pub aromatic: bool,
    pub charge: i8,
    /// Folded hydrogens (implicit plus explicit H atoms merged into this node).
    pub hydrogens: u8,
}

impl AtomNode {
    pub fn atom(symbol: &str, hydrogens: u8) -> Self {
        AtomNode {
            symbol: symbol.to_string(),
            kind: NodeKind::Atom,
            aromatic: false,
            charge: 0,
            hydrogens,
        }
    }

    pub fn residue(code: char) -> Self {
        AtomNode {
            symbol: code.to_string(),
            kind: NodeKind::Residue,
            aromatic: false,
            charge: 0,
            hydrogens: 0,
        }
    }

    /// Node label used in signatures: element (lowercase when aromatic),
    /// then `H<n>` for folded hydrogens, then a signed charge.
    pub fn label(&self) -> String {
        match self.kind {
            NodeKind::Residue => format!("aa:{}", self.symbol),
            NodeKind::Atom => {
                let mut s = if self.aromatic {
                    self.symbol.to_lowercase()
                } else {
                    self.symbol.clone()
                };
                if self.hydrogens > 0 {
                    s.push('H');
                    s.push_str(&self.hydrogens.to_string());
                }
                if self.charge != 0 {
                    s.push_str(&format!("{:+}", self.charge));
                }
                s
            }
        }
    }

    /// Mass in daltons including folded hydrogens.
    pub fn mass(&self) -> f64 {
        match self.kind {
            NodeKind::Residue => self
                .symbol
                .chars()
                .next()
                .and_then(elements::residue_mass)
                .unwrap_or(0.0),
            NodeKind::Atom => {
                elements::atomic_mass(&self.symbol).unwrap_or(0.0)
                    + f64::from(self.hydrogens) * elements::HYDROGEN_MASS
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("bond {a}-{b} references a node outside 0..{n}")]
    InvalidNode { a: usize, b: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate bond between {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("invalid node label `{0}`")]
    InvalidLabel(String),
}

/// Labeled undirected graph of heavy atoms or residues.
///
/// Immutable once constructed; the adjacency list is derived from the bond
/// list and always agrees with it in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularGraph {
    name: String,
    nodes: Vec<AtomNode>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, BondOrder)>>,
}

impl MolecularGraph {
    pub fn new(
        name: impl Into<String>,
        nodes: Vec<AtomNode>,
        bonds: Vec<Bond>,
    ) -> Result<Self, GraphError> {
        let n = nodes.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for node in &nodes {
            let valid = match node.kind {
                NodeKind::Atom => elements::is_element(&node.symbol),
                NodeKind::Residue => {
                    let mut chars = node.symbol.chars();
                    matches!((chars.next(), chars.next()), (Some(c), None) if elements::is_amino_acid(c))
                }
            };
            if !valid {
                return Err(GraphError::InvalidLabel(node.symbol.clone()));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for bond in &bonds {
            let (a, b) = (bond.a, bond.b);
            if a >= n || b >= n {
                return Err(GraphError::InvalidNode { a, b, n });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if adjacency[a].iter().any(|&(x, _)| x == b) {
                return Err(GraphError::DuplicateBond(a.min(b), a.max(b)));
            }
            adjacency[a].push((b, bond.order));
            adjacency[b].push((a, bond.order));
        }
        Ok(MolecularGraph {
            name: name.into(),
            nodes,
            bonds,
            adjacency,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn nodes(&self) -> &[AtomNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &AtomNode {
        &self.nodes[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, BondOrder)] {
        &self.adjacency[i]
    }

    /// Bond order between `i` and `j`, symmetric in its arguments.
    pub fn bond_between(&self, i: usize, j: usize) -> Option<BondOrder> {
        self.adjacency
            .get(i)?
            .iter()
            .find(|&&(x, _)| x == j)
            .map(|&(_, o)| o)
    }

    pub fn count_bonds(&self, order: BondOrder) -> usize {
        self.bonds.iter().filter(|b| b.order == order).count()
    }

    /// Relabels nodes so that old node `i` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> MolecularGraph {
        assert_eq!(perm.len(), self.nodes.len(), "permutation length");
        let mut nodes = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            nodes[perm[i]] = Some(node.clone());
        }
        let nodes = nodes.into_iter().map(|n| n.expect("perm is a bijection")).collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
            })
            .collect();
        MolecularGraph::new(self.name.clone(), nodes, bonds).expect("permutation preserves validity")
    }
}

impl fmt::Display for MolecularGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} nodes, {} bonds)",
            self.name,
            self.nodes.len(),
            self.bonds.len()
        )
    }
}

/// Atom as read from a file, before hydrogen folding.
#[derive(Debug, Clone)]
pub(crate) struct RawAtom {
    pub symbol: String,
    pub aromatic: bool,
    pub charge: i8,
    pub isotope: Option<u16>,
    /// `Some` for atoms whose hydrogen count is stated explicitly (SMILES bracket atoms).
    pub explicit_h: Option<u8>,
}

/// Collects raw atoms and bonds, then derives implicit hydrogens and folds
/// explicit hydrogen atoms into their heavy neighbor.
#[derive(Debug, Default)]
pub(crate) struct GraphBuilder {
    pub atoms: Vec<RawAtom>,
    pub bonds: Vec<Bond>,
}

impl GraphBuilder {
    pub fn has_bond(&self, a: usize, b: usize) -> bool {
        self.bonds
            .iter()
            .any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
    }

    pub fn finish(self, name: &str) -> Result<MolecularGraph, GraphError> {
        let n = self.atoms.len();
        let mut bond_sum = vec![0u32; n];
        let mut degree = vec![0usize; n];
        for b in &self.bonds {
            if b.a >= n || b.b >= n {
                return Err(GraphError::InvalidNode { a: b.a, b: b.b, n });
            }
            bond_sum[b.a] += b.order.valence_units();
            bond_sum[b.b] += b.order.valence_units();
            degree[b.a] += 1;
            degree[b.b] += 1;
        }
        // An H atom folds when it is plain (no charge, no isotope) and hangs
        // off exactly one non-hydrogen atom by a single bond.
        let mut fold_into = vec![None; n];
        for b in &self.bonds {
            for (h, other) in [(b.a, b.b), (b.b, b.a)] {
                let atom = &self.atoms[h];
                if atom.symbol == "H"
                    && atom.charge == 0
                    && atom.isotope.is_none()
                    && degree[h] == 1
                    && b.order == BondOrder::Single
                    && self.atoms[other].symbol != "H"
                {
                    fold_into[h] = Some(other);
                }
            }
        }
        let mut index = vec![usize::MAX; n];
        let mut nodes = Vec::with_capacity(n);
        for (i, atom) in self.atoms.iter().enumerate() {
            if fold_into[i].is_some() {
                continue;
            }
            let hydrogens = match atom.explicit_h {
                Some(h) => h,
                None => elements::implicit_hydrogens(
                    &atom.symbol,
                    atom.aromatic,
                    atom.charge,
                    bond_sum[i],
                ),
            };
            index[i] = nodes.len();
            nodes.push(AtomNode {
                symbol: atom.symbol.clone(),
                kind: NodeKind::Atom,
                aromatic: atom.aromatic,
                charge: atom.charge,
                hydrogens,
            });
        }
        for &t in fold_into.iter().flatten() {
            let node = &mut nodes[index[t]];
            node.hydrogens = node.hydrogens.saturating_add(1);
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| fold_into[b.a].is_none() && fold_into[b.b].is_none())
            .map(|b| Bond {
                a: index[b.a],
                b: index[b.b],
                order: b.order,
            })
            .collect();
        MolecularGraph::new(name, nodes, bonds)
    }
}
