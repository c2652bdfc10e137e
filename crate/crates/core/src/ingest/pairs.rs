use std::path::Path;

use serde::{Deserialize, Serialize};

use super::drops::{DropReason, DropReport};
use super::resolver::{EntityKind, ResolveError, Resolver};
use super::IngestError;
use crate::featurizer::{FeatureConfig, FeatureError, FeatureVector, Label};
use crate::molgraph::{parse_smiles_named, protein_to_chain_graph_named, MolecularGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    DrugTarget,
    DrugDrug,
}

impl PairKind {
    pub fn kind_b(self) -> EntityKind {
        match self {
            PairKind::DrugTarget => EntityKind::Protein,
            PairKind::DrugDrug => EntityKind::SmallMolecule,
        }
    }

    pub fn namespaces(self) -> (&'static str, &'static str) {
        match self {
            PairKind::DrugTarget => ("drug:", "target:"),
            PairKind::DrugDrug => ("drug_a:", "drug_b:"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InteractionPair {
    pub id_a: String,
    pub id_b: String,
    pub kind: PairKind,
    pub structure_a: MolecularGraph,
    pub structure_b: MolecularGraph,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSummary {
    pub rows: usize,
    pub positives: usize,
    pub negatives: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct PairSet {
    pub kind: PairKind,
    pub pairs: Vec<InteractionPair>,
    pub drops: DropReport,
}

impl PairSet {
    pub fn labels(&self) -> Vec<Label> {
        self.pairs.iter().map(|p| p.label).collect()
    }

    pub fn summary(&self) -> PairSummary {
        let positives = self.pairs.iter().filter(|p| p.label.is_positive()).count();
        PairSummary {
            rows: self.pairs.len() + self.drops.len(),
            positives,
            negatives: self.pairs.len() - positives,
            dropped: self.drops.len(),
        }
    }
}

struct Columns {
    id_a: usize,
    id_b: usize,
    label: usize,
    smiles_a: Option<usize>,
    structure_b: Option<usize>,
    name_a: Option<usize>,
    name_b: Option<usize>,
    kind: PairKind,
}

fn columns(header: &csv::StringRecord) -> Result<Columns, IngestError> {
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    let need = |name: &str| find(name).ok_or_else(|| IngestError::MissingColumn(name.to_string()));
    let (smiles_b, seq_b) = (find("smiles_b"), find("seq_b"));
    if smiles_b.is_some() && seq_b.is_some() {
        return Err(IngestError::ConflictingColumns("smiles_b", "seq_b"));
    }
    Ok(Columns {
        id_a: need("id_a")?,
        id_b: need("id_b")?,
        label: need("label")?,
        smiles_a: find("smiles_a"),
        structure_b: smiles_b.or(seq_b),
        name_a: find("name_a"),
        name_b: find("name_b"),
        kind: if smiles_b.is_some() {
            PairKind::DrugDrug
        } else {
            PairKind::DrugTarget
        },
    })
}

fn build_graph(kind: EntityKind, structure: &str, id: &str) -> Result<MolecularGraph, String> {
    match kind {
        EntityKind::SmallMolecule => parse_smiles_named(structure, id).map_err(|e| e.to_string()),
        EntityKind::Protein => protein_to_chain_graph_named(structure, id).map_err(|e| e.to_string()),
    }
}

fn resolve_reason(e: ResolveError) -> DropReason {
    match e {
        ResolveError::NameMismatch { queried, returned } => DropReason::NameMismatch { queried, returned },
        other => DropReason::Unresolved(other.to_string()),
    }
}

/// Reads `id_a,id_b,label[,smiles_a][,smiles_b|seq_b][,name_a][,name_b]`.
/// Empty or absent structures go through `resolver`; bad rows are dropped and reported.
pub fn load_pairs(path: &Path, resolver: &Resolver) -> Result<PairSet, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IngestError::Csv(e.to_string()))?;
    let header = reader.headers().map_err(|e| IngestError::Csv(e.to_string()))?.clone();
    let cols = columns(&header)?;
    let mut set = PairSet {
        kind: cols.kind,
        pairs: Vec::new(),
        drops: DropReport::default(),
    };
    for (n, row) in reader.records().enumerate() {
        let line = n + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                set.drops.push(format!("line {line}"), DropReason::MalformedRow(e.to_string()));
                continue;
            }
        };
        let field = |i: usize| row.get(i).unwrap_or("");
        let opt = |i: Option<usize>| i.map(field).filter(|s| !s.is_empty());
        let (id_a, id_b) = (field(cols.id_a).to_string(), field(cols.id_b).to_string());
        let record = format!("line {line} ({id_a},{id_b})");
        if row.len() < header.len() || id_a.is_empty() || id_b.is_empty() {
            set.drops.push(
                record,
                DropReason::MalformedRow(format!("{} fields, header has {}", row.len(), header.len())),
            );
            continue;
        }
        let label = match field(cols.label).parse::<i64>().ok().and_then(Label::from_sign) {
            Some(l) => l,
            None => {
                set.drops.push(
                    record,
                    DropReason::MalformedRow(format!("label {:?} is not 1 or -1", field(cols.label))),
                );
                continue;
            }
        };
        let sides = [
            (&id_a, opt(cols.smiles_a), opt(cols.name_a), EntityKind::SmallMolecule),
            (&id_b, opt(cols.structure_b), opt(cols.name_b), cols.kind.kind_b()),
        ];
        let mut graphs = Vec::with_capacity(2);
        for (id, inline, name, kind) in sides {
            let structure = match inline {
                Some(s) => s.to_string(),
                None => match resolver.resolve(id, name.unwrap_or(id), kind) {
                    Ok(rec) => rec.structure,
                    Err(e) => {
                        set.drops.push(record.clone(), resolve_reason(e));
                        break;
                    }
                },
            };
            match build_graph(kind, &structure, id) {
                Ok(g) => graphs.push(g),
                Err(e) => {
                    set.drops.push(record.clone(), DropReason::InvalidStructure(format!("{id}: {e}")));
                    break;
                }
            }
        }
        if graphs.len() < 2 {
            continue;
        }
        let structure_b = graphs.pop().expect("two graphs");
        let structure_a = graphs.pop().expect("two graphs");
        set.pairs.push(InteractionPair {
            id_a,
            id_b,
            kind: cols.kind,
            structure_a,
            structure_b,
            label,
        });
    }
    Ok(set)
}

/// Concatenates both entities' features in disjoint namespaces. Drug-drug
/// pairs are ordered by id first, so `(a, b)` and `(b, a)` give the same row.
pub fn pair_feature_vector(pair: &InteractionPair, config: &FeatureConfig) -> Result<FeatureVector, FeatureError> {
    let (first, second) = if pair.kind == PairKind::DrugDrug && pair.id_b < pair.id_a {
        (&pair.structure_b, &pair.structure_a)
    } else {
        (&pair.structure_a, &pair.structure_b)
    };
    let (ns_a, ns_b) = pair.kind.namespaces();
    let mut v = config.featurize(first)?.namespaced(ns_a);
    v.extend(&config.featurize(second)?.namespaced(ns_b));
    Ok(v)
}

pub fn pair_feature_vectors(pairs: &[InteractionPair], config: &FeatureConfig) -> Result<Vec<FeatureVector>, FeatureError> {
    use rayon::prelude::*;
    pairs.par_iter().map(|p| pair_feature_vector(p, config)).collect()
}
