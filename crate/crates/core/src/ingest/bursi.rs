use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use super::drops::{DropReason, DropReport};
use super::IngestError;
use crate::featurizer::Label;
use crate::molgraph::{parse_sdf, MolecularGraph};

#[derive(Debug, Clone)]
pub struct LabeledMolecules {
    pub ids: Vec<String>,
    pub graphs: Vec<MolecularGraph>,
    pub labels: Vec<Label>,
    pub drops: DropReport,
}

impl LabeledMolecules {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }
}

/// Reads a labeled SD file; `key`'s trimmed value equal to `positive` means +1.
pub fn load_bursi(path: &Path, key: &str, positive: &str) -> Result<LabeledMolecules, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::Open {
        path: path.to_path_buf(),
        source: e,
    })?;
    let parsed = parse_sdf(BufReader::new(file))?;
    let mut out = LabeledMolecules {
        ids: Vec::new(),
        graphs: Vec::new(),
        labels: Vec::new(),
        drops: DropReport::default(),
    };
    let record_name = |index: usize, name: &str| format!("record {} ({})", index + 1, name.trim());
    for skip in parsed.skipped {
        out.drops.push(
            record_name(skip.index, &skip.name),
            DropReason::ParseError(skip.error.to_string()),
        );
    }
    for rec in parsed.records {
        let name = rec.graph.name().to_string();
        match rec.properties.get(key) {
            None => out.drops.push(record_name(rec.index, &name), DropReason::MissingLabel),
            Some(v) => {
                let label = if v.trim() == positive.trim() {
                    Label::Positive
                } else {
                    Label::Negative
                };
                out.ids.push(if name.trim().is_empty() {
                    format!("mol{}", rec.index + 1)
                } else {
                    name.trim().to_string()
                });
                out.graphs.push(rec.graph);
                out.labels.push(label);
            }
        }
    }
    out.drops.drops.sort_by_key(|d| {
        d.record
            .split_whitespace()
            .nth(1)
            .and_then(|n| n.parse::<usize>().ok())
            .unwrap_or(0)
    });
    if out.graphs.is_empty() {
        return Err(IngestError::NoUsableRecords(path.to_path_buf()));
    }
    Ok(out)
}
