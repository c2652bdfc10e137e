use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code", content = "detail", rename_all = "snake_case")]
pub enum DropReason {
    MissingLabel,
    ParseError(String),
    Unresolved(String),
    NameMismatch { queried: String, returned: String },
    InvalidStructure(String),
    MalformedRow(String),
}

impl DropReason {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            DropReason::MissingLabel => "missing_label",
            DropReason::ParseError(_) => "parse_error",
            DropReason::Unresolved(_) => "unresolved",
            DropReason::NameMismatch { .. } => "name_mismatch",
            DropReason::InvalidStructure(_) => "invalid_structure",
            DropReason::MalformedRow(_) => "malformed_row",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            DropReason::MissingLabel => String::new(),
            DropReason::ParseError(s)
            | DropReason::Unresolved(s)
            | DropReason::InvalidStructure(s)
            | DropReason::MalformedRow(s) => s.clone(),
            DropReason::NameMismatch { queried, returned } => format!("queried {queried:?}, got {returned:?}"),
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::MissingLabel => write!(f, "missing label"),
            DropReason::ParseError(s) => write!(f, "parse error: {s}"),
            DropReason::Unresolved(s) => write!(f, "unresolved: {s}"),
            DropReason::NameMismatch { .. } => write!(f, "name mismatch: {}", self.detail()),
            DropReason::InvalidStructure(s) => write!(f, "invalid structure: {s}"),
            DropReason::MalformedRow(s) => write!(f, "malformed row: {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Drop {
    /// Record index or CSV line plus identifier, e.g. `line 4 (D001,T002)`.
    pub record: String,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropReport {
    pub drops: Vec<Drop>,
}

impl DropReport {
    pub fn push(&mut self, record: impl Into<String>, reason: DropReason) {
        self.drops.push(Drop {
            record: record.into(),
            reason,
        });
    }

    pub fn len(&self) -> usize {
        self.drops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drops.is_empty()
    }

    pub fn count(&self, code: &str) -> usize {
        self.drops.iter().filter(|d| d.reason.code() == code).count()
    }

    /// Tab-separated `record  code  detail`, one drop per line.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "record\tcode\tdetail")?;
        for d in &self.drops {
            let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
            writeln!(w, "{}\t{}\t{}", clean(&d.record), d.reason.code(), clean(&d.reason.detail()))?;
        }
        Ok(())
    }
}
