use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityKind {
    SmallMolecule,
    Protein,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::SmallMolecule => "small-molecule",
            EntityKind::Protein => "protein",
        })
    }
}

impl FromStr for EntityKind {
    type Err = ResolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "small-molecule" => Ok(EntityKind::SmallMolecule),
            "protein" => Ok(EntityKind::Protein),
            other => Err(ResolveError::CorruptRecord(format!("unknown kind {other:?}"))),
        }
    }
}

/// Cached structure: SMILES for small molecules, residue sequence for proteins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureRecord {
    pub kind: EntityKind,
    pub name: String,
    pub structure: String,
    pub source: String,
}

impl StructureRecord {
    fn to_text(&self) -> String {
        format!("{}\n{}\n{}\n{}\n", self.kind, self.name, self.structure, self.source)
    }

    fn from_text(text: &str) -> Result<Self, ResolveError> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() < 4 {
            return Err(ResolveError::CorruptRecord(format!("{} lines, expected 4", lines.len())));
        }
        Ok(StructureRecord {
            kind: lines[0].parse()?,
            name: lines[1].to_string(),
            structure: lines[2].trim().to_string(),
            source: lines[3].to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchResponse {
    pub preferred_name: String,
    pub structure: String,
    pub source: String,
}

/// Remote lookup by name; implementations decide how (if at all) to reach a service.
pub trait FetchHook: Send + Sync {
    fn fetch(&self, query: &str, kind: EntityKind) -> Result<FetchResponse, String>;
}

/// Replays canned responses keyed by `(kind, query)`.
#[derive(Debug, Default, Clone)]
pub struct RecordedFetch {
    responses: HashMap<(EntityKind, String), FetchResponse>,
}

impl RecordedFetch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, kind: EntityKind, query: &str, response: FetchResponse) {
        self.responses.insert((kind, query.to_string()), response);
    }
}

impl FetchHook for RecordedFetch {
    fn fetch(&self, query: &str, kind: EntityKind) -> Result<FetchResponse, String> {
        self.responses
            .get(&(kind, query.to_string()))
            .cloned()
            .ok_or_else(|| format!("no recorded response for {query:?}"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolveError {
    #[error("not in cache and fetching is disabled")]
    Offline,
    #[error("fetch failed: {0}")]
    FetchFailed(String),
    #[error("name mismatch: queried {queried:?}, got {returned:?}")]
    NameMismatch { queried: String, returned: String },
    #[error("cached record is {found}, wanted {wanted}")]
    KindMismatch { wanted: EntityKind, found: EntityKind },
    #[error("corrupt cache record: {0}")]
    CorruptRecord(String),
    #[error("cache I/O: {0}")]
    Cache(String),
}

/// Trims, collapses internal whitespace and lowercases.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// File name for a cache id; bytes outside `[A-Za-z0-9_.-]` are hex escaped.
fn cache_file_name(id: &str) -> String {
    let mut s = String::new();
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || (b == b'.' && !s.is_empty()) {
            s.push(b as char);
        } else {
            s.push_str(&format!("%{b:02X}"));
        }
    }
    s.push_str(".rec");
    s
}

/// Cache-first structure lookup with an optional fetch hook.
pub struct Resolver {
    cache_dir: Option<PathBuf>,
    hook: Option<Box<dyn FetchHook>>,
    fetches: AtomicUsize,
}

impl Resolver {
    pub fn offline(cache_dir: Option<PathBuf>) -> Self {
        Resolver {
            cache_dir,
            hook: None,
            fetches: AtomicUsize::new(0),
        }
    }

    pub fn with_hook(cache_dir: Option<PathBuf>, hook: Box<dyn FetchHook>) -> Self {
        Resolver {
            cache_dir,
            hook: Some(hook),
            fetches: AtomicUsize::new(0),
        }
    }

    /// Number of fetch-hook calls made so far.
    pub fn fetch_count(&self) -> usize {
        self.fetches.load(Ordering::SeqCst)
    }

    pub fn cached(&self, id: &str) -> Result<Option<StructureRecord>, ResolveError> {
        let Some(dir) = &self.cache_dir else {
            return Ok(None);
        };
        let path = dir.join(cache_file_name(id));
        match fs::read_to_string(&path) {
            Ok(text) => StructureRecord::from_text(&text).map(Some),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(ResolveError::Cache(format!("{}: {e}", path.display()))),
        }
    }

    /// Writes a record unless one already exists for `id`.
    pub fn store(&self, id: &str, record: &StructureRecord) -> Result<(), ResolveError> {
        let Some(dir) = &self.cache_dir else {
            return Ok(());
        };
        write_new_record(dir, id, record).map_err(|e| ResolveError::Cache(e.to_string()))
    }

    /// Looks `id` up in the cache, else asks the hook for `name` and checks the returned name.
    pub fn resolve(&self, id: &str, name: &str, kind: EntityKind) -> Result<StructureRecord, ResolveError> {
        if let Some(rec) = self.cached(id)? {
            if rec.kind != kind {
                return Err(ResolveError::KindMismatch {
                    wanted: kind,
                    found: rec.kind,
                });
            }
            return Ok(rec);
        }
        let hook = self.hook.as_ref().ok_or(ResolveError::Offline)?;
        self.fetches.fetch_add(1, Ordering::SeqCst);
        let resp = hook.fetch(name, kind).map_err(ResolveError::FetchFailed)?;
        if normalize_name(&resp.preferred_name) != normalize_name(name) {
            return Err(ResolveError::NameMismatch {
                queried: name.to_string(),
                returned: resp.preferred_name,
            });
        }
        let rec = StructureRecord {
            kind,
            name: resp.preferred_name,
            structure: resp.structure,
            source: resp.source,
        };
        self.store(id, &rec)?;
        Ok(rec)
    }
}

fn write_new_record(dir: &Path, id: &str, record: &StructureRecord) -> io::Result<()> {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    fs::create_dir_all(dir)?;
    let target = dir.join(cache_file_name(id));
    let tmp = dir.join(format!(
        ".{}.{}.{}.tmp",
        cache_file_name(id),
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::SeqCst)
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(record.to_text().as_bytes())?;
        f.sync_all()?;
    }
    // hard_link never replaces an existing record
    let linked = fs::hard_link(&tmp, &target);
    fs::remove_file(&tmp)?;
    match linked {
        Err(e) if e.kind() != io::ErrorKind::AlreadyExists => Err(e),
        _ => Ok(()),
    }
}
