use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::canon::{canonical_signature, Signature};
use super::subgraph::neighborhood_from_distances;
use super::FeatureError;
use crate::molgraph::{all_pairs_distances, bfs_distances, MolecularGraph};

/// Column identity in a feature vector.
///
/// The text is `h<h>.d<d>|<sig>` for single subgraphs (always `d0`) and
/// `h<h>.d<d>|<sig_a>|<sig_b>` for pairs, optionally prefixed by a
/// namespace (`drug:`, `target:`). Everything before the first `|` names
/// the (height, distance) block the key belongs to. Equality, ordering and
/// hashing use the text only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureKey {
    text: String,
    mass: f64,
}

impl FeatureKey {
    pub fn new(text: impl Into<String>, mass: f64) -> Self {
        FeatureKey {
            text: text.into(),
            mass,
        }
    }

    pub fn single(height: u32, sig: &Signature) -> Self {
        FeatureKey::new(format!("h{height}.d0|{}", sig.key), sig.mass)
    }

    /// Orientation-free pair key: the two signatures are ordered lexicographically.
    pub fn pair(height: u32, a: &Signature, b: &Signature, distance: u32) -> Self {
        let (first, second) = if a.key <= b.key { (a, b) } else { (b, a) };
        FeatureKey::new(
            format!("h{height}.d{distance}|{}|{}", first.key, second.key),
            first.mass + second.mass,
        )
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Block name, e.g. `h1.d0` or `target:h2.d3`.
    pub fn block(&self) -> &str {
        self.text.split('|').next().unwrap_or("")
    }

    pub fn with_namespace(&self, namespace: &str) -> FeatureKey {
        FeatureKey::new(format!("{namespace}:{}", self.text), self.mass)
    }
}

impl PartialEq for FeatureKey {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for FeatureKey {}

impl PartialOrd for FeatureKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeatureKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.text.cmp(&other.text)
    }
}

impl Hash for FeatureKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.text.hash(state);
    }
}

/// Sparse count vector; every stored count is at least 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureVector {
    entries: BTreeMap<FeatureKey, u32>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn increment(&mut self, key: FeatureKey) {
        *self.entries.entry(key).or_insert(0) += 1;
    }

    /// Adds `count` to `key`; zero counts are ignored.
    pub fn add(&mut self, key: FeatureKey, count: u32) {
        if count > 0 {
            *self.entries.entry(key).or_insert(0) += count;
        }
    }

    pub fn get(&self, key: &str) -> u32 {
        self.entries
            .iter()
            .find(|(k, _)| k.text() == key)
            .map_or(0, |(_, &c)| c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending key-text order.
    pub fn iter(&self) -> impl Iterator<Item = (&FeatureKey, u32)> {
        self.entries.iter().map(|(k, &c)| (k, c))
    }

    pub fn keys(&self) -> impl Iterator<Item = &FeatureKey> {
        self.entries.keys()
    }

    /// Sum of counts over keys whose block is `block`.
    pub fn block_total(&self, block: &str) -> u64 {
        self.iter()
            .filter(|(k, _)| k.block() == block)
            .map(|(_, c)| u64::from(c))
            .sum()
    }

    pub fn namespaced(&self, namespace: &str) -> FeatureVector {
        FeatureVector {
            entries: self
                .entries
                .iter()
                .map(|(k, &c)| (k.with_namespace(namespace), c))
                .collect(),
        }
    }

    /// Merges `other` into `self`, summing counts of shared keys.
    pub fn extend(&mut self, other: &FeatureVector) {
        for (k, c) in other.iter() {
            self.add(k.clone(), c);
        }
    }
}

impl FromIterator<(FeatureKey, u32)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (FeatureKey, u32)>>(iter: I) -> Self {
        let mut v = FeatureVector::new();
        for (k, c) in iter {
            v.add(k, c);
        }
        v
    }
}

fn normalized(set: &[u32]) -> Vec<u32> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Signatures for every root at every requested height: `out[h_index][root]`.
fn signatures_by_height(
    g: &MolecularGraph,
    heights: &[u32],
) -> Result<Vec<Vec<Signature>>, FeatureError> {
    let max_h = heights.iter().copied().max().unwrap_or(0);
    let mut out: Vec<Vec<Signature>> = vec![Vec::with_capacity(g.node_count()); heights.len()];
    for root in 0..g.node_count() {
        let dist = bfs_distances(g, root, Some(max_h));
        for (slot, &h) in heights.iter().enumerate() {
            let sub = neighborhood_from_distances(g, root, h, &dist);
            out[slot].push(canonical_signature(&sub)?);
        }
    }
    Ok(out)
}

/// Counts, for each height `h`, how many roots have a neighborhood with
/// each canonical signature.
pub fn height_features(g: &MolecularGraph, heights: &[u32]) -> Result<FeatureVector, FeatureError> {
    if heights.is_empty() {
        return Err(FeatureError::NoHeights);
    }
    let heights = normalized(heights);
    let sigs = signatures_by_height(g, &heights)?;
    let mut fv = FeatureVector::new();
    for (slot, &h) in heights.iter().enumerate() {
        for sig in &sigs[slot] {
            fv.increment(FeatureKey::single(h, sig));
        }
    }
    Ok(fv)
}

/// Pairs of rooted neighborhoods whose roots lie exactly `d` hops apart.
/// Distance 0 contributes the plain height features.
pub fn pair_features(
    g: &MolecularGraph,
    heights: &[u32],
    distances: &[u32],
) -> Result<FeatureVector, FeatureError> {
    if heights.is_empty() {
        return Err(FeatureError::NoHeights);
    }
    if distances.is_empty() {
        return Err(FeatureError::NoDistances);
    }
    let heights = normalized(heights);
    let distances = normalized(distances);
    let sigs = signatures_by_height(g, &heights)?;
    let mut fv = FeatureVector::new();
    if distances.contains(&0) {
        for (slot, &h) in heights.iter().enumerate() {
            for sig in &sigs[slot] {
                fv.increment(FeatureKey::single(h, sig));
            }
        }
    }
    if distances.iter().any(|&d| d > 0) {
        let table = all_pairs_distances(g);
        let n = g.node_count();
        for a in 0..n {
            for b in (a + 1)..n {
                let d = table.get(a, b);
                if d == 0 || distances.binary_search(&d).is_err() {
                    continue;
                }
                for (slot, &h) in heights.iter().enumerate() {
                    fv.increment(FeatureKey::pair(h, &sigs[slot][a], &sigs[slot][b], d));
                }
            }
        }
    }
    Ok(fv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    Height,
    Pair,
}

/// Which heights and distances to extract, and whether to emit pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub mode: FeatureMode,
    pub heights: Vec<u32>,
    pub distances: Vec<u32>,
}

impl FeatureConfig {
    pub fn height(heights: Vec<u32>) -> Self {
        FeatureConfig {
            mode: FeatureMode::Height,
            heights,
            distances: vec![0],
        }
    }

    pub fn pair(heights: Vec<u32>, distances: Vec<u32>) -> Self {
        FeatureConfig {
            mode: FeatureMode::Pair,
            heights,
            distances,
        }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.heights.is_empty() {
            return Err(FeatureError::NoHeights);
        }
        if self.mode == FeatureMode::Height && self.distances.iter().any(|&d| d != 0) {
            return Err(FeatureError::DistanceInHeightMode);
        }
        if self.mode == FeatureMode::Pair && self.distances.is_empty() {
            return Err(FeatureError::NoDistances);
        }
        Ok(())
    }

    pub fn featurize(&self, g: &MolecularGraph) -> Result<FeatureVector, FeatureError> {
        self.validate()?;
        match self.mode {
            FeatureMode::Height => height_features(g, &self.heights),
            FeatureMode::Pair => pair_features(g, &self.heights, &self.distances),
        }
    }

    /// Featurizes every graph in parallel; output order follows input order.
    pub fn featurize_all(&self, graphs: &[MolecularGraph]) -> Vec<Result<FeatureVector, FeatureError>> {
        graphs.par_iter().map(|g| self.featurize(g)).collect()
    }
}
