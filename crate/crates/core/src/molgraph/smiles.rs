//! SMILES subset parser producing heavy-atom graphs.
//!
//! Supported: organic-subset atoms, bracket atoms (isotope, chirality and
//! atom class are accepted and discarded; H count and charge are kept),
//! bonds `- = # :` plus `/ \` read as single, branches, ring closures by
//! digit or `%nn`, and `.` component separators.

use std::collections::HashMap;

use thiserror::Error;

use super::elements;
use super::graph::{Bond, BondOrder, GraphBuilder, GraphError, MolecularGraph, RawAtom};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmilesError {
    #[error("empty SMILES")]
    Empty,
    #[error("non-ASCII character at offset {offset}")]
    NonAscii { offset: usize },
    #[error("unbalanced parenthesis at offset {offset}")]
    UnbalancedParenthesis { offset: usize },
    #[error("ring closure {label} opened at offset {offset} is never closed")]
    UnmatchedRingClosure { label: u32, offset: usize },
    #[error("unknown element `{symbol}` at offset {offset}")]
    UnknownElement { symbol: String, offset: usize },
    #[error("unexpected character `{ch}` at offset {offset}")]
    UnexpectedCharacter { ch: char, offset: usize },
    #[error("invalid bond at offset {offset}: {source}")]
    InvalidBond {
        offset: usize,
        #[source]
        source: GraphError,
    },
}

impl SmilesError {
    /// Character offset the error points at, when it has one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            SmilesError::Empty => None,
            SmilesError::NonAscii { offset }
            | SmilesError::UnbalancedParenthesis { offset }
            | SmilesError::UnmatchedRingClosure { offset, .. }
            | SmilesError::UnknownElement { offset, .. }
            | SmilesError::UnexpectedCharacter { offset, .. }
            | SmilesError::InvalidBond { offset, .. } => Some(*offset),
        }
    }
}

const AROMATIC_BRACKET: &[&str] = &["se", "as", "te", "b", "c", "n", "o", "p", "s"];

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    builder: GraphBuilder,
    prev: Option<usize>,
    pending_bond: Option<(BondOrder, usize)>,
    branches: Vec<(Option<usize>, usize)>,
    rings: HashMap<u32, (usize, Option<BondOrder>, usize)>,
}

/// Parses a SMILES string into a [`MolecularGraph`] named `name`.
pub fn parse_smiles(input: &str) -> Result<MolecularGraph, SmilesError> {
    parse_smiles_named(input, input)
}

pub fn parse_smiles_named(input: &str, name: &str) -> Result<MolecularGraph, SmilesError> {
    if let Some(offset) = input.chars().position(|c| !c.is_ascii()) {
        return Err(SmilesError::NonAscii { offset });
    }
    let trimmed = input.trim();
    if trimmed.is_empty() {
        return Err(SmilesError::Empty);
    }
    let lead = input.len() - input.trim_start().len();
    let mut p = Parser {
        bytes: trimmed.as_bytes(),
        pos: 0,
        builder: GraphBuilder::default(),
        prev: None,
        pending_bond: None,
        branches: Vec::new(),
        rings: HashMap::new(),
    };
    p.run().map_err(|e| shift_offset(e, lead))?;
    p.builder
        .finish(name)
        .map_err(|source| SmilesError::InvalidBond { offset: lead, source })
}

fn shift_offset(e: SmilesError, by: usize) -> SmilesError {
    use SmilesError::*;
    match e {
        Empty => Empty,
        NonAscii { offset } => NonAscii { offset: offset + by },
        UnbalancedParenthesis { offset } => UnbalancedParenthesis { offset: offset + by },
        UnmatchedRingClosure { label, offset } => UnmatchedRingClosure {
            label,
            offset: offset + by,
        },
        UnknownElement { symbol, offset } => UnknownElement {
            symbol,
            offset: offset + by,
        },
        UnexpectedCharacter { ch, offset } => UnexpectedCharacter {
            ch,
            offset: offset + by,
        },
        InvalidBond { offset, source } => InvalidBond {
            offset: offset + by,
            source,
        },
    }
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<u8> {
        self.bytes.get(self.pos + k).copied()
    }

    fn unexpected(&self, at: usize) -> SmilesError {
        SmilesError::UnexpectedCharacter {
            ch: self.bytes[at] as char,
            offset: at,
        }
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if self.prev.is_none() {
                        return Err(SmilesError::UnbalancedParenthesis { offset: start });
                    }
                    self.branches.push((self.prev, start));
                    self.pos += 1;
                }
                b')' => {
                    let (prev, _) = self
                        .branches
                        .pop()
                        .ok_or(SmilesError::UnbalancedParenthesis { offset: start })?;
                    if self.pending_bond.is_some() {
                        return Err(self.unexpected(start));
                    }
                    self.prev = prev;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending_bond.is_some() || self.prev.is_none() {
                        return Err(self.unexpected(start));
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    self.pending_bond = Some((order, start));
                    self.pos += 1;
                }
                b'.' => {
                    if self.pending_bond.is_some() || self.prev.is_none() {
                        return Err(self.unexpected(start));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom, start)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom, start)?;
                }
            }
        }
        if let Some(&(_, offset)) = self.branches.last() {
            return Err(SmilesError::UnbalancedParenthesis { offset });
        }
        if let Some((_, offset)) = self.pending_bond {
            return Err(self.unexpected(offset));
        }
        if let Some((&label, &(_, _, offset))) = self.rings.iter().min_by_key(|(_, v)| v.2) {
            return Err(SmilesError::UnmatchedRingClosure { label, offset });
        }
        Ok(())
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.builder.atoms[a].aromatic && self.builder.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn connect(&mut self, a: usize, b: usize, order: BondOrder, at: usize) -> Result<(), SmilesError> {
        if a == b {
            return Err(SmilesError::InvalidBond {
                offset: at,
                source: GraphError::SelfLoop(a),
            });
        }
        if self.builder.has_bond(a, b) {
            return Err(SmilesError::InvalidBond {
                offset: at,
                source: GraphError::DuplicateBond(a.min(b), a.max(b)),
            });
        }
        self.builder.bonds.push(Bond { a, b, order });
        Ok(())
    }

    fn add_atom(&mut self, atom: RawAtom, at: usize) -> Result<(), SmilesError> {
        let idx = self.builder.atoms.len();
        self.builder.atoms.push(atom);
        if let Some(prev) = self.prev {
            let order = match self.pending_bond.take() {
                Some((o, _)) => o,
                None => self.default_order(prev, idx),
            };
            self.connect(prev, idx, order, at)?;
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn ring_closure(&mut self) -> Result<(), SmilesError> {
        let start = self.pos;
        let label = if self.peek() == Some(b'%') {
            match (self.peek_at(1), self.peek_at(2)) {
                (Some(a), Some(b)) if a.is_ascii_digit() && b.is_ascii_digit() => {
                    self.pos += 3;
                    u32::from(a - b'0') * 10 + u32::from(b - b'0')
                }
                _ => return Err(self.unexpected(start)),
            }
        } else {
            self.pos += 1;
            u32::from(self.bytes[start] - b'0')
        };
        let current = self.prev.ok_or_else(|| self.unexpected(start))?;
        let bond = self.pending_bond.take().map(|(o, _)| o);
        match self.rings.remove(&label) {
            None => {
                self.rings.insert(label, (current, bond, start));
            }
            Some((other, open_bond, _)) => {
                let order = open_bond
                    .or(bond)
                    .unwrap_or_else(|| self.default_order(other, current));
                self.connect(other, current, order, start)?;
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<RawAtom, SmilesError> {
        let start = self.pos;
        let c = self.bytes[start];
        let two = self
            .peek_at(1)
            .map(|d| [c, d])
            .filter(|pair| pair == b"Cl" || pair == b"Br");
        let (symbol, aromatic, len) = if let Some(pair) = two {
            (String::from_utf8_lossy(&pair).into_owned(), false, 2)
        } else {
            match c {
                b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I' => {
                    ((c as char).to_string(), false, 1)
                }
                b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                    ((c as char).to_ascii_uppercase().to_string(), true, 1)
                }
                c if c.is_ascii_alphabetic() || c == b'*' => {
                    return Err(SmilesError::UnknownElement {
                        symbol: (c as char).to_string(),
                        offset: start,
                    })
                }
                _ => return Err(self.unexpected(start)),
            }
        };
        self.pos += len;
        Ok(RawAtom {
            symbol,
            aromatic,
            charge: 0,
            isotope: None,
            explicit_h: None,
        })
    }

    fn read_number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            std::str::from_utf8(&self.bytes[start..self.pos])
                .ok()?
                .parse()
                .ok()
        }
    }

    fn bracket_atom(&mut self) -> Result<RawAtom, SmilesError> {
        let open = self.pos;
        self.pos += 1;
        let isotope = self.read_number().map(|v| v.min(u16::MAX as u32) as u16);

        let sym_start = self.pos;
        let (symbol, aromatic) = match self.peek() {
            Some(c) if c.is_ascii_uppercase() => {
                let pair = self.peek_at(1).filter(u8::is_ascii_lowercase).map(|d| {
                    let mut s = (c as char).to_string();
                    s.push(d as char);
                    s
                });
                match pair {
                    Some(s) if elements::is_element(&s) || !elements::is_element(&s[..1]) => {
                        self.pos += 2;
                        (s, false)
                    }
                    _ => {
                        self.pos += 1;
                        ((c as char).to_string(), false)
                    }
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                let rest = &self.bytes[self.pos..];
                let hit = AROMATIC_BRACKET
                    .iter()
                    .find(|a| rest.starts_with(a.as_bytes()))
                    .ok_or_else(|| SmilesError::UnknownElement {
                        symbol: (c as char).to_string(),
                        offset: sym_start,
                    })?;
                self.pos += hit.len();
                let mut s = hit[..1].to_ascii_uppercase();
                s.push_str(&hit[1..]);
                (s, true)
            }
            Some(b'*') => {
                return Err(SmilesError::UnknownElement {
                    symbol: "*".into(),
                    offset: sym_start,
                })
            }
            Some(_) => return Err(self.unexpected(self.pos)),
            None => return Err(SmilesError::UnexpectedCharacter { ch: '[', offset: open }),
        };
        if !elements::is_element(&symbol) {
            return Err(SmilesError::UnknownElement {
                symbol,
                offset: sym_start,
            });
        }

        // chirality
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            } else if let Some(tag) = ["TH", "AL", "SP", "TB", "OH"]
                .iter()
                .find(|t| self.bytes[self.pos..].starts_with(t.as_bytes()))
            {
                self.pos += tag.len();
                self.read_number();
            }
        }

        let mut hydrogens = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = self.read_number().map_or(1, |v| v.min(u8::MAX as u32) as u8);
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(v) = self.read_number() {
                charge = unit * v as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.read_number().is_none() {
                return Err(self.unexpected(self.pos.min(self.bytes.len() - 1)));
            }
        }

        match self.peek() {
            Some(b']') => self.pos += 1,
            Some(_) => return Err(self.unexpected(self.pos)),
            None => return Err(SmilesError::UnexpectedCharacter { ch: '[', offset: open }),
        }

        Ok(RawAtom {
            symbol,
            aromatic,
            charge: charge.clamp(i8::MIN as i32, i8::MAX as i32) as i8,
            isotope,
            explicit_h: Some(hydrogens),
        })
    }
}
