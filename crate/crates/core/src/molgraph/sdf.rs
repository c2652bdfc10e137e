//! MDL SD file reader (V2000 molblocks with `> <KEY>` data items).

use std::collections::BTreeMap;
use std::io::{self, BufRead};

use thiserror::Error;

use super::elements;
use super::graph::{Bond, BondOrder, GraphBuilder, GraphError, MolecularGraph, RawAtom};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SdfError {
    #[error("malformed counts line `{0}`")]
    MalformedCountsLine(String),
    #[error("unsupported molfile version {0}")]
    UnsupportedVersion(String),
    #[error("atom block truncated: expected {expected} atoms, found {found}")]
    TruncatedAtomBlock { expected: usize, found: usize },
    #[error("bond block truncated: expected {expected} bonds, found {found}")]
    TruncatedBondBlock { expected: usize, found: usize },
    #[error("malformed atom line {line}")]
    MalformedAtomLine { line: usize },
    #[error("malformed bond line {line}")]
    MalformedBondLine { line: usize },
    #[error("unknown element `{symbol}` on line {line}")]
    UnknownElement { symbol: String, line: usize },
    #[error("unsupported bond type {kind} on line {line}")]
    UnsupportedBondType { kind: u32, line: usize },
    #[error("header truncated")]
    TruncatedHeader,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone)]
pub struct SdfRecord {
    /// Zero-based position of the record in the stream.
    pub index: usize,
    pub graph: MolecularGraph,
    pub properties: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct SdfSkip {
    pub index: usize,
    pub name: String,
    pub error: SdfError,
}

#[derive(Debug, Default)]
pub struct SdfParse {
    pub records: Vec<SdfRecord>,
    pub skipped: Vec<SdfSkip>,
}

/// Reads every record from `reader`. Per-record failures land in
/// [`SdfParse::skipped`]; only I/O errors abort the read.
pub fn parse_sdf<R: BufRead>(reader: R) -> io::Result<SdfParse> {
    let mut out = SdfParse::default();
    let mut lines: Vec<String> = Vec::new();
    let mut index = 0;
    for line in reader.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r').to_string();
        if line.starts_with("$$$$") {
            push_record(&mut out, index, &lines);
            index += 1;
            lines.clear();
        } else {
            lines.push(line);
        }
    }
    if lines.iter().any(|l| !l.trim().is_empty()) {
        push_record(&mut out, index, &lines);
    }
    Ok(out)
}

fn push_record(out: &mut SdfParse, index: usize, lines: &[String]) {
    match parse_record(lines) {
        Ok((graph, properties)) => out.records.push(SdfRecord {
            index,
            graph,
            properties,
        }),
        Err(error) => out.skipped.push(SdfSkip {
            index,
            name: lines.first().map(|s| s.trim().to_string()).unwrap_or_default(),
            error,
        }),
    }
}

fn column(line: &str, from: usize, to: usize) -> &str {
    let end = to.min(line.len());
    if from >= end {
        ""
    } else {
        line.get(from..end).unwrap_or("")
    }
}

fn parse_counts(line: &str) -> Result<(usize, usize), SdfError> {
    let bad = || SdfError::MalformedCountsLine(line.to_string());
    if line.contains("V3000") {
        return Err(SdfError::UnsupportedVersion("V3000".into()));
    }
    let fixed = (
        column(line, 0, 3).trim().parse::<usize>(),
        column(line, 3, 6).trim().parse::<usize>(),
    );
    match fixed {
        (Ok(a), Ok(b)) => Ok((a, b)),
        _ => {
            let mut it = line.split_whitespace();
            let a = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let b = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            Ok((a, b))
        }
    }
}

fn charge_from_code(code: i32) -> i8 {
    match code {
        1 => 3,
        2 => 2,
        3 => 1,
        5 => -1,
        6 => -2,
        7 => -3,
        _ => 0,
    }
}

type Parsed = (MolecularGraph, BTreeMap<String, String>);

fn parse_record(lines: &[String]) -> Result<Parsed, SdfError> {
    if lines.len() < 4 {
        return Err(SdfError::TruncatedHeader);
    }
    let name = lines[0].trim().to_string();
    let (n_atoms, n_bonds) = parse_counts(&lines[3])?;

    let mut builder = GraphBuilder::default();
    let mut aromatic = vec![false; n_atoms];
    let mut cursor = 4;
    for i in 0..n_atoms {
        let line_no = cursor + 1;
        let line = lines
            .get(cursor)
            .filter(|l| !l.starts_with("M  END"))
            .ok_or(SdfError::TruncatedAtomBlock {
                expected: n_atoms,
                found: i,
            })?;
        let (symbol, mass_diff, charge_code) = if line.len() >= 34 {
            (
                column(line, 31, 34).trim().to_string(),
                column(line, 34, 36).trim().parse::<i32>().unwrap_or(0),
                column(line, 36, 39).trim().parse::<i32>().unwrap_or(0),
            )
        } else {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 4 || !fields[0].contains('.') {
                return Err(SdfError::MalformedAtomLine { line: line_no });
            }
            (
                fields[3].to_string(),
                fields.get(4).and_then(|s| s.parse().ok()).unwrap_or(0),
                fields.get(5).and_then(|s| s.parse().ok()).unwrap_or(0),
            )
        };
        if symbol.is_empty() {
            return Err(SdfError::MalformedAtomLine { line: line_no });
        }
        if !elements::is_element(&symbol) {
            return Err(SdfError::UnknownElement {
                symbol,
                line: line_no,
            });
        }
        builder.atoms.push(RawAtom {
            symbol,
            aromatic: false,
            charge: charge_from_code(charge_code),
            isotope: (mass_diff != 0).then_some(0),
            explicit_h: None,
        });
        cursor += 1;
    }

    for i in 0..n_bonds {
        let line_no = cursor + 1;
        let line = lines
            .get(cursor)
            .filter(|l| !l.starts_with("M  END"))
            .ok_or(SdfError::TruncatedBondBlock {
                expected: n_bonds,
                found: i,
            })?;
        let fixed = (
            column(line, 0, 3).trim().parse::<usize>(),
            column(line, 3, 6).trim().parse::<usize>(),
            column(line, 6, 9).trim().parse::<u32>(),
        );
        let (a, b, kind) = match fixed {
            (Ok(a), Ok(b), Ok(k)) => (a, b, k),
            _ => {
                let f: Vec<u32> = line
                    .split_whitespace()
                    .take(3)
                    .map(|s| s.parse::<u32>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| SdfError::MalformedBondLine { line: line_no })?;
                if f.len() < 3 {
                    return Err(SdfError::MalformedBondLine { line: line_no });
                }
                (f[0] as usize, f[1] as usize, f[2])
            }
        };
        if a == 0 || b == 0 || a > n_atoms || b > n_atoms {
            return Err(SdfError::MalformedBondLine { line: line_no });
        }
        let order = match kind {
            1 => BondOrder::Single,
            2 => BondOrder::Double,
            3 => BondOrder::Triple,
            4 => BondOrder::Aromatic,
            k => return Err(SdfError::UnsupportedBondType { kind: k, line: line_no }),
        };
        if order == BondOrder::Aromatic {
            aromatic[a - 1] = true;
            aromatic[b - 1] = true;
        }
        if builder.has_bond(a - 1, b - 1) {
            return Err(GraphError::DuplicateBond((a - 1).min(b - 1), (a - 1).max(b - 1)).into());
        }
        builder.bonds.push(Bond {
            a: a - 1,
            b: b - 1,
            order,
        });
        cursor += 1;
    }
    for (atom, arom) in builder.atoms.iter_mut().zip(&aromatic) {
        atom.aromatic = *arom;
    }

    // property block up to M  END; M  CHG supersedes atom-block charges
    let mut charges_reset = false;
    while cursor < lines.len() {
        let line = &lines[cursor];
        cursor += 1;
        if line.starts_with("M  END") {
            break;
        }
        if let Some(rest) = line.strip_prefix("M  CHG") {
            if !charges_reset {
                for atom in builder.atoms.iter_mut() {
                    atom.charge = 0;
                }
                charges_reset = true;
            }
            let nums: Vec<i32> = rest
                .split_whitespace()
                .filter_map(|s| s.parse().ok())
                .collect();
            for pair in nums.get(1..).unwrap_or(&[]).chunks(2) {
                if let [idx, value] = *pair {
                    if idx >= 1 && (idx as usize) <= n_atoms {
                        builder.atoms[idx as usize - 1].charge = value.clamp(-127, 127) as i8;
                    }
                }
            }
        }
    }

    let properties = parse_data_items(&lines[cursor.min(lines.len())..]);
    let graph = builder.finish(&name)?;
    Ok((graph, properties))
}

fn data_header_key(line: &str) -> Option<String> {
    if !line.starts_with('>') {
        return None;
    }
    let open = line.find('<')?;
    let close = line[open + 1..].find('>')? + open + 1;
    Some(line[open + 1..close].to_string())
}

fn parse_data_items(lines: &[String]) -> BTreeMap<String, String> {
    let mut props = BTreeMap::new();
    let mut i = 0;
    while i < lines.len() {
        if let Some(key) = data_header_key(&lines[i]) {
            i += 1;
            let mut value: Vec<&str> = Vec::new();
            while i < lines.len() && !lines[i].is_empty() && data_header_key(&lines[i]).is_none() {
                value.push(&lines[i]);
                i += 1;
            }
            props.insert(key, value.join("\n"));
        } else {
            i += 1;
        }
    }
    props
}

#[cfg(test)]
mod tests {
    use super::*;

    const METHANE: &str = "\
methane
  test

  1  0  0  0  0  0  0  0  0  0999 V2000
    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
M  END
> <activity>
mutagen

$$$$
";

    const ETHANOL_H: &str = "\
ethanol
  explicit hydrogens

  3  2  0  0  0  0  0  0  0  0999 V2000
    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    1.5000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    2.0000    1.0000    0.0000 O   0  0  0  0  0  0  0  0  0  0  0  0
  1  2  1  0  0  0  0
  2  3  1  0  0  0  0
M  END
> <ID>
42

> <Note>
line one
line two

$$$$
";

    #[test]
    fn empty_stream() {
        let p = parse_sdf("".as_bytes()).unwrap();
        assert!(p.records.is_empty());
        assert!(p.skipped.is_empty());
    }

    #[test]
    fn single_methane() {
        let p = parse_sdf(METHANE.as_bytes()).unwrap();
        assert_eq!(p.records.len(), 1);
        let r = &p.records[0];
        assert_eq!(r.graph.node_count(), 1);
        assert_eq!(r.graph.node(0).hydrogens, 4);
        assert_eq!(r.graph.name(), "methane");
        assert_eq!(r.properties["activity"], "mutagen");
    }

    #[test]
    fn data_items_verbatim() {
        let p = parse_sdf(ETHANOL_H.as_bytes()).unwrap();
        let r = &p.records[0];
        assert_eq!(r.properties["ID"], "42");
        assert_eq!(r.properties["Note"], "line one\nline two");
        let h: Vec<u8> = r.graph.nodes().iter().map(|n| n.hydrogens).collect();
        assert_eq!(h, vec![3, 2, 1]);
    }

    #[test]
    fn malformed_counts_line_skips_record() {
        let broken = METHANE.replace("  1  0  0  0  0  0  0  0  0  0999 V2000", "  x  y");
        let stream = format!("{ETHANOL_H}{broken}");
        let p = parse_sdf(stream.as_bytes()).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.skipped.len(), 1);
        assert_eq!(p.skipped[0].index, 1);
        assert!(matches!(p.skipped[0].error, SdfError::MalformedCountsLine(_)));
    }

    #[test]
    fn truncated_atom_block() {
        let broken = ETHANOL_H.replace("  3  2  0", "  5  2  0");
        let p = parse_sdf(broken.as_bytes()).unwrap();
        assert!(p.records.is_empty());
        // the bond lines are too short to be atom lines; either report is a truncation
        assert!(matches!(
            p.skipped[0].error,
            SdfError::TruncatedAtomBlock { .. } | SdfError::MalformedAtomLine { .. }
        ));
        let cut: String = ETHANOL_H.lines().take(6).map(|l| format!("{l}\n")).collect();
        let p = parse_sdf(cut.as_bytes()).unwrap();
        assert_eq!(
            p.skipped[0].error,
            SdfError::TruncatedAtomBlock {
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn v3000_is_skipped() {
        let v3 = "x\n\n\n  0  0  0     0  0            999 V3000\nM  END\n$$$$\n";
        let p = parse_sdf(v3.as_bytes()).unwrap();
        assert_eq!(
            p.skipped[0].error,
            SdfError::UnsupportedVersion("V3000".into())
        );
    }

    #[test]
    fn charge_property_lines() {
        let nitro = "\
nitromethane


  4  3  0  0  0  0  0  0  0  0999 V2000
    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    0.0000    0.0000    0.0000 N   0  0  0  0  0  0  0  0  0  0  0  0
    0.0000    0.0000    0.0000 O   0  0  0  0  0  0  0  0  0  0  0  0
    0.0000    0.0000    0.0000 O   0  0  0  0  0  0  0  0  0  0  0  0
  1  2  1  0
  2  3  2  0
  2  4  1  0
M  CHG  2   2   1   4  -1
M  END
$$$$
";
        let p = parse_sdf(nitro.as_bytes()).unwrap();
        let g = &p.records[0].graph;
        assert_eq!(g.node(1).charge, 1);
        assert_eq!(g.node(3).charge, -1);
        let h: Vec<u8> = g.nodes().iter().map(|n| n.hydrogens).collect();
        assert_eq!(h, vec![3, 0, 0, 0]);
    }
}
