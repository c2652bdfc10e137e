//! Sparse feature files and their companion vocabulary files.
//!
//! Feature file: one row per line, `<+1|-1> <col>:<value> ...`, columns
//! 1-based and ascending. Vocabulary file: `<col>\t<key>\t<mass>` per line.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::features::FeatureKey;
use super::matrix::{DatasetMatrix, FeatureVocabulary, Label, SparseRow};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum FileFormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> FileFormatError {
    FileFormatError::Parse {
        line,
        message: message.into(),
    }
}

pub fn write_sparse<T: Scalar, W: Write>(mut w: W, data: &DatasetMatrix<T>) -> io::Result<()> {
    for (row, label) in data.rows.iter().zip(&data.labels) {
        write!(w, "{}", if label.is_positive() { "+1" } else { "-1" })?;
        for &(c, v) in &row.entries {
            write!(w, " {}:{}", c + 1, v)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads a sparse feature file whose rows have `n_cols` columns.
pub fn read_sparse<T: Scalar, R: BufRead>(r: R, n_cols: usize) -> Result<DatasetMatrix<T>, FileFormatError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut fields = body.split_whitespace();
        let label_text = fields.next().unwrap_or("");
        let label = label_text
            .parse::<i64>()
            .ok()
            .and_then(Label::from_sign)
            .ok_or_else(|| parse_err(lineno, format!("bad label `{label_text}`")))?;
        let mut entries = Vec::new();
        let mut last = 0usize;
        for field in fields {
            let (c, v) = field
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("bad entry `{field}`")))?;
            let c: usize = c
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad column `{c}`")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad value `{v}`")))?;
            if c <= last {
                return Err(parse_err(lineno, "columns must be 1-based and ascending"));
            }
            if c > n_cols {
                return Err(parse_err(lineno, format!("column {c} exceeds vocabulary size {n_cols}")));
            }
            last = c;
            entries.push((c - 1, T::of(v)));
        }
        rows.push(SparseRow::new(n_cols, entries));
        labels.push(label);
    }
    let ids = (0..rows.len()).map(|i| format!("row{i}")).collect();
    Ok(DatasetMatrix {
        rows,
        labels,
        ids,
        n_cols,
    })
}

pub fn write_vocabulary<W: Write>(mut w: W, vocab: &FeatureVocabulary) -> io::Result<()> {
    for (i, k) in vocab.keys().iter().enumerate() {
        writeln!(w, "{}\t{}\t{}", i + 1, k.text(), k.mass())?;
    }
    Ok(())
}

/// Reads a vocabulary file; column order is taken from the file as written.
pub fn read_vocabulary<R: BufRead>(r: R) -> Result<FeatureVocabulary, FileFormatError> {
    let mut keys = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(parse_err(lineno, "expected `<col>\\t<key>\\t<mass>`"));
        }
        let col: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(lineno, "bad column index"))?;
        if col != keys.len() + 1 {
            return Err(parse_err(lineno, format!("expected column {}, found {col}", keys.len() + 1)));
        }
        let mass: f64 = parts[2].parse().map_err(|_| parse_err(lineno, "bad mass"))?;
        if !seen.insert(parts[1].to_string()) {
            return Err(parse_err(lineno, format!("duplicate key `{}`", parts[1])));
        }
        keys.push(FeatureKey::new(parts[1], mass));
    }
    Ok(FeatureVocabulary::from_ordered(keys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurizer::{build_matrix, height_features};
    use crate::molgraph::parse_smiles;

    #[test]
    fn sparse_and_vocab_round_trip() {
        let vs: Vec<_> = ["CCO", "c1ccccc1O", "C"]
            .iter()
            .map(|s| height_features(&parse_smiles(s).unwrap(), &[0, 1]).unwrap())
            .collect();
        let labels = [Label::Positive, Label::Negative, Label::Positive];
        let (m, vocab) = build_matrix::<f64>(&vs, &labels, None).unwrap();

        let mut vbuf = Vec::new();
        write_vocabulary(&mut vbuf, &vocab).unwrap();
        let vocab2 = read_vocabulary(&vbuf[..]).unwrap();
        assert_eq!(vocab2, vocab);

        let mut fbuf = Vec::new();
        write_sparse(&mut fbuf, &m).unwrap();
        let text = String::from_utf8(fbuf.clone()).unwrap();
        assert!(text.lines().next().unwrap().starts_with("+1 "));
        let m2 = read_sparse::<f64, _>(&fbuf[..], vocab2.len()).unwrap();
        assert_eq!(m2.rows, m.rows);
        assert_eq!(m2.labels, m.labels);
        assert_eq!(m2.to_feature_vectors(&vocab2).unwrap(), vs);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(read_sparse::<f64, _>("+1 2:1 1:1\n".as_bytes(), 3).is_err());
        assert!(read_sparse::<f64, _>("+1 0:1\n".as_bytes(), 3).is_err());
        assert!(read_sparse::<f64, _>("+1 4:1\n".as_bytes(), 3).is_err());
        assert!(read_sparse::<f64, _>("2 1:1\n".as_bytes(), 3).is_err());
        assert!(read_vocabulary("1\ta\t1.0\n3\tb\t2.0\n".as_bytes()).is_err());
        assert!(read_vocabulary("1\ta\t1.0\n2\ta\t2.0\n".as_bytes()).is_err());
    }
}
