//! svmlight / libsvm text format: `<label> <index>:<value> ...` with
//! 1-based indices. Labels `+1`, `1`, `-1` and `0` are accepted; `0` maps
//! to the negative class. Blank lines and `#` comments are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;

use crate::error::{Error, Result};
use crate::numerics::SparseVector;
use crate::oracles::Label;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    dim: usize,
    samples: Vec<(SparseVector, Label)>,
}

impl LabeledDataset {
    pub fn new(dim: usize, samples: Vec<(SparseVector, Label)>) -> Result<Self> {
        let mut fixed = Vec::with_capacity(samples.len());
        for (a, b) in samples {
            fixed.push((a.with_dim(dim)?, b));
        }
        Ok(LabeledDataset { dim, samples: fixed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(SparseVector, Label)] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<(SparseVector, Label)> {
        self.samples
    }
}

pub fn load_svmlight(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    load_svmlight_with_dim(path, None)
}

/// Loads a dataset; `dim` overrides the inferred `1 + max index`.
pub fn load_svmlight_with_dim(path: impl AsRef<Path>, dim: Option<usize>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_svmlight(BufReader::new(file), path, dim)
}

pub fn read_svmlight<R: BufRead>(reader: R, origin: &Path, dim: Option<usize>) -> Result<LabeledDataset> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        msg,
    };
    let mut rows: Vec<(Vec<(usize, f64)>, Label)> = Vec::new();
    let mut max_index = 0usize;
    let mut remapped = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let label = match label_tok.parse::<f64>() {
            Ok(1.0) => Label::Pos,
            Ok(-1.0) => Label::Neg,
            Ok(0.0) => {
                remapped += 1;
                Label::Neg
            }
            _ => return Err(parse_err(lineno, format!("bad label {label_tok:?}"))),
        };
        let mut pairs = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected index:value, got {tok:?}")))?;
            if idx == "qid" {
                continue;
            }
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are 1-based; found 0".into()));
            }
            let val: f64 = val
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(lineno, format!("bad value {val:?}")))?;
            max_index = max_index.max(idx);
            pairs.push((idx - 1, val));
        }
        rows.push((pairs, label));
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no samples in file".into()));
    }
    if remapped > 0 {
        info!("{}: remapped {remapped} labels 0 -> -1", origin.display());
    }
    let dim = match dim {
        Some(d) if d < max_index => {
            return Err(Error::invalid(format!(
                "dimension override {d} smaller than max index {max_index}"
            )))
        }
        Some(d) => d,
        None => max_index,
    };
    let samples = rows
        .into_iter()
        .map(|(pairs, label)| Ok((SparseVector::new(dim, pairs)?, label)))
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(dim, samples)
}

pub fn write_svmlight(d: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    for (a, b) in d.samples() {
        write!(w, "{}", if *b == Label::Pos { "+1" } else { "-1" }).map_err(io)?;
        for (j, v) in a.iter() {
            write!(w, " {}:{}", j + 1, v).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<LabeledDataset> {
        read_svmlight(text.as_bytes(), Path::new("mem"), None)
    }

    #[test]
    fn line_examples() {
        let d = read("+1 3:0.5 7:1.2\n").unwrap();
        let (a, b) = &d.samples()[0];
        assert_eq!(*b, Label::Pos);
        assert_eq!(a.indices(), &[2, 6]);
        assert_eq!(d.dim(), 7);
        let d = read("+1 1:1\n-1 \n").unwrap();
        assert_eq!(d.samples()[1].1, Label::Neg);
        assert_eq!(d.samples()[1].0.nnz(), 0);
    }

    #[test]
    fn dimension_tracks_max_index() {
        let d = read("1 138921:1.0\n0 5:2\n").unwrap();
        assert_eq!(d.dim(), 138_921);
        assert_eq!(d.samples()[1].1, Label::Neg);
    }

    #[test]
    fn comments_and_override() {
        let d = read_svmlight("# header\n\n-1 2:1 # trailing\n".as_bytes(), Path::new("m"), Some(10)).unwrap();
        assert_eq!((d.len(), d.dim()), (1, 10));
        assert!(read_svmlight("-1 4:1\n".as_bytes(), Path::new("m"), Some(3)).is_err());
    }

    #[test]
    fn malformed_lines_report_line_number() {
        for (text, line) in [
            ("+1 1:1\n2 1:1\n", 2),
            ("+1 1:1\n+1 x:1\n", 2),
            ("+1 0:1\n", 1),
            ("-1 1:1\n\n-1 3\n", 3),
            ("-1 1:nan\n", 1),
        ] {
            match read(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(read("").is_err());
        assert!(read("# only a comment\n").is_err());
    }
}
