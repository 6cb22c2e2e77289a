//! Feature vectors, labeled datasets, and the feature CSV format.
//!
//! The CSV carries one mean-MFCC vector per clip:
//! `source_id,label,c0..c{q-1}` (or `c1..` when c0 is excluded), floats
//! printed with 17 significant digits so a reread is bit-exact. Lines
//! starting with `#` are metadata comments (the config echo) and are
//! preserved on read.

use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// Prints a float with 17 significant digits: enough for a lossless f64
/// roundtrip, and stable across runs.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One clip's features: the mean MFCC vector, its binary label when known,
/// and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Option<u8>,
    pub source_id: String,
}

/// A set of feature vectors of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub source_ids: Vec<String>,
    pub labels: Vec<Option<u8>>,
    /// row-major n x dim
    pub data: Vec<f64>,
    pub dim: usize,
    pub include_c0: bool,
    /// `#`-prefixed metadata lines (without the `#`), as read or to be
    /// written.
    pub meta: Vec<String>,
}

impl FeatureTable {
    pub fn from_vectors(vectors: Vec<FeatureVector>, include_c0: bool) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::Data("no feature vectors".into()));
        };
        let dim = first.values.len();
        if dim == 0 {
            return Err(Error::Data("feature vectors are zero-dimensional".into()));
        }
        let mut source_ids = Vec::with_capacity(vectors.len());
        let mut labels = Vec::with_capacity(vectors.len());
        let mut data = Vec::with_capacity(vectors.len() * dim);
        for v in vectors {
            if v.values.len() != dim {
                return Err(Error::Data(format!(
                    "{}: dimension {} differs from {}",
                    v.source_id,
                    v.values.len(),
                    dim
                )));
            }
            if v.values.iter().any(|x| !x.is_finite()) {
                return Err(Error::Data(format!("{}: non-finite feature", v.source_id)));
            }
            source_ids.push(v.source_id);
            labels.push(v.label);
            data.extend_from_slice(&v.values);
        }
        Ok(Self {
            source_ids,
            labels,
            data,
            dim,
            include_c0,
            meta: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.source_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Keeps only the first `q` coefficients of every row. Valid because
    /// cepstral coefficients are independent of how many are returned.
    pub fn truncated(&self, q: usize) -> Result<FeatureTable> {
        if q == 0 || q > self.dim {
            return Err(Error::Data(format!(
                "cannot truncate {}-dimensional features to q={q}",
                self.dim
            )));
        }
        let mut data = Vec::with_capacity(self.len() * q);
        for i in 0..self.len() {
            data.extend_from_slice(&self.row(i)[..q]);
        }
        Ok(FeatureTable {
            source_ids: self.source_ids.clone(),
            labels: self.labels.clone(),
            data,
            dim: q,
            include_c0: self.include_c0,
            meta: self.meta.clone(),
        })
    }

    /// Converts to a classifier dataset; every row must be labeled.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let mut labels = Vec::with_capacity(self.len());
        for (i, l) in self.labels.iter().enumerate() {
            match l {
                Some(v) => labels.push(*v),
                None => {
                    return Err(Error::Data(format!(
                        "{} has no label; a labeled feature set is required",
                        self.source_ids[i]
                    )))
                }
            }
        }
        Dataset::new(self.data.clone(), labels, self.dim)
    }

    fn column_names(&self) -> Vec<String> {
        let start = if self.include_c0 { 0 } else { 1 };
        (start..start + self.dim).map(|j| format!("c{j}")).collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::new();
        for line in &self.meta {
            text.push_str(&format!("#{line}\n"));
        }
        text.push_str("source_id,label");
        for name in self.column_names() {
            text.push(',');
            text.push_str(&name);
        }
        text.push('\n');
        for i in 0..self.len() {
            text.push_str(&self.source_ids[i]);
            text.push(',');
            if let Some(l) = self.labels[i] {
                text.push_str(&l.to_string());
            }
            for &v in self.row(i) {
                text.push(',');
                text.push_str(&fmt_f64(v));
            }
            text.push('\n');
        }
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<FeatureTable> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<FeatureTable> {
        let mut meta = Vec::new();
        let mut lines = text.lines().enumerate().peekable();
        while let Some((_, line)) = lines.peek() {
            if let Some(rest) = line.strip_prefix('#') {
                meta.push(rest.to_string());
                lines.next();
            } else {
                break;
            }
        }
        let Some((_, header)) = lines.next() else {
            return Err(Error::Data("feature csv has no header".into()));
        };
        let cols: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
        if cols.len() < 3 || cols[0] != "source_id" || cols[1] != "label" {
            return Err(Error::Data(format!(
                "feature csv header must start with source_id,label,c...; got {header:?}"
            )));
        }
        let include_c0 = match cols[2] {
            "c0" => true,
            "c1" => false,
            other => {
                return Err(Error::Data(format!(
                    "first coefficient column must be c0 or c1, got {other:?}"
                )))
            }
        };
        let dim = cols.len() - 2;
        let start = if include_c0 { 0 } else { 1 };
        for (j, col) in cols[2..].iter().enumerate() {
            let expect = format!("c{}", start + j);
            if *col != expect {
                return Err(Error::Data(format!(
                    "coefficient column {} named {col:?}, expected {expect:?}",
                    j + 2
                )));
            }
        }

        let mut source_ids = Vec::new();
        let mut labels = Vec::new();
        let mut data = Vec::new();
        for (lineno, raw) in lines {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 2 {
                return Err(Error::Data(format!(
                    "line {}: {} fields, expected {}",
                    lineno + 1,
                    fields.len(),
                    dim + 2
                )));
            }
            source_ids.push(fields[0].to_string());
            labels.push(match fields[1] {
                "" => None,
                "0" => Some(0),
                "1" => Some(1),
                other => {
                    return Err(Error::Data(format!(
                        "line {}: label {other:?} outside {{0, 1}}",
                        lineno + 1
                    )))
                }
            });
            for f in &fields[2..] {
                let v: f64 = f.parse().map_err(|_| {
                    Error::Data(format!("line {}: bad float {f:?}", lineno + 1))
                })?;
                if !v.is_finite() {
                    return Err(Error::Data(format!("line {}: non-finite feature", lineno + 1)));
                }
                data.push(v);
            }
        }
        if source_ids.is_empty() {
            return Err(Error::Data("feature csv has no rows".into()));
        }
        Ok(FeatureTable {
            source_ids,
            labels,
            data,
            dim,
            include_c0,
            meta,
        })
    }
}

/// A labeled point set for training and evaluation: row-major n x p matrix
/// plus binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    data: Vec<f64>,
    labels: Vec<u8>,
    n: usize,
    p: usize,
}

impl Dataset {
    pub fn new(data: Vec<f64>, labels: Vec<u8>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Data("dataset dimension must be >= 1".into()));
        }
        if labels.is_empty() || data.len() != labels.len() * p {
            return Err(Error::Data(format!(
                "matrix of {} values does not match {} labels at dimension {p}",
                data.len(),
                labels.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("dataset contains non-finite values".into()));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Data("labels must be 0 or 1".into()));
        }
        Ok(Self {
            n: labels.len(),
            data,
            labels,
            p,
        })
    }

    pub fn from_rows(rows: &[(&[f64], u8)]) -> Result<Self> {
        let p = rows.first().map(|(r, _)| r.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * p);
        let mut labels = Vec::with_capacity(rows.len());
        for (r, l) in rows {
            if r.len() != p {
                return Err(Error::Data("ragged dataset rows".into()));
            }
            data.extend_from_slice(r);
            labels.push(*l);
        }
        Self::new(data, labels, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    /// The row-major n x p backing storage.
    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Indices of each class, in dataset order.
    pub fn class_indices(&self) -> [Vec<usize>; 2] {
        let mut out = [Vec::new(), Vec::new()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    /// Requires at least `min_per_class` points in both classes.
    pub fn require_both_classes(&self, min_per_class: usize) -> Result<()> {
        let [c0, c1] = self.class_indices();
        if c0.len() < min_per_class || c1.len() < min_per_class {
            return Err(Error::Data(format!(
                "need at least {min_per_class} points per class, got {} / {}",
                c0.len(),
                c1.len()
            )));
        }
        Ok(())
    }

    /// New dataset from a subset of row indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut data = Vec::with_capacity(indices.len() * self.p);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            data,
            labels,
            n: indices.len(),
            p: self.p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> FeatureTable {
        FeatureTable {
            source_ids: vec!["a.wav".into(), "b.wav".into()],
            labels: vec![Some(0), Some(1)],
            data: vec![0.1, -2.5, 1e-17, 3.0, 0.5, -1.0 / 3.0],
            dim: 3,
            include_c0: true,
            meta: vec![" accent features v1".into(), " alpha=0.97".into()],
        }
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let t = table();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        t.write_csv(&p).unwrap();
        let back = FeatureTable::read_csv(&p).unwrap();
        assert_eq!(back, t);
        // and writing again is byte-identical
        let p2 = dir.path().join("g.csv");
        back.write_csv(&p2).unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn header_reflects_c0_choice() {
        let mut t = table();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        t.write_csv(&p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("source_id,label,c0,c1,c2"));

        t.include_c0 = false;
        t.write_csv(&p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("source_id,label,c1,c2,c3"));
        let back = FeatureTable::read_csv(&p).unwrap();
        assert!(!back.include_c0);
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(FeatureTable::parse_csv("").is_err());
        assert!(FeatureTable::parse_csv("source_id,label,c0\n").is_err());
        assert!(FeatureTable::parse_csv("wrong,label,c0\nx,0,1.0\n").is_err());
        assert!(FeatureTable::parse_csv("source_id,label,c7\nx,0,1.0\n").is_err());
        assert!(FeatureTable::parse_csv("source_id,label,c0\nx,5,1.0\n").is_err());
        assert!(FeatureTable::parse_csv("source_id,label,c0\nx,0,zebra\n").is_err());
        assert!(FeatureTable::parse_csv("source_id,label,c0,c1\nx,0,1.0\n").is_err());
    }

    #[test]
    fn truncation_keeps_prefix() {
        let t = table();
        let cut = t.truncated(2).unwrap();
        assert_eq!(cut.dim, 2);
        assert_eq!(cut.row(0), &[0.1, -2.5]);
        assert_eq!(cut.row(1), &[3.0, 0.5]);
        assert!(t.truncated(4).is_err());
        assert!(t.truncated(0).is_err());
    }

    #[test]
    fn dataset_checks_labels() {
        let t = table();
        let d = t.to_dataset().unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.p(), 3);
        assert_eq!(d.labels(), &[0, 1]);

        let mut unlabeled = table();
        unlabeled.labels[1] = None;
        assert!(unlabeled.to_dataset().is_err());
    }

    #[test]
    fn dataset_subset_preserves_rows() {
        let d = Dataset::from_rows(&[
            (&[1.0, 2.0], 0),
            (&[3.0, 4.0], 1),
            (&[5.0, 6.0], 0),
        ])
        .unwrap();
        let s = d.subset(&[2, 0]);
        assert_eq!(s.row(0), &[5.0, 6.0]);
        assert_eq!(s.row(1), &[1.0, 2.0]);
        assert_eq!(s.labels(), &[0, 0]);
    }

    #[test]
    fn dataset_rejects_bad_shapes() {
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], vec![0, 1], 2).is_err());
        assert!(Dataset::new(vec![], vec![], 2).is_err());
        assert!(Dataset::new(vec![f64::NAN, 1.0], vec![0, 1], 1).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec![0, 2], 1).is_err());
    }
}
