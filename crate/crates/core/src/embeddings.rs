//! Pre-trained word vectors.
//!
//! Text format, one entry per line: `word v1 v2 ... vd`, space separated,
//! with `.` as decimal separator. The dimension is taken from the first
//! entry. A leading `count dim` header line (as written by word2vec and
//! fastText) is accepted and skipped.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::scalar::{dot, norm, Scalar};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: component {value:?} is not a finite number")]
    BadComponent { line: usize, value: String },
    #[error("line {line}: entry has no vector components")]
    MissingVector { line: usize },
    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("embedding file contains no entries")]
    Empty,
    #[error("embedding dimension must be positive")]
    ZeroDimension,
}

/// Word → vector map. Vectors are stored contiguously; insertion order is
/// kept so that saving is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<T>,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn new(dimension: usize) -> Result<Self, EmbeddingError> {
        if dimension == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(EmbeddingTable { dimension, words: Vec::new(), index: HashMap::new(), data: Vec::new() })
    }

    /// Adds or overwrites an entry.
    pub fn insert(&mut self, word: impl Into<String>, vector: &[T]) -> Result<(), EmbeddingError> {
        if vector.len() != self.dimension {
            return Err(EmbeddingError::LengthMismatch { left: self.dimension, right: vector.len() });
        }
        if let Some(bad) = vector.iter().find(|v| !v.is_finite()) {
            return Err(EmbeddingError::BadComponent { line: 0, value: bad.to_string() });
        }
        let word = word.into();
        match self.index.get(&word) {
            Some(&row) => {
                self.data[row * self.dimension..(row + 1) * self.dimension].copy_from_slice(vector);
            }
            None => {
                self.index.insert(word.clone(), self.words.len());
                self.words.push(word);
                self.data.extend_from_slice(vector);
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.index
            .get(word)
            .map(|&row| &self.data[row * self.dimension..(row + 1) * self.dimension])
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Mean of the in-vocabulary token vectors; the zero vector when no
    /// token is known.
    pub fn centroid<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<T> {
        let mut sum = vec![T::zero(); self.dimension];
        let mut known = 0usize;
        for vector in tokens.iter().filter_map(|t| self.get(t.as_ref())) {
            for (s, &v) in sum.iter_mut().zip(vector) {
                *s += v;
            }
            known += 1;
        }
        if known > 0 {
            let n = T::from_usize_lossy(known);
            for s in &mut sum {
                *s /= n;
            }
        }
        sum
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let io_err = |source| EmbeddingError::Io { path: path.display().to_string(), source };
        let file = fs::File::open(path).map_err(io_err)?;
        let mut table: Option<EmbeddingTable<T>> = None;
        let mut buf = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(io_err)?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if line_no == 1 && rest.len() == 1 && word.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
                continue;
            }
            if rest.is_empty() {
                return Err(EmbeddingError::MissingVector { line: line_no });
            }
            let table = table.get_or_insert_with(|| EmbeddingTable::new(rest.len()).expect("non-empty vector"));
            if rest.len() != table.dimension {
                return Err(EmbeddingError::DimensionMismatch { line: line_no, expected: table.dimension, found: rest.len() });
            }
            buf.clear();
            for field in rest {
                match field.parse::<T>() {
                    Ok(v) if v.is_finite() => buf.push(v),
                    _ => return Err(EmbeddingError::BadComponent { line: line_no, value: field.to_string() }),
                }
            }
            table.insert(word, &buf)?;
        }
        table.ok_or(EmbeddingError::Empty)
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbeddingError> {
        let io_err = |source| EmbeddingError::Io { path: path.display().to_string(), source };
        let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
        for (row, word) in self.words.iter().enumerate() {
            let mut line = word.clone();
            for v in &self.data[row * self.dimension..(row + 1) * self.dimension] {
                line.push(' ');
                line.push_str(&v.to_string());
            }
            line.push('\n');
            out.write_all(line.as_bytes()).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> Result<T, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let denom = norm(a) * norm(b);
    if denom == T::zero() {
        return Ok(T::zero());
    }
    let c = dot(a, b) / denom;
    Ok(c.max(-T::one()).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(entries: &[(&str, &[f64])]) -> EmbeddingTable<f64> {
        let mut t = EmbeddingTable::new(entries[0].1.len()).unwrap();
        for (w, v) in entries {
            t.insert(*w, v).unwrap();
        }
        t
    }

    fn write_temp(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_300_dim_lines() {
        let mut body = String::new();
        for w in ["feliz", "triste", "casa"] {
            body.push_str(w);
            for k in 0..300 {
                body.push_str(&format!(" {}", k as f64 * 0.001));
            }
            body.push('\n');
        }
        let t = EmbeddingTable::<f64>::load(write_temp(&body).path()).unwrap();
        assert_eq!((t.len(), t.dimension()), (3, 300));
        assert_eq!(t.get("triste").unwrap()[299], 0.299);
    }

    #[test]
    fn dimension_mismatch_reports_line() {
        let mut body = String::from("hola");
        for _ in 0..300 {
            body.push_str(" 0.5");
        }
        body.push_str("\nfeliz 0.1 0.2\n");
        let err = EmbeddingTable::<f64>::load(write_temp(&body).path()).unwrap_err();
        assert!(matches!(err, EmbeddingError::DimensionMismatch { line: 2, expected: 300, found: 2 }));
    }

    #[test]
    fn rejects_non_numeric_and_skips_header() {
        let err = EmbeddingTable::<f64>::load(write_temp("a 1 x\n").path()).unwrap_err();
        assert!(matches!(err, EmbeddingError::BadComponent { line: 1, .. }));
        let err = EmbeddingTable::<f64>::load(write_temp("a 1 nan\n").path()).unwrap_err();
        assert!(matches!(err, EmbeddingError::BadComponent { line: 1, .. }));
        assert!(matches!(EmbeddingTable::<f64>::load(write_temp("").path()), Err(EmbeddingError::Empty)));
        let t = EmbeddingTable::<f64>::load(write_temp("2 3\na 1 2 3\nb 4 5 6\n").path()).unwrap();
        assert_eq!((t.len(), t.dimension()), (2, 3));
    }

    #[test]
    fn later_duplicates_overwrite() {
        let t = EmbeddingTable::<f32>::load(write_temp("a 1 2\nb 0 0\na 3 4\n").path()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("a").unwrap(), &[3.0, 4.0]);
    }

    #[test]
    fn centroid_conventions() {
        let t = table(&[("a", &[1.0, 0.0, 0.0, 0.0]), ("b", &[0.0, 1.0, 0.0, 0.0])]);
        assert_eq!(t.centroid(&["a", "b"]), vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(t.centroid(&["a"]), t.get("a").unwrap());
        assert_eq!(t.centroid(&["zzz", "qq"]), vec![0.0; 4]);
        assert_eq!(t.centroid::<&str>(&[]), vec![0.0; 4]);
        assert_eq!(t.centroid(&["a", "b", "oov"]), t.centroid(&["a", "b"]));
    }

    #[test]
    fn cosine_values() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(cosine(&[1.0], &[1.0, 0.0]).is_err());
    }
}
