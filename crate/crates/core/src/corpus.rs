//! Labeled tweet corpora: loading, saving, stratified splitting and class
//! balance summaries.
//!
//! Two on-disk formats are supported:
//!
//! * JSONL: one object per line with keys `id`, `text`, `label` and an
//!   optional `aspect`.
//! * TSV: `id<TAB>label<TAB>text`, no header. Aspect corpora use four
//!   columns, `id<TAB>label<TAB>aspect<TAB>text`.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polarity::{Polarity, NUM_CLASSES};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown label {value:?} (expected one of P, N, NEU, NONE)")]
    UnknownLabel { line: usize, value: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: tweet text is empty")]
    EmptyText { line: usize },
    #[error("line {line}: aspect is empty")]
    EmptyAspect { line: usize },
    #[error("record {id:?} cannot be written as TSV: {reason}")]
    Unrepresentable { id: String, reason: &'static str },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

impl CorpusFormat {
    /// Guesses the format from the file extension; anything that is not
    /// `.tsv` is treated as JSONL.
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => CorpusFormat::Tsv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(format!("unknown corpus format {other:?} (expected jsonl or tsv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub label: Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectRecord {
    pub id: String,
    pub text: String,
    pub aspect: String,
    pub label: Polarity,
}

/// Anything carrying an id and a gold label; lets splitting and class
/// summaries work on both plain and aspect corpora.
pub trait Labeled {
    fn id(&self) -> &str;
    fn label(&self) -> Polarity;
}

impl Labeled for TweetRecord {
    fn id(&self) -> &str {
        &self.id
    }
    fn label(&self) -> Polarity {
        self.label
    }
}

impl Labeled for AspectRecord {
    fn id(&self) -> &str {
        &self.id
    }
    fn label(&self) -> Polarity {
        self.label
    }
}

/// An ordered corpus with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus<R> {
    pub records: Vec<R>,
    pub provenance: String,
}

pub type LabeledCorpus = Corpus<TweetRecord>;
pub type AspectCorpus = Corpus<AspectRecord>;

impl<R: Labeled> Corpus<R> {
    pub fn new(records: Vec<R>, provenance: impl Into<String>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (i, r) in records.iter().enumerate() {
            if !seen.insert(r.id()) {
                return Err(CorpusError::DuplicateId { line: i + 1, id: r.id().to_string() });
            }
        }
        Ok(Corpus { records, provenance: provenance.into() })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<Polarity> {
        self.records.iter().map(Labeled::label).collect()
    }
}

#[derive(Deserialize)]
struct JsonLine {
    id: String,
    text: String,
    label: String,
    #[serde(default)]
    aspect: Option<String>,
}

#[derive(Serialize)]
struct JsonLineOut<'a> {
    id: &'a str,
    text: &'a str,
    label: Polarity,
    #[serde(skip_serializing_if = "Option::is_none")]
    aspect: Option<&'a str>,
}

struct RawRecord {
    id: String,
    text: String,
    label: Polarity,
    aspect: Option<String>,
}

fn parse_label(line: usize, value: &str) -> Result<Polarity, CorpusError> {
    value
        .parse()
        .map_err(|_| CorpusError::UnknownLabel { line, value: value.to_string() })
}

fn parse_line(line_no: usize, line: &str, format: CorpusFormat, with_aspect: bool) -> Result<RawRecord, CorpusError> {
    let raw = match format {
        CorpusFormat::Jsonl => {
            let parsed: JsonLine = serde_json::from_str(line)
                .map_err(|e| CorpusError::Parse { line: line_no, message: e.to_string() })?;
            RawRecord {
                label: parse_label(line_no, &parsed.label)?,
                id: parsed.id,
                text: parsed.text,
                aspect: parsed.aspect,
            }
        }
        CorpusFormat::Tsv => {
            let columns = if with_aspect { 4 } else { 3 };
            let fields: Vec<&str> = line.splitn(columns, '\t').collect();
            if fields.len() != columns {
                return Err(CorpusError::Parse {
                    line: line_no,
                    message: format!("expected {columns} tab-separated columns, found {}", fields.len()),
                });
            }
            let label = parse_label(line_no, fields[1])?;
            let (aspect, text) = if with_aspect {
                (Some(fields[2].to_string()), fields[3])
            } else {
                (None, fields[2])
            };
            RawRecord { id: fields[0].to_string(), text: text.to_string(), label, aspect }
        }
    };
    if raw.text.trim().is_empty() {
        return Err(CorpusError::EmptyText { line: line_no });
    }
    Ok(raw)
}

fn read_raw(path: &Path, format: CorpusFormat, with_aspect: bool) -> Result<Vec<(usize, RawRecord)>, CorpusError> {
    let file = fs::File::open(path).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let raw = parse_line(line_no, line, format, with_aspect)?;
        if !seen.insert(raw.id.clone()) {
            return Err(CorpusError::DuplicateId { line: line_no, id: raw.id });
        }
        out.push((line_no, raw));
    }
    Ok(out)
}

fn provenance_of(path: &Path) -> String {
    path.display().to_string()
}

/// Reads a tweet corpus. Blank lines are skipped; every other line must be
/// a valid record.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LabeledCorpus, CorpusError> {
    let records = read_raw(path, format, false)?
        .into_iter()
        .map(|(_, r)| TweetRecord { id: r.id, text: r.text, label: r.label })
        .collect();
    Ok(Corpus { records, provenance: provenance_of(path) })
}

/// Reads an aspect-annotated corpus (JSONL with `aspect`, or 4-column TSV).
pub fn load_aspect_corpus(path: &Path, format: CorpusFormat) -> Result<AspectCorpus, CorpusError> {
    let mut records = Vec::new();
    for (line, r) in read_raw(path, format, true)? {
        let aspect = match r.aspect {
            Some(a) if !a.trim().is_empty() => a,
            _ => return Err(CorpusError::EmptyAspect { line }),
        };
        records.push(AspectRecord { id: r.id, text: r.text, aspect, label: r.label });
    }
    Ok(Corpus { records, provenance: provenance_of(path) })
}

fn check_tsv_field(id: &str, field: &str) -> Result<(), CorpusError> {
    if field.contains('\t') || field.contains('\n') || field.contains('\r') {
        return Err(CorpusError::Unrepresentable { id: id.to_string(), reason: "field contains a tab or newline" });
    }
    Ok(())
}

fn write_all(path: &Path, body: &str) -> Result<(), CorpusError> {
    let mut file = fs::File::create(path).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    file.write_all(body.as_bytes())
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })
}

fn render_line(out: &mut String, id: &str, text: &str, label: Polarity, aspect: Option<&str>, format: CorpusFormat) -> Result<(), CorpusError> {
    match format {
        CorpusFormat::Jsonl => {
            let line = serde_json::to_string(&JsonLineOut { id, text, label, aspect }).expect("record serializes");
            out.push_str(&line);
        }
        CorpusFormat::Tsv => {
            check_tsv_field(id, id)?;
            check_tsv_field(id, text)?;
            out.push_str(id);
            out.push('\t');
            out.push_str(label.code());
            out.push('\t');
            if let Some(aspect) = aspect {
                check_tsv_field(id, aspect)?;
                out.push_str(aspect);
                out.push('\t');
            }
            out.push_str(text);
        }
    }
    out.push('\n');
    Ok(())
}

pub fn save_corpus(corpus: &LabeledCorpus, path: &Path, format: CorpusFormat) -> Result<(), CorpusError> {
    let mut body = String::new();
    for r in &corpus.records {
        render_line(&mut body, &r.id, &r.text, r.label, None, format)?;
    }
    write_all(path, &body)
}

pub fn save_aspect_corpus(corpus: &AspectCorpus, path: &Path, format: CorpusFormat) -> Result<(), CorpusError> {
    let mut body = String::new();
    for r in &corpus.records {
        render_line(&mut body, &r.id, &r.text, r.label, Some(&r.aspect), format)?;
    }
    write_all(path, &body)
}

/// Fraction of each class routed to the training side, plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    train_fraction: f64,
    seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self, CorpusError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(CorpusError::InvalidSplit(format!("train fraction {train_fraction} not in (0, 1)")));
        }
        Ok(SplitSpec { train_fraction, seed })
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of records of a class of size `n` that go to training:
    /// `ceil(fraction * n)`, so a singleton class always lands in training.
    pub fn train_count(&self, n: usize) -> usize {
        let exact = self.train_fraction * n as f64;
        // Absorb representation error such as 0.85 * 20 = 17.000000000000004.
        let count = (exact - 1e-9 * exact.max(1.0)).ceil();
        (count.max(0.0) as usize).min(n)
    }
}

/// Per-class shuffle-then-cut split. Records keep their original corpus order
/// inside each output.
pub fn stratified_split<R: Labeled + Clone>(corpus: &Corpus<R>, spec: &SplitSpec) -> Result<(Corpus<R>, Corpus<R>), CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::InvalidSplit("cannot split an empty corpus".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut to_train = vec![false; corpus.len()];
    for class in Polarity::ALL {
        let mut members: Vec<usize> = corpus
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label() == class)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut rng);
        for &i in &members[..spec.train_count(members.len())] {
            to_train[i] = true;
        }
    }
    let (mut train, mut dev) = (Vec::new(), Vec::new());
    for (record, goes_to_train) in corpus.records.iter().zip(to_train) {
        if goes_to_train {
            train.push(record.clone());
        } else {
            dev.push(record.clone());
        }
    }
    Ok((
        Corpus { records: train, provenance: format!("{} [train]", corpus.provenance) },
        Corpus { records: dev, provenance: format!("{} [dev]", corpus.provenance) },
    ))
}

/// Per-class counts and fractions, in class order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassBalance {
    pub counts: [usize; NUM_CLASSES],
    pub fractions: [f64; NUM_CLASSES],
}

impl ClassBalance {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, class: Polarity) -> usize {
        self.counts[class.index()]
    }

    pub fn fraction(&self, class: Polarity) -> f64 {
        self.fractions[class.index()]
    }
}

pub fn class_distribution<R: Labeled>(corpus: &Corpus<R>) -> ClassBalance {
    let mut counts = [0usize; NUM_CLASSES];
    for r in &corpus.records {
        counts[r.label().index()] += 1;
    }
    let total = corpus.len();
    let fractions = counts.map(|c| if total == 0 { 0.0 } else { c as f64 / total as f64 });
    ClassBalance { counts, fractions }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: usize, label: Polarity) -> TweetRecord {
        TweetRecord { id: format!("t{id}"), text: format!("tweet {id}"), label }
    }

    fn corpus_with(counts: &[(Polarity, usize)]) -> LabeledCorpus {
        let mut records = Vec::new();
        for &(label, n) in counts {
            for _ in 0..n {
                records.push(record(records.len(), label));
            }
        }
        Corpus::new(records, "test").unwrap()
    }

    fn write_temp(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_table_sized_corpus() {
        let mut body = String::new();
        let mut id = 0;
        for (label, n) in [("P", 2782), ("N", 2295), ("NEU", 721), ("NONE", 1346)] {
            for _ in 0..n {
                body.push_str(&format!("{{\"id\":\"{id}\",\"text\":\"hola\",\"label\":\"{label}\"}}\n"));
                id += 1;
            }
        }
        let f = write_temp(&body);
        let corpus = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(corpus.len(), 7144);
        let balance = class_distribution(&corpus);
        assert_eq!(balance.counts, [2782, 2295, 721, 1346]);
        let rounded: Vec<f64> = balance.fractions.iter().map(|f| (f * 100.0).round() / 100.0).collect();
        assert_eq!(rounded, vec![0.39, 0.32, 0.10, 0.19]);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let f = write_temp("");
        assert!(load_corpus(f.path(), CorpusFormat::Jsonl).unwrap().is_empty());
        let balance = class_distribution(&load_corpus(f.path(), CorpusFormat::Tsv).unwrap());
        assert_eq!(balance.counts, [0; 4]);
        assert_eq!(balance.fractions, [0.0; 4]);
    }

    #[test]
    fn unknown_label_names_line_and_value() {
        let f = write_temp("a\tP\thola\nb\tPOS\tadios\n");
        let err = load_corpus(f.path(), CorpusFormat::Tsv).unwrap_err();
        match &err {
            CorpusError::UnknownLabel { line, value } => {
                assert_eq!(*line, 2);
                assert_eq!(value, "POS");
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn duplicate_ids_and_bad_lines_are_rejected() {
        let f = write_temp("{\"id\":\"x\",\"text\":\"a\",\"label\":\"P\"}\n{\"id\":\"x\",\"text\":\"b\",\"label\":\"N\"}\n");
        assert!(matches!(load_corpus(f.path(), CorpusFormat::Jsonl), Err(CorpusError::DuplicateId { line: 2, .. })));
        let f = write_temp("{\"id\":\"x\",\"text\":\"a\"\n");
        assert!(matches!(load_corpus(f.path(), CorpusFormat::Jsonl), Err(CorpusError::Parse { line: 1, .. })));
        let f = write_temp("only\ttwo\n");
        assert!(matches!(load_corpus(f.path(), CorpusFormat::Tsv), Err(CorpusError::Parse { line: 1, .. })));
        let f = write_temp("a\tP\t   \n");
        assert!(matches!(load_corpus(f.path(), CorpusFormat::Tsv), Err(CorpusError::EmptyText { line: 1 })));
    }

    #[test]
    fn aspect_corpora_load_from_both_formats() {
        let f = write_temp("{\"id\":\"1\",\"text\":\"gran gol\",\"aspect\":\"Jugador\",\"label\":\"P\"}\n");
        let c = load_aspect_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(c.records[0].aspect, "Jugador");
        let f = write_temp("1\tN\tArbitro\tque mal\n");
        let c = load_aspect_corpus(f.path(), CorpusFormat::Tsv).unwrap();
        assert_eq!(c.records[0].aspect, "Arbitro");
        assert_eq!(c.records[0].text, "que mal");
        let f = write_temp("{\"id\":\"1\",\"text\":\"gran gol\",\"label\":\"P\"}\n");
        assert!(matches!(load_aspect_corpus(f.path(), CorpusFormat::Jsonl), Err(CorpusError::EmptyAspect { line: 1 })));
    }

    #[test]
    fn tsv_save_rejects_tabs() {
        let corpus = Corpus::new(vec![TweetRecord { id: "a".into(), text: "x\ty".into(), label: Polarity::Positive }], "t").unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        assert!(save_corpus(&corpus, f.path(), CorpusFormat::Tsv).is_err());
        assert!(save_corpus(&corpus, f.path(), CorpusFormat::Jsonl).is_ok());
    }

    #[test]
    fn split_exact_division() {
        let corpus = corpus_with(&[(Polarity::Positive, 100), (Polarity::Negative, 100)]);
        let (train, dev) = stratified_split(&corpus, &SplitSpec::new(0.85, 1).unwrap()).unwrap();
        assert_eq!(class_distribution(&train).counts, [85, 85, 0, 0]);
        assert_eq!(class_distribution(&dev).counts, [15, 15, 0, 0]);
    }

    #[test]
    fn singleton_class_goes_to_train() {
        let corpus = corpus_with(&[(Polarity::Positive, 10), (Polarity::Neutral, 1)]);
        let (train, dev) = stratified_split(&corpus, &SplitSpec::new(0.85, 3).unwrap()).unwrap();
        assert_eq!(train.records.iter().filter(|r| r.label == Polarity::Neutral).count(), 1);
        assert!(dev.records.iter().all(|r| r.label != Polarity::Neutral));
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let corpus = corpus_with(&[(Polarity::Positive, 37), (Polarity::Negative, 21), (Polarity::NoOpinion, 9)]);
        let spec = SplitSpec::new(0.7, 99).unwrap();
        let a = stratified_split(&corpus, &spec).unwrap();
        let b = stratified_split(&corpus, &spec).unwrap();
        assert_eq!(a, b);
        let other = stratified_split(&corpus, &SplitSpec::new(0.7, 100).unwrap()).unwrap();
        assert_ne!(a.0.records, other.0.records);
    }

    #[test]
    fn split_rejects_bad_specs() {
        assert!(SplitSpec::new(0.0, 1).is_err());
        assert!(SplitSpec::new(1.0, 1).is_err());
        assert!(SplitSpec::new(f64::NAN, 1).is_err());
        let empty: LabeledCorpus = Corpus::new(vec![], "e").unwrap();
        assert!(stratified_split(&empty, &SplitSpec::new(0.5, 1).unwrap()).is_err());
    }

    #[test]
    fn balance_arithmetic() {
        let corpus = corpus_with(&[(Polarity::Positive, 3), (Polarity::Negative, 1)]);
        let b = class_distribution(&corpus);
        assert_eq!(b.count(Polarity::Positive), 3);
        assert_eq!(b.fraction(Polarity::Positive), 0.75);
        assert_eq!(b.fraction(Polarity::Negative), 0.25);
        assert_eq!(b.total(), 4);
    }
}
