//! Hybrid SVM + CNN decision and evaluation metrics.
//!
//! The hybrid picks `argmax_c (p_svm[c] + p_cnn[c]) / 2`. Metrics follow the
//! usual confusion-matrix definitions (rows gold, columns predicted); a 0/0
//! precision, recall or F1 counts as 0, and macro-F1 is the unweighted mean
//! over the four classes.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledCorpus;
use crate::polarity::{ClassDistribution, DistributionError, Polarity, NUM_CLASSES};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid {which} distribution: {source}")]
    InvalidDistribution {
        which: &'static str,
        #[source]
        source: DistributionError,
    },
    #[error("{predictions} predictions for {gold} gold labels")]
    LengthMismatch { predictions: usize, gold: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("duplicate id {id:?} in {path}")]
    DuplicateId { path: String, id: String },
    #[error("ids do not match: missing predictions for [{}], unexpected predictions for [{}]", missing.join(", "), extra.join(", "))]
    IdMismatch { missing: Vec<String>, extra: Vec<String> },
    #[error("prediction for {id:?} has no probabilities")]
    MissingProbabilities { id: String },
}

/// Averages the two distributions and returns the best class (ties go to
/// the earlier class). Each input must sum to 1 within 1e-6.
pub fn hybrid_predict<T: Scalar>(p_svm: &ClassDistribution<T>, p_cnn: &ClassDistribution<T>) -> Result<Polarity, EvalError> {
    Ok(hybrid_distribution(p_svm, p_cnn)?.argmax())
}

pub fn hybrid_distribution<T: Scalar>(p_svm: &ClassDistribution<T>, p_cnn: &ClassDistribution<T>) -> Result<ClassDistribution<T>, EvalError> {
    let tol = ClassDistribution::<T>::SUM_TOLERANCE;
    p_svm.validate(tol).map_err(|source| EvalError::InvalidDistribution { which: "svm", source })?;
    p_cnn.validate(tol).map_err(|source| EvalError::InvalidDistribution { which: "cnn", source })?;
    let half = T::lit(0.5);
    let mut avg = [T::zero(); NUM_CLASSES];
    for (i, a) in avg.iter_mut().enumerate() {
        *a = half * (p_svm.probabilities()[i] + p_cnn.probabilities()[i]);
    }
    Ok(ClassDistribution::from_normalized(avg))
}

/// `counts[gold][predicted]`, classes in P, N, NEU, NONE order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn record(&mut self, gold: Polarity, predicted: Polarity) {
        self.counts[gold.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum()
    }

    pub fn row_sum(&self, class: Polarity) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    pub fn column_sum(&self, class: Polarity) -> u64 {
        self.counts.iter().map(|row| row[class.index()]).sum()
    }

    pub fn get(&self, gold: Polarity, predicted: Polarity) -> u64 {
        self.counts[gold.index()][predicted.index()]
    }
}

pub fn confusion_matrix(predictions: &[Polarity], gold: &[Polarity]) -> Result<ConfusionMatrix, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch { predictions: predictions.len(), gold: gold.len() });
    }
    let mut m = ConfusionMatrix::default();
    for (&p, &g) in predictions.iter().zip(gold) {
        m.record(g, p);
    }
    Ok(m)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn accuracy(m: &ConfusionMatrix) -> Result<f64, EvalError> {
    match m.total() {
        0 => Err(EvalError::EmptyMatrix),
        total => Ok(ratio(m.correct(), total)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: [f64; NUM_CLASSES],
    pub recall: [f64; NUM_CLASSES],
    pub per_class_f1: [f64; NUM_CLASSES],
    pub macro_f1: f64,
}

pub fn metrics(m: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let accuracy = accuracy(m)?;
    let mut precision = [0.0; NUM_CLASSES];
    let mut recall = [0.0; NUM_CLASSES];
    let mut per_class_f1 = [0.0; NUM_CLASSES];
    for c in Polarity::ALL {
        let i = c.index();
        let hit = m.counts[i][i];
        precision[i] = ratio(hit, m.column_sum(c));
        recall[i] = ratio(hit, m.row_sum(c));
        let sum = precision[i] + recall[i];
        per_class_f1[i] = if sum > 0.0 { 2.0 * precision[i] * recall[i] / sum } else { 0.0 };
    }
    let macro_f1 = per_class_f1.iter().sum::<f64>() / NUM_CLASSES as f64;
    Ok(Metrics { accuracy, precision, recall, per_class_f1, macro_f1 })
}

pub fn macro_f1(m: &ConfusionMatrix) -> Result<f64, EvalError> {
    metrics(m).map(|x| x.macro_f1)
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub pred: Polarity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proba: Option<ClassDistribution<f64>>,
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>, EvalError> {
    let name = path.display().to_string();
    let body = fs::read_to_string(path).map_err(|source| EvalError::Io { path: name.clone(), source })?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: Prediction = serde_json::from_str(line).map_err(|e| EvalError::Parse { path: name.clone(), line: i + 1, message: e.to_string() })?;
        if let Some(proba) = &p.proba {
            proba.validate(ClassDistribution::<f64>::SUM_TOLERANCE).map_err(|e| EvalError::Parse {
                path: name.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        if !seen.insert(p.id.clone()) {
            return Err(EvalError::DuplicateId { path: name, id: p.id });
        }
        out.push(p);
    }
    Ok(out)
}

pub fn save_predictions(predictions: &[Prediction], path: &Path) -> Result<(), EvalError> {
    let io = |source| EvalError::Io { path: path.display().to_string(), source };
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    for p in predictions {
        let line = serde_json::to_string(p).expect("predictions serialize");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn id_mismatch<'a>(left: impl Iterator<Item = &'a str>, right: impl Iterator<Item = &'a str> + Clone) -> Option<EvalError> {
    let left: Vec<&str> = left.collect();
    let l: HashSet<&str> = left.iter().copied().collect();
    let r: HashSet<&str> = right.clone().collect();
    let missing: Vec<String> = left.iter().filter(|id| !r.contains(*id)).map(|s| s.to_string()).collect();
    let extra: Vec<String> = right.filter(|id| !l.contains(id)).map(str::to_string).collect();
    if missing.is_empty() && extra.is_empty() {
        None
    } else {
        Some(EvalError::IdMismatch { missing, extra })
    }
}

/// Joins the SVM and CNN prediction files by id and applies the hybrid rule.
/// Output follows the SVM file's order.
pub fn hybrid_predictions(svm: &[Prediction], cnn: &[Prediction]) -> Result<Vec<Prediction>, EvalError> {
    if let Some(err) = id_mismatch(svm.iter().map(|p| p.id.as_str()), cnn.iter().map(|p| p.id.as_str())) {
        return Err(err);
    }
    let by_id: HashMap<&str, &Prediction> = cnn.iter().map(|p| (p.id.as_str(), p)).collect();
    svm.iter()
        .map(|s| {
            let c = by_id[s.id.as_str()];
            let missing = |p: &Prediction| EvalError::MissingProbabilities { id: p.id.clone() };
            let ps = s.proba.as_ref().ok_or_else(|| missing(s))?;
            let pc = c.proba.as_ref().ok_or_else(|| missing(c))?;
            let avg = hybrid_distribution(ps, pc)?;
            Ok(Prediction { id: s.id.clone(), pred: avg.argmax(), proba: Some(avg) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub matrix: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Joins predictions to the gold corpus by id. Every gold id needs exactly
/// one prediction and no other ids may appear.
pub fn evaluate_run(predictions: &[Prediction], gold: &LabeledCorpus) -> Result<EvaluationReport, EvalError> {
    if let Some(err) = id_mismatch(gold.records.iter().map(|r| r.id.as_str()), predictions.iter().map(|p| p.id.as_str())) {
        return Err(err);
    }
    let by_id: HashMap<&str, Polarity> = predictions.iter().map(|p| (p.id.as_str(), p.pred)).collect();
    let mut matrix = ConfusionMatrix::default();
    for r in &gold.records {
        matrix.record(r.label, by_id[r.id.as_str()]);
    }
    Ok(EvaluationReport { matrix, metrics: metrics(&matrix)? })
}

impl EvaluationReport {
    /// Plain-text confusion matrix and metrics, percentages to one decimal.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>6} {}", "gold", Polarity::ALL.map(|c| format!("{:>6}", c.code())).join(" "));
        for g in Polarity::ALL {
            let row = Polarity::ALL.map(|p| format!("{:>6}", self.matrix.get(g, p))).join(" ");
            let _ = writeln!(s, "{:>6} {row}", g.code());
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:>6} {:>9} {:>9} {:>9}", "class", "precision", "recall", "F1");
        for c in Polarity::ALL {
            let i = c.index();
            let _ = writeln!(
                s,
                "{:>6} {:>9.1} {:>9.1} {:>9.1}",
                c.code(),
                100.0 * self.metrics.precision[i],
                100.0 * self.metrics.recall[i],
                100.0 * self.metrics.per_class_f1[i]
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "accuracy {:.1}", 100.0 * self.metrics.accuracy);
        let _ = writeln!(s, "M-F1 {:.1}", 100.0 * self.metrics.macro_f1);
        s
    }
}
