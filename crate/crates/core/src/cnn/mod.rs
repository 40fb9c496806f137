//! Multi-branch 1D convolutional classifier over embedding sequences.
//!
//! ```text
//! x (L×d) ─┬─ conv w=2, 56 filters ─ selu ─ max-pool ─┐
//!          ├─ conv w=3, 56 filters ─ selu ─ max-pool ─┼─ concat (168)
//!          └─ conv w=4, 56 filters ─ selu ─ max-pool ─┘
//!   ─ dense 200 ─ selu ─ dropout 0.2 ─ dense 4 ─ softmax
//! ```
//!
//! Max pooling only looks at windows lying entirely inside the tweet
//! (`t <= valid_length - w`); a tweet shorter than the window uses the
//! single window at `t = 0`. Padding rows therefore never change the output.
//!
//! All parameters live in one flat vector (see [`ParamLayout`]), which is
//! what the optimizer, the gradient check and serialization operate on.

mod adam;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use train::{encode_examples, train_with_early_stopping, EpochRecord, Example, TrainConfig, TrainedCnn, TrainingLog};

use std::borrow::Borrow;
use std::fs;
use std::path::Path;

use rand::distributions::{Distribution as _, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::EmbeddingTable;
use crate::polarity::{ClassDistribution, Polarity, NUM_CLASSES};
use crate::scalar::{dot, Scalar};

pub const WINDOWS: [usize; 3] = [2, 3, 4];
pub const FILTERS: usize = 56;
pub const HIDDEN: usize = 200;
pub const DROPOUT: f64 = 0.2;
pub const DEFAULT_MAX_LEN: usize = 50;
pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;
/// Probabilities are clamped here before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;
pub const MODEL_FORMAT: &str = "cnn";

#[derive(Debug, Error)]
pub enum CnnError {
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("input has dimension {found}, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("input has {rows} rows, fewer than the widest window ({width})")]
    TooShort { rows: usize, width: usize },
    #[error("batch has {inputs} inputs but {labels} labels")]
    BatchMismatch { inputs: usize, labels: usize },
    #[error("parameter vector has length {found}, expected {expected}")]
    ParameterCount { expected: usize, found: usize },
    #[error("{0} set is empty")]
    EmptySet(&'static str),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub embedding_dim: usize,
    pub max_len: usize,
    pub windows: Vec<usize>,
    pub filters: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub dropout: f64,
}

impl Architecture {
    pub fn cnn4(embedding_dim: usize, max_len: usize) -> Self {
        Architecture {
            embedding_dim,
            max_len,
            windows: WINDOWS.to_vec(),
            filters: FILTERS,
            hidden: HIDDEN,
            outputs: NUM_CLASSES,
            dropout: DROPOUT,
        }
    }

    pub fn pooled_len(&self) -> usize {
        self.windows.len() * self.filters
    }

    pub fn widest_window(&self) -> usize {
        self.windows.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), CnnError> {
        let bad = |m: &str| Err(CnnError::Architecture(m.to_string()));
        if self.embedding_dim == 0 || self.filters == 0 || self.hidden == 0 {
            return bad("dimensions must be positive");
        }
        if self.windows.is_empty() || self.windows.contains(&0) {
            return bad("window widths must be positive");
        }
        if self.max_len < self.widest_window() {
            return Err(CnnError::Architecture(format!(
                "max_len {} is shorter than the widest window {}",
                self.max_len,
                self.widest_window()
            )));
        }
        if self.outputs != NUM_CLASSES {
            return bad("output layer must have one unit per class");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        Ok(())
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(self)
    }

    pub fn parameter_count(&self) -> usize {
        self.layout().total
    }
}

/// Name, shape and offset of one parameter tensor in the flat vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Conv weights are `[filters, width, dim]`, dense weights `[out, in]`,
/// all row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    pub tensors: Vec<TensorSpec>,
    pub total: usize,
    conv_w: Vec<usize>,
    conv_b: Vec<usize>,
    dense_w: usize,
    dense_b: usize,
    out_w: usize,
    out_b: usize,
}

impl ParamLayout {
    fn new(arch: &Architecture) -> Self {
        let mut tensors = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, shape: Vec<usize>| {
            let start = offset;
            let spec = TensorSpec { name, shape, offset: start };
            offset += spec.len();
            tensors.push(spec);
            start
        };
        let mut conv_w = Vec::new();
        let mut conv_b = Vec::new();
        for &w in &arch.windows {
            conv_w.push(push(format!("conv{w}.weight"), vec![arch.filters, w, arch.embedding_dim]));
            conv_b.push(push(format!("conv{w}.bias"), vec![arch.filters]));
        }
        let dense_w = push("dense.weight".into(), vec![arch.hidden, arch.pooled_len()]);
        let dense_b = push("dense.bias".into(), vec![arch.hidden]);
        let out_w = push("output.weight".into(), vec![arch.outputs, arch.hidden]);
        let out_b = push("output.bias".into(), vec![arch.outputs]);
        ParamLayout { tensors, total: offset, conv_w, conv_b, dense_w, dense_b, out_w, out_b }
    }

    pub fn get(&self, name: &str) -> Option<&TensorSpec> {
        self.tensors.iter().find(|t| t.name == name)
    }
}

/// One tweet as an `L×d` matrix; rows at and beyond `valid_length` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInput<T> {
    pub rows: usize,
    pub dim: usize,
    pub data: Vec<T>,
    pub valid_length: usize,
}

impl<T: Scalar> SequenceInput<T> {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        SequenceInput { rows, dim, data: vec![T::zero(); rows * dim], valid_length: 0 }
    }

    pub fn row(&self, t: usize) -> &[T] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }
}

/// First `min(|tokens|, L)` rows hold the token vectors (zero when the token
/// is unknown); the rest is zero padding.
pub fn encode_sequence<T: Scalar, S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable<T>, max_len: usize) -> SequenceInput<T> {
    let dim = table.dimension();
    let mut input = SequenceInput::zeros(max_len, dim);
    input.valid_length = tokens.len().min(max_len);
    for (t, token) in tokens.iter().take(max_len).enumerate() {
        if let Some(v) = table.get(token.as_ref()) {
            input.data[t * dim..(t + 1) * dim].copy_from_slice(v);
        }
    }
    input
}

pub fn selu<T: Scalar>(x: T) -> T {
    let lambda = T::lit(SELU_LAMBDA);
    if x > T::zero() {
        lambda * x
    } else {
        lambda * T::lit(SELU_ALPHA) * x.exp_m1()
    }
}

pub fn selu_derivative<T: Scalar>(x: T) -> T {
    let lambda = T::lit(SELU_LAMBDA);
    if x > T::zero() {
        lambda
    } else {
        lambda * T::lit(SELU_ALPHA) * x.exp()
    }
}

pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Mean of `-ln max(p[gold], 1e-12)`; zero for an empty batch.
pub fn cross_entropy<T: Scalar>(probs: &[ClassDistribution<T>], gold: &[Polarity]) -> T {
    if probs.is_empty() {
        return T::zero();
    }
    let total: T = probs.iter().zip(gold).map(|(p, &g)| -p.get(g).max(T::lit(LOG_FLOOR)).ln()).sum();
    total / T::from_usize_lossy(probs.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Deterministic, no dropout.
    Eval,
    /// Dropout masks drawn from a generator seeded with `seed`.
    Train { seed: u64 },
}

struct Trace<T> {
    /// Per branch and filter: winning position and its pre-activation.
    argmax: Vec<Vec<(usize, T)>>,
    pooled: Vec<T>,
    hidden_pre: Vec<T>,
    /// Post-selu, post-dropout.
    hidden: Vec<T>,
    mask: Option<Vec<T>>,
    probs: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel<T> {
    pub architecture: Architecture,
    layout: ParamLayout,
    params: Vec<T>,
}

/// The `cnn4` network: widths 2/3/4 with 56 filters each, dense 200,
/// dropout 0.2, softmax over 4 classes.
pub fn build_cnn4<T: Scalar>(embedding_dim: usize, max_len: usize, seed: u64) -> Result<CnnModel<T>, CnnError> {
    CnnModel::new(Architecture::cnn4(embedding_dim, max_len), seed)
}

impl<T: Scalar> CnnModel<T> {
    /// Weights uniform in `±sqrt(6 / fan_in)`, biases zero.
    pub fn new(architecture: Architecture, seed: u64) -> Result<Self, CnnError> {
        architecture.validate()?;
        let layout = architecture.layout();
        let mut params = vec![T::zero(); layout.total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for spec in layout.tensors.iter().filter(|s| s.shape.len() > 1) {
            let fan_in: usize = spec.shape[1..].iter().product();
            let limit = (6.0 / fan_in as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            for p in &mut params[spec.range()] {
                *p = T::lit(dist.sample(&mut rng));
            }
        }
        Ok(CnnModel { architecture, layout, params })
    }

    pub fn from_parameters(architecture: Architecture, params: Vec<T>) -> Result<Self, CnnError> {
        architecture.validate()?;
        let layout = architecture.layout();
        if params.len() != layout.total {
            return Err(CnnError::ParameterCount { expected: layout.total, found: params.len() });
        }
        Ok(CnnModel { architecture, layout, params })
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn parameters(&self) -> &[T] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn tensor(&self, name: &str) -> Option<&[T]> {
        self.layout.get(name).map(|s| &self.params[s.range()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [T]> {
        let range = self.layout.get(name)?.range();
        Some(&mut self.params[range])
    }

    fn check_input(&self, input: &SequenceInput<T>) -> Result<(), CnnError> {
        let arch = &self.architecture;
        if input.dim != arch.embedding_dim {
            return Err(CnnError::DimensionMismatch { expected: arch.embedding_dim, found: input.dim });
        }
        if input.rows < arch.widest_window() {
            return Err(CnnError::TooShort { rows: input.rows, width: arch.widest_window() });
        }
        Ok(())
    }

    /// Pooled branch features of one input (the 168-vector for cnn4).
    pub fn pooled_features(&self, input: &SequenceInput<T>) -> Result<Vec<T>, CnnError> {
        self.check_input(input)?;
        Ok(self.pool(input).1)
    }

    fn pool(&self, input: &SequenceInput<T>) -> (Vec<Vec<(usize, T)>>, Vec<T>) {
        let arch = &self.architecture;
        let d = arch.embedding_dim;
        let valid = input.valid_length.min(input.rows);
        let mut argmax = Vec::with_capacity(arch.windows.len());
        let mut pooled = Vec::with_capacity(arch.pooled_len());
        for (b, &w) in arch.windows.iter().enumerate() {
            let positions = if valid >= w { valid - w + 1 } else { 1 };
            let weights = &self.params[self.layout.conv_w[b]..self.layout.conv_w[b] + arch.filters * w * d];
            let biases = &self.params[self.layout.conv_b[b]..self.layout.conv_b[b] + arch.filters];
            let mut best = Vec::with_capacity(arch.filters);
            for f in 0..arch.filters {
                let kernel = &weights[f * w * d..(f + 1) * w * d];
                let mut winner = (0, T::zero());
                let mut winner_act = T::neg_infinity();
                for t in 0..positions {
                    let z = biases[f] + dot(kernel, &input.data[t * d..(t + w) * d]);
                    let a = selu(z);
                    if a > winner_act {
                        winner_act = a;
                        winner = (t, z);
                    }
                }
                best.push(winner);
                pooled.push(winner_act);
            }
            argmax.push(best);
        }
        (argmax, pooled)
    }

    fn dropout_mask(&self, rng: &mut ChaCha8Rng) -> Vec<T> {
        let p = self.architecture.dropout;
        let keep = T::one() / T::lit(1.0 - p);
        let unit = Uniform::new(0.0f64, 1.0);
        (0..self.architecture.hidden)
            .map(|_| if unit.sample(rng) < p { T::zero() } else { keep })
            .collect()
    }

    fn forward_one(&self, input: &SequenceInput<T>, mask_rng: Option<&mut ChaCha8Rng>) -> Trace<T> {
        let arch = &self.architecture;
        let (argmax, pooled) = self.pool(input);
        let n_in = arch.pooled_len();
        let dense_w = &self.params[self.layout.dense_w..self.layout.dense_w + arch.hidden * n_in];
        let dense_b = &self.params[self.layout.dense_b..self.layout.dense_b + arch.hidden];
        let hidden_pre: Vec<T> = (0..arch.hidden)
            .map(|h| dense_b[h] + dot(&dense_w[h * n_in..(h + 1) * n_in], &pooled))
            .collect();
        let mut hidden: Vec<T> = hidden_pre.iter().map(|&z| selu(z)).collect();
        let mask = mask_rng.filter(|_| arch.dropout > 0.0).map(|rng| self.dropout_mask(rng));
        if let Some(mask) = &mask {
            for (h, &m) in hidden.iter_mut().zip(mask) {
                *h *= m;
            }
        }
        let out_w = &self.params[self.layout.out_w..self.layout.out_w + arch.outputs * arch.hidden];
        let out_b = &self.params[self.layout.out_b..self.layout.out_b + arch.outputs];
        let logits: Vec<T> = (0..arch.outputs)
            .map(|o| out_b[o] + dot(&out_w[o * arch.hidden..(o + 1) * arch.hidden], &hidden))
            .collect();
        Trace { argmax, pooled, hidden_pre, hidden, mask, probs: softmax(&logits) }
    }

    fn distribution(probs: &[T]) -> ClassDistribution<T> {
        let mut p = [T::zero(); NUM_CLASSES];
        p.copy_from_slice(probs);
        ClassDistribution::from_normalized(p)
    }

    pub fn forward<B: Borrow<SequenceInput<T>>>(&self, batch: &[B], mode: Mode) -> Result<Vec<ClassDistribution<T>>, CnnError> {
        for input in batch {
            self.check_input(input.borrow())?;
        }
        let mut rng = match mode {
            Mode::Eval => None,
            Mode::Train { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Ok(batch
            .iter()
            .map(|x| Self::distribution(&self.forward_one(x.borrow(), rng.as_mut()).probs))
            .collect())
    }

    pub fn predict_proba(&self, input: &SequenceInput<T>) -> Result<ClassDistribution<T>, CnnError> {
        Ok(self.forward(std::slice::from_ref(input), Mode::Eval)?.remove(0))
    }

    pub fn loss<B: Borrow<SequenceInput<T>>>(&self, batch: &[B], gold: &[Polarity], mode: Mode) -> Result<T, CnnError> {
        check_batch(batch, gold)?;
        Ok(cross_entropy(&self.forward(batch, mode)?, gold))
    }

    /// Mean cross-entropy over the batch and its gradient with respect to
    /// every parameter (same layout as [`CnnModel::parameters`]).
    pub fn loss_and_gradient<B: Borrow<SequenceInput<T>>>(&self, batch: &[B], gold: &[Polarity], mode: Mode) -> Result<(T, Vec<T>), CnnError> {
        check_batch(batch, gold)?;
        for input in batch {
            self.check_input(input.borrow())?;
        }
        let mut grad = vec![T::zero(); self.params.len()];
        if batch.is_empty() {
            return Ok((T::zero(), grad));
        }
        let mut rng = match mode {
            Mode::Eval => None,
            Mode::Train { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        let scale = T::one() / T::from_usize_lossy(batch.len());
        let mut loss = T::zero();
        for (input, &g) in batch.iter().zip(gold) {
            let input = input.borrow();
            let trace = self.forward_one(input, rng.as_mut());
            loss -= trace.probs[g.index()].max(T::lit(LOG_FLOOR)).ln() * scale;
            self.backward_one(input, &trace, g, scale, &mut grad);
        }
        Ok((loss, grad))
    }

    fn backward_one(&self, input: &SequenceInput<T>, trace: &Trace<T>, gold: Polarity, scale: T, grad: &mut [T]) {
        let arch = &self.architecture;
        let lay = &self.layout;
        let (n_in, n_h, n_out, d) = (arch.pooled_len(), arch.hidden, arch.outputs, arch.embedding_dim);

        let mut d_logits = trace.probs.clone();
        d_logits[gold.index()] -= T::one();
        for v in &mut d_logits {
            *v *= scale;
        }

        let mut d_hidden = vec![T::zero(); n_h];
        for o in 0..n_out {
            let row = lay.out_w + o * n_h;
            for h in 0..n_h {
                grad[row + h] += d_logits[o] * trace.hidden[h];
                d_hidden[h] += d_logits[o] * self.params[row + h];
            }
            grad[lay.out_b + o] += d_logits[o];
        }
        if let Some(mask) = &trace.mask {
            for (g, &m) in d_hidden.iter_mut().zip(mask) {
                *g *= m;
            }
        }
        let d_pre: Vec<T> = d_hidden.iter().zip(&trace.hidden_pre).map(|(&g, &z)| g * selu_derivative(z)).collect();

        let mut d_pooled = vec![T::zero(); n_in];
        for h in 0..n_h {
            if d_pre[h] == T::zero() {
                continue;
            }
            let row = lay.dense_w + h * n_in;
            for i in 0..n_in {
                grad[row + i] += d_pre[h] * trace.pooled[i];
                d_pooled[i] += d_pre[h] * self.params[row + i];
            }
            grad[lay.dense_b + h] += d_pre[h];
        }

        for (b, &w) in arch.windows.iter().enumerate() {
            for f in 0..arch.filters {
                let (t, z) = trace.argmax[b][f];
                let dz = d_pooled[b * arch.filters + f] * selu_derivative(z);
                if dz == T::zero() {
                    continue;
                }
                grad[lay.conv_b[b] + f] += dz;
                let kernel = lay.conv_w[b] + f * w * d;
                for (k, &x) in input.data[t * d..(t + w) * d].iter().enumerate() {
                    grad[kernel + k] += dz * x;
                }
            }
        }
    }

    pub fn to_file(&self) -> CnnModelFile<T> {
        CnnModelFile {
            format: MODEL_FORMAT.to_string(),
            version: crate::VERSION.to_string(),
            architecture: self.architecture.clone(),
            tensors: self
                .layout
                .tensors
                .iter()
                .map(|s| NamedTensor { name: s.name.clone(), shape: s.shape.clone(), values: self.params[s.range()].to_vec() })
                .collect(),
        }
    }

    pub fn from_file(file: CnnModelFile<T>) -> Result<Self, CnnError> {
        if file.format != MODEL_FORMAT {
            return Err(CnnError::Format(format!("expected format \"{MODEL_FORMAT}\", found \"{}\"", file.format)));
        }
        file.architecture.validate()?;
        let layout = file.architecture.layout();
        if file.tensors.len() != layout.tensors.len() {
            return Err(CnnError::Format(format!("expected {} tensors, found {}", layout.tensors.len(), file.tensors.len())));
        }
        let mut params = Vec::with_capacity(layout.total);
        for (spec, tensor) in layout.tensors.iter().zip(file.tensors) {
            if tensor.name != spec.name || tensor.shape != spec.shape || tensor.values.len() != spec.len() {
                return Err(CnnError::Format(format!("tensor {} does not match the architecture", tensor.name)));
            }
            params.extend(tensor.values);
        }
        Self::from_parameters(file.architecture, params)
    }

    pub fn save(&self, path: &Path) -> Result<(), CnnError> {
        let json = serde_json::to_string(&self.to_file()).map_err(|e| CnnError::Format(e.to_string()))?;
        fs::write(path, json).map_err(|source| CnnError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, CnnError> {
        let body = fs::read_to_string(path).map_err(|source| CnnError::Io { path: path.display().to_string(), source })?;
        let file: CnnModelFile<T> = serde_json::from_str(&body).map_err(|e| CnnError::Format(e.to_string()))?;
        Self::from_file(file)
    }
}

fn check_batch<B>(batch: &[B], gold: &[Polarity]) -> Result<(), CnnError> {
    if batch.len() != gold.len() {
        return Err(CnnError::BatchMismatch { inputs: batch.len(), labels: gold.len() });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NamedTensor<T> {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<T>,
}

/// On-disk form of a [`CnnModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CnnModelFile<T> {
    pub format: String,
    pub version: String,
    pub architecture: Architecture,
    pub tensors: Vec<NamedTensor<T>>,
}
