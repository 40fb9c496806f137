//! Mini-batch training with early stopping on validation loss.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, encode_sequence, AdamConfig, AdamState, CnnError, CnnModel, Mode, SequenceInput, DEFAULT_MAX_LEN};
use crate::embeddings::EmbeddingTable;
use crate::polarity::Polarity;
use crate::preprocess::LabeledTweet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Example<T> {
    pub input: SequenceInput<T>,
    pub label: Polarity,
}

pub fn encode_examples<T: Scalar>(tweets: &[LabeledTweet], table: &EmbeddingTable<T>, max_len: usize) -> Vec<Example<T>> {
    tweets
        .iter()
        .map(|t| Example { input: encode_sequence(&t.tweet.tokens, table, max_len), label: t.label })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_len: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { max_len: DEFAULT_MAX_LEN, batch_size: 32, max_epochs: 100, patience: 5, seed: 42, adam: AdamConfig::default() }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CnnError> {
        if self.batch_size == 0 {
            return Err(CnnError::Config("batch_size must be at least 1".into()));
        }
        if self.patience == 0 {
            return Err(CnnError::Config("patience must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(CnnError::Config("max_epochs must be at least 1".into()));
        }
        if !(self.adam.lr > 0.0 && self.adam.lr.is_finite()) {
            return Err(CnnError::Config(format!("learning rate must be positive, got {}", self.adam.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedCnn<T> {
    pub model: CnnModel<T>,
    pub log: TrainingLog,
}

/// Builds `cnn4` for the examples' embedding dimension and trains it.
pub fn train_with_early_stopping<T: Scalar>(train: &[Example<T>], val: &[Example<T>], config: &TrainConfig) -> Result<TrainedCnn<T>, CnnError> {
    let first = train.first().ok_or(CnnError::EmptySet("training"))?;
    let model = super::build_cnn4(first.input.dim, config.max_len, config.seed)?;
    train_model(model, train, val, config)
}

/// Mean loss and accuracy in eval mode.
pub fn evaluate<T: Scalar>(model: &CnnModel<T>, examples: &[Example<T>]) -> Result<(T, f64), CnnError> {
    let inputs: Vec<&SequenceInput<T>> = examples.iter().map(|e| &e.input).collect();
    let gold: Vec<Polarity> = examples.iter().map(|e| e.label).collect();
    let probs = model.forward(&inputs, Mode::Eval)?;
    let correct = probs.iter().zip(&gold).filter(|(p, &g)| p.argmax() == g).count();
    let accuracy = if examples.is_empty() { 0.0 } else { correct as f64 / examples.len() as f64 };
    Ok((super::cross_entropy(&probs, &gold), accuracy))
}

/// Trains `model` from its current parameters. After every epoch the
/// validation loss is measured; the parameters with the lowest one are
/// kept, and training stops after `patience` epochs without improvement.
pub fn train_model<T: Scalar>(
    mut model: CnnModel<T>,
    train: &[Example<T>],
    val: &[Example<T>],
    config: &TrainConfig,
) -> Result<TrainedCnn<T>, CnnError> {
    config.validate()?;
    if train.is_empty() {
        return Err(CnnError::EmptySet("training"));
    }
    if val.is_empty() {
        return Err(CnnError::EmptySet("validation"));
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(2));
    let mut adam = AdamState::new(config.adam, model.parameter_count());

    let mut best: Option<(T, Vec<T>, usize)> = None;
    let mut since_best = 0;
    let mut epochs = Vec::new();
    let mut stopped_early = false;
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = T::zero();
        for chunk in order.chunks(config.batch_size) {
            let inputs: Vec<&SequenceInput<T>> = chunk.iter().map(|&i| &train[i].input).collect();
            let gold: Vec<Polarity> = chunk.iter().map(|&i| train[i].label).collect();
            let mode = Mode::Train { seed: dropout_rng.gen() };
            let (loss, grad) = model.loss_and_gradient(&inputs, &gold, mode)?;
            total += loss * T::from_usize_lossy(chunk.len());
            adam_step(model.parameters_mut(), &grad, &mut adam)?;
        }
        let (val_loss, val_accuracy) = evaluate(&model, val)?;
        epochs.push(EpochRecord {
            epoch,
            train_loss: (total / T::from_usize_lossy(train.len())).as_f64(),
            val_loss: val_loss.as_f64(),
            val_accuracy,
        });
        if best.as_ref().is_none_or(|(b, _, _)| val_loss < *b) {
            best = Some((val_loss, model.parameters().to_vec(), epoch));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }
    let (_, params, best_epoch) = best.expect("at least one epoch ran");
    model.parameters_mut().copy_from_slice(&params);
    Ok(TrainedCnn { model, log: TrainingLog { epochs, best_epoch, stopped_early } })
}
