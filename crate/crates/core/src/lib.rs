//! Polarity classification of Spanish tweets into four classes
//! (P, N, NEU, NONE).
//!
//! The pipeline has two classifiers and a combiner:
//!
//! * a linear one-vs-one SVM with calibrated probabilities over a
//!   hand-engineered feature vector ([`features`], [`svm`]), built on
//!   resources from [`lexicon`] and [`embeddings`];
//! * a multi-branch 1D convolutional network over word-embedding sequences
//!   ([`cnn`]);
//! * an average-of-probabilities hybrid and the evaluation metrics
//!   ([`ensemble`]).
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the command-line pipeline
//! uses.

pub mod cnn;
pub mod corpus;
pub mod embeddings;
pub mod ensemble;
pub mod features;
pub mod lexicon;
pub mod polarity;
pub mod preprocess;
pub mod scalar;
pub mod svm;

pub use polarity::{ClassDistribution, Polarity, NUM_CLASSES};
pub use scalar::Scalar;

/// Version string embedded in every serialized model.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Real = f64;

pub type EmbeddingTable = embeddings::EmbeddingTable<Real>;
pub type Distribution = ClassDistribution<Real>;
pub type BinarySvmModel = svm::BinarySvmModel<Real>;
pub type OvoModel = svm::OvoModel<Real>;
pub type SvrModel = svm::SvrModel<Real>;
pub type PlattParams = svm::PlattParams<Real>;

pub type EmbeddingTableF32 = embeddings::EmbeddingTable<f32>;
pub type OvoModelF32 = svm::OvoModel<f32>;
pub type WordPolarityModel = lexicon::WordPolarityModel<Real>;
pub type FeatureResources = features::FeatureResources<Real>;
pub type CnnModel = cnn::CnnModel<Real>;
