//! On-disk formats for the files the pipeline writes. Every model file
//! carries a `format` tag, the crate version and the seed it was built with.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use tweet_polarity::cnn::{CnnModelFile, TrainConfig, TrainingLog};
use tweet_polarity::features::{AspectInventory, FeatureResources, Svm1Resources};
use tweet_polarity::lexicon::{Lexicon, WordPolarityModel};
use tweet_polarity::svm::{OvoModel, SvrConfig};
use tweet_polarity::Real;

pub const LEXICON_FORMAT: &str = "lexicon";
pub const POLARITY_FORMAT: &str = "word-polarity";
pub const SVM_FORMAT: &str = "svm";
pub const CNN_FORMAT: &str = "cnn-classifier";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconFile {
    pub format: String,
    pub version: String,
    #[serde(flatten)]
    pub lexicon: Lexicon,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarityFile {
    pub format: String,
    pub version: String,
    pub seed: u64,
    pub config: SvrConfig,
    pub model: WordPolarityModel<Real>,
}

/// Which SVM feature set a model was trained on, with the resources needed
/// to rebuild its vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum SvmFeatures {
    #[serde(rename = "1")]
    Task1 { resources: Box<FeatureResources<Real>> },
    #[serde(rename = "2-svm1")]
    Svm1 { resources: Svm1Resources },
    #[serde(rename = "2-svm2")]
    Svm2 { aspects: AspectInventory, embedding_dim: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmFile {
    pub format: String,
    pub version: String,
    pub seed: u64,
    pub features: SvmFeatures,
    pub model: OvoModel<Real>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CnnFile {
    pub format: String,
    pub version: String,
    pub seed: u64,
    pub config: TrainConfig,
    pub log: TrainingLog,
    pub network: CnnModelFile<Real>,
}

#[derive(Deserialize)]
struct Header {
    format: String,
}

pub enum ModelFile {
    Svm(Box<SvmFile>),
    Cnn(Box<CnnFile>),
}

pub fn write_json<T: Serialize>(value: &T, path: &Path, pretty: bool) -> Result<()> {
    let mut body = if pretty { serde_json::to_string_pretty(value)? } else { serde_json::to_string(value)? };
    body.push('\n');
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn read_tagged<T: DeserializeOwned>(path: &Path, expected: &str) -> Result<T> {
    let body = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header: Header = serde_json::from_str(&body).with_context(|| format!("{} is not a model file", path.display()))?;
    if header.format != expected {
        bail!("{} has format {:?}, expected {:?}", path.display(), header.format, expected);
    }
    serde_json::from_str(&body).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_lexicon(path: &Path) -> Result<Lexicon> {
    Ok(read_tagged::<LexiconFile>(path, LEXICON_FORMAT)?.lexicon)
}

pub fn read_polarity(path: &Path) -> Result<WordPolarityModel<Real>> {
    Ok(read_tagged::<PolarityFile>(path, POLARITY_FORMAT)?.model)
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let body = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header: Header = serde_json::from_str(&body).with_context(|| format!("{} is not a model file", path.display()))?;
    match header.format.as_str() {
        SVM_FORMAT => Ok(ModelFile::Svm(serde_json::from_str(&body).with_context(|| format!("parsing {}", path.display()))?)),
        CNN_FORMAT => Ok(ModelFile::Cnn(serde_json::from_str(&body).with_context(|| format!("parsing {}", path.display()))?)),
        other => bail!("{} has format {other:?}; expected an svm or cnn model", path.display()),
    }
}
