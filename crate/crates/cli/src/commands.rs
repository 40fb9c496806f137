use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use tweet_polarity::cnn::{self, AdamConfig, CnnModel, TrainConfig};
use tweet_polarity::corpus::{
    class_distribution, load_aspect_corpus, load_corpus, save_aspect_corpus, save_corpus, stratified_split, Corpus, CorpusFormat,
    LabeledCorpus, SplitSpec, TweetRecord,
};
use tweet_polarity::embeddings::EmbeddingTable;
use tweet_polarity::ensemble::{self, load_predictions, save_predictions, Prediction};
use tweet_polarity::features::{
    default_negators, default_stopwords, extract_svm1, extract_svm2, extract_task1, lexicon_centroids, top_k_relevant_words,
    AspectInventory, FeatureResources, Svm1Resources, Vocabulary, BOW_SIZE, DEFAULT_NEAR_THRESHOLD,
};
use tweet_polarity::lexicon::{
    compute_markers, expand_with_inflections, intersect_lexicons, load_word_list, train_polarity_predictor, InflectionMap, Lexicon,
    MarkerLists, WordPolarityModel, DEFAULT_MARKER_MIN_COUNT, DEFAULT_MARKER_THRESHOLD,
};
use tweet_polarity::preprocess::{analyze, AspectTweet, LabeledTweet, TokenizedTweet};
use tweet_polarity::svm::{train_ovo, SvmConfig, SvrConfig};
use tweet_polarity::{Polarity, Real, VERSION};

use crate::artifacts::{
    read_lexicon, read_model, read_polarity, write_json, CnnFile, LexiconFile, ModelFile, PolarityFile, SvmFeatures, SvmFile, CNN_FORMAT,
    LEXICON_FORMAT, POLARITY_FORMAT, SVM_FORMAT,
};
use crate::config::{Config, DEFAULT_SPLIT_FRACTION, DEFAULT_VAL_FRACTION};
use crate::{ResourceArgs, Task};

/// Svm1 vocabulary keeps words found in at least this many training tweets.
const SVM1_MIN_DF: usize = 2;

fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "corpus".into(), |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn balance_line<R: tweet_polarity::corpus::Labeled>(name: &str, corpus: &Corpus<R>) -> String {
    let b = class_distribution(corpus);
    let parts: Vec<String> = Polarity::ALL.iter().map(|&c| format!("{c}={}", b.count(c))).collect();
    format!("{name}: {} records ({})", b.total(), parts.join(" "))
}

pub fn split(
    config: &Config,
    corpus: &Path,
    fraction: Option<f64>,
    seed: Option<u64>,
    train_out: Option<PathBuf>,
    dev_out: Option<PathBuf>,
    aspect: bool,
) -> Result<()> {
    let fraction = config.pick(fraction, "split_fraction", DEFAULT_SPLIT_FRACTION)?;
    let seed = config.seed(seed)?;
    let spec = SplitSpec::new(fraction, seed)?;
    let format = CorpusFormat::from_path(corpus);
    let train_out = train_out.unwrap_or_else(|| sibling(corpus, "train"));
    let dev_out = dev_out.unwrap_or_else(|| sibling(corpus, "dev"));
    if aspect {
        let data = load_aspect_corpus(corpus, format)?;
        let (train, dev) = stratified_split(&data, &spec)?;
        save_aspect_corpus(&train, &train_out, CorpusFormat::from_path(&train_out))?;
        save_aspect_corpus(&dev, &dev_out, CorpusFormat::from_path(&dev_out))?;
        eprintln!("{}\n{}", balance_line("train", &train), balance_line("dev", &dev));
    } else {
        let data = load_corpus(corpus, format)?;
        let (train, dev) = stratified_split(&data, &spec)?;
        save_corpus(&train, &train_out, CorpusFormat::from_path(&train_out))?;
        save_corpus(&dev, &dev_out, CorpusFormat::from_path(&dev_out))?;
        eprintln!("{}\n{}", balance_line("train", &train), balance_line("dev", &dev));
    }
    eprintln!("split with fraction {fraction} and seed {seed}: {} / {}", train_out.display(), dev_out.display());
    Ok(())
}

#[derive(Serialize)]
struct PreprocessedRecord<'a> {
    id: &'a str,
    label: Polarity,
    #[serde(flatten)]
    tweet: &'a TokenizedTweet,
}

pub fn preprocess(corpus: &Path, out: &Path) -> Result<()> {
    let data = load_corpus(corpus, CorpusFormat::from_path(corpus))?;
    let mut w = BufWriter::new(fs::File::create(out).with_context(|| format!("creating {}", out.display()))?);
    for r in &data.records {
        let tweet = analyze(&r.text);
        let line = serde_json::to_string(&PreprocessedRecord { id: &r.id, label: r.label, tweet: &tweet })?;
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    eprintln!("preprocessed {} tweets into {}", data.len(), out.display());
    Ok(())
}

pub fn build_lexicon(config: &Config, sources: &[(PathBuf, PathBuf)], inflections: Option<PathBuf>, out: &Path) -> Result<()> {
    let lexicons = sources.iter().map(|(p, n)| Lexicon::load(p, n)).collect::<Result<Vec<_>, _>>()?;
    let mut lexicon = intersect_lexicons(&lexicons)?;
    eprintln!("intersection of {} lexicons: {} positive, {} negative", lexicons.len(), lexicon.positive().len(), lexicon.negative().len());
    if let Some(path) = config.pick_path(inflections, "inflections") {
        let map = InflectionMap::load(&path)?;
        lexicon = expand_with_inflections(&lexicon, &map);
        eprintln!("after inflections: {} positive, {} negative", lexicon.positive().len(), lexicon.negative().len());
    }
    write_json(&LexiconFile { format: LEXICON_FORMAT.into(), version: VERSION.into(), lexicon }, out, true)
}

fn marker_settings(config: &Config, threshold: Option<f64>, min_count: Option<usize>) -> Result<(f64, usize)> {
    Ok((
        config.pick(threshold, "marker_threshold", DEFAULT_MARKER_THRESHOLD)?,
        config.pick(min_count, "marker_min_count", DEFAULT_MARKER_MIN_COUNT)?,
    ))
}

pub fn markers(config: &Config, corpus: &Path, threshold: Option<f64>, min_count: Option<usize>, out: &Path) -> Result<()> {
    let (threshold, min_count) = marker_settings(config, threshold, min_count)?;
    let data = load_corpus(corpus, CorpusFormat::from_path(corpus))?;
    let tweets: Vec<LabeledTweet> = data.records.iter().map(LabeledTweet::from_record).collect();
    let m = compute_markers(&tweets, threshold, min_count)?;
    let sizes: Vec<String> = Polarity::ALL.iter().map(|&c| format!("{c}={}", m.list(c).len())).collect();
    eprintln!("markers: {}", sizes.join(" "));
    write_json(&m, out, true)
}

fn read_markers(path: &Path) -> Result<MarkerLists> {
    let body = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&body).with_context(|| format!("parsing markers {}", path.display()))
}

fn load_table(config: &Config, flag: Option<PathBuf>) -> Result<EmbeddingTable<Real>> {
    let path = config.require_path(flag, "embeddings")?;
    let table = EmbeddingTable::load(&path)?;
    eprintln!("loaded {} vectors of dimension {} from {}", table.len(), table.dimension(), path.display());
    Ok(table)
}

fn svr_config(config: &Config, c: Option<f64>, epsilon: Option<f64>, seed: u64) -> Result<SvrConfig> {
    let defaults = SvrConfig::default();
    Ok(SvrConfig { c: config.pick(c, "svr_c", defaults.c)?, epsilon: config.pick(epsilon, "svr_epsilon", defaults.epsilon)?, seed, ..defaults })
}

pub fn train_polarity(
    config: &Config,
    lexicon: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    c: Option<f64>,
    epsilon: Option<f64>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let seed = config.seed(seed)?;
    let lexicon = read_lexicon(&config.require_path(lexicon, "lexicon")?)?;
    let table = load_table(config, embeddings)?;
    let svr = svr_config(config, c, epsilon, seed)?;
    let model = train_polarity_predictor(&lexicon, &table, &svr)?;
    eprintln!("trained on {} positive and {} negative words", model.positive_words, model.negative_words);
    write_json(&PolarityFile { format: POLARITY_FORMAT.into(), version: VERSION.into(), seed, config: svr, model }, out, false)
}

fn word_list(config: &Config, flag: Option<PathBuf>, key: &str, default: fn() -> BTreeSet<String>) -> Result<BTreeSet<String>> {
    match config.pick_path(flag, key) {
        Some(p) => Ok(load_word_list(&p)?),
        None => Ok(default()),
    }
}

/// Records of either corpus kind; plain tweets get an empty aspect.
fn load_records(path: &Path, task: Task) -> Result<Vec<AspectTweet>> {
    let format = CorpusFormat::from_path(path);
    Ok(match task {
        Task::Task1 => load_corpus(path, format)?
            .records
            .iter()
            .map(|r| AspectTweet { id: r.id.clone(), label: r.label, aspect: String::new(), tweet: analyze(&r.text) })
            .collect(),
        Task::Svm1 | Task::Svm2 => load_aspect_corpus(path, format)?.records.iter().map(AspectTweet::from_record).collect(),
    })
}

fn as_labeled(records: &[AspectTweet]) -> Vec<LabeledTweet> {
    records.iter().map(|r| LabeledTweet { id: r.id.clone(), label: r.label, tweet: r.tweet.clone() }).collect()
}

fn marker_lists(config: &Config, args: &ResourceArgs, train: &[AspectTweet]) -> Result<MarkerLists> {
    match config.pick_path(args.markers.clone(), "markers") {
        Some(p) => read_markers(&p),
        None => {
            let (threshold, min_count) = marker_settings(config, args.marker_threshold, args.marker_min_count)?;
            Ok(compute_markers(&as_labeled(train), threshold, min_count)?)
        }
    }
}

fn build_features(config: &Config, task: Task, args: &ResourceArgs, train: &[AspectTweet], table: Option<&EmbeddingTable<Real>>) -> Result<SvmFeatures> {
    let seed = config.seed(args.seed)?;
    Ok(match task {
        Task::Task1 => {
            let table = table.context("task 1 needs embeddings")?;
            let lexicon = read_lexicon(&config.require_path(args.lexicon.clone(), "lexicon")?)?;
            let markers = marker_lists(config, args, train)?;
            let polarity: WordPolarityModel<Real> = match config.pick_path(args.polarity.clone(), "polarity") {
                Some(p) => read_polarity(&p)?,
                None => train_polarity_predictor(&lexicon, table, &svr_config(config, None, None, seed)?)?,
            };
            if polarity.svr.weights.len() != table.dimension() {
                bail!("polarity model has dimension {}, embeddings have {}", polarity.svr.weights.len(), table.dimension());
            }
            let stopwords = word_list(config, args.stopwords.clone(), "stopwords", default_stopwords)?;
            let negators = word_list(config, args.negators.clone(), "negators", default_negators)?;
            let bow = top_k_relevant_words(train.iter().map(|t| &t.tweet), &stopwords, BOW_SIZE)?;
            let (positive_centroid, negative_centroid) = lexicon_centroids(&lexicon, table);
            let resources = FeatureResources {
                lexicon,
                markers,
                polarity,
                negators,
                stopwords,
                bow,
                positive_centroid,
                negative_centroid,
                near_threshold: config.pick(args.near_threshold, "near_threshold", DEFAULT_NEAR_THRESHOLD)?,
            };
            resources.check(table)?;
            eprintln!("bag-of-words slots: {}", resources.bow.words.join(", "));
            SvmFeatures::Task1 { resources: Box::new(resources) }
        }
        Task::Svm1 => {
            let stopwords = word_list(config, args.stopwords.clone(), "stopwords", default_stopwords)?;
            let resources = Svm1Resources {
                vocabulary: Vocabulary::from_documents(train.iter().map(|t| &t.tweet), &stopwords, SVM1_MIN_DF),
                markers: marker_lists(config, args, train)?,
                aspects: AspectInventory::from_tweets(train),
            };
            SvmFeatures::Svm1 { resources }
        }
        Task::Svm2 => {
            let table = table.context("2-svm2 needs embeddings")?;
            SvmFeatures::Svm2 { aspects: AspectInventory::from_tweets(train), embedding_dim: table.dimension() }
        }
    })
}

fn feature_task(features: &SvmFeatures) -> Task {
    match features {
        SvmFeatures::Task1 { .. } => Task::Task1,
        SvmFeatures::Svm1 { .. } => Task::Svm1,
        SvmFeatures::Svm2 { .. } => Task::Svm2,
    }
}

fn needs_embeddings(task: Task) -> bool {
    task != Task::Svm1
}

fn feature_rows(features: &SvmFeatures, records: &[AspectTweet], table: Option<&EmbeddingTable<Real>>) -> Result<Vec<Vec<Real>>> {
    Ok(match features {
        SvmFeatures::Task1 { resources } => {
            let table = table.context("task 1 needs embeddings")?;
            resources.check(table)?;
            records.iter().map(|r| extract_task1(&r.tweet, table, resources).to_vec()).collect()
        }
        SvmFeatures::Svm1 { resources } => records.iter().map(|r| extract_svm1(r, resources)).collect(),
        SvmFeatures::Svm2 { aspects, embedding_dim } => {
            let table = table.context("2-svm2 needs embeddings")?;
            if table.dimension() != *embedding_dim {
                bail!("model expects {embedding_dim}-dimensional embeddings, got {}", table.dimension());
            }
            records.iter().map(|r| extract_svm2(r, table, aspects)).collect()
        }
    })
}

pub fn extract_features(
    config: &Config,
    task: Task,
    corpus: &Path,
    train_corpus: Option<PathBuf>,
    model: Option<PathBuf>,
    args: &ResourceArgs,
    out: &Path,
) -> Result<()> {
    let table = if needs_embeddings(task) { Some(load_table(config, args.embeddings.clone())?) } else { None };
    let features = match model {
        Some(path) => match read_model(&path)? {
            ModelFile::Svm(file) => {
                if feature_task(&file.features) != task {
                    bail!("{} was trained for a different task", path.display());
                }
                file.features
            }
            ModelFile::Cnn(_) => bail!("{} is a CNN model; features come from SVM models", path.display()),
        },
        None => {
            let train = load_records(train_corpus.as_deref().unwrap_or(corpus), task)?;
            build_features(config, task, args, &train, table.as_ref())?
        }
    };
    let records = load_records(corpus, task)?;
    let rows = feature_rows(&features, &records, table.as_ref())?;
    let mut w = BufWriter::new(fs::File::create(out).with_context(|| format!("creating {}", out.display()))?);
    let mut line = String::new();
    for (r, row) in records.iter().zip(&rows) {
        line.clear();
        let _ = write!(line, "{}", r.label.index());
        for v in row {
            let _ = write!(line, " {v}");
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    eprintln!("wrote {} rows of dimension {} to {}", rows.len(), rows.first().map_or(0, Vec::len), out.display());
    Ok(())
}

pub fn train_svm(config: &Config, task: Task, corpus: &Path, args: &ResourceArgs, c: Option<f64>, out: &Path) -> Result<()> {
    let seed = config.seed(args.seed)?;
    let table = if needs_embeddings(task) { Some(load_table(config, args.embeddings.clone())?) } else { None };
    let train = load_records(corpus, task)?;
    let features = build_features(config, task, args, &train, table.as_ref())?;
    let rows = feature_rows(&features, &train, table.as_ref())?;
    let labels: Vec<Polarity> = train.iter().map(|r| r.label).collect();
    let svm = SvmConfig { c: config.pick(c, "svm_c", 1.0)?, seed, ..SvmConfig::default() };
    let model = train_ovo(&rows, &labels, &svm)?;
    let correct = rows.iter().zip(&labels).filter(|(x, &y)| model.predict(x).map(|p| p == y).unwrap_or(false)).count();
    eprintln!(
        "trained {} pair models on {} x {}; training accuracy {:.1}",
        model.trained_pairs(),
        rows.len(),
        model.dimension(),
        100.0 * correct as f64 / rows.len() as f64
    );
    write_json(&SvmFile { format: SVM_FORMAT.into(), version: VERSION.into(), seed, features, model }, out, false)
}

pub struct CnnFlags {
    pub max_len: Option<usize>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub patience: Option<usize>,
    pub lr: Option<f64>,
    pub val_fraction: Option<f64>,
    pub seed: Option<u64>,
}

fn labeled_tweets(corpus: &LabeledCorpus) -> Vec<LabeledTweet> {
    corpus.records.iter().map(LabeledTweet::from_record).collect()
}

pub fn train_cnn(config: &Config, corpus: &Path, val: Option<PathBuf>, embeddings: Option<PathBuf>, flags: &CnnFlags, out: &Path) -> Result<()> {
    let seed = config.seed(flags.seed)?;
    let defaults = TrainConfig::default();
    let train_config = TrainConfig {
        max_len: config.pick(flags.max_len, "cnn_max_len", defaults.max_len)?,
        batch_size: config.pick(flags.batch_size, "cnn_batch_size", defaults.batch_size)?,
        max_epochs: config.pick(flags.epochs, "cnn_epochs", defaults.max_epochs)?,
        patience: config.pick(flags.patience, "cnn_patience", defaults.patience)?,
        seed,
        adam: AdamConfig { lr: config.pick(flags.lr, "cnn_lr", defaults.adam.lr)?, ..AdamConfig::default() },
    };
    let table = load_table(config, embeddings)?;
    let data = load_corpus(corpus, CorpusFormat::from_path(corpus))?;
    let (train, val) = match val {
        Some(path) => (data, load_corpus(&path, CorpusFormat::from_path(&path))?),
        None => {
            let fraction = config.pick(flags.val_fraction, "cnn_val_fraction", DEFAULT_VAL_FRACTION)?;
            stratified_split(&data, &SplitSpec::new(1.0 - fraction, seed)?)?
        }
    };
    eprintln!("{}\n{}", balance_line("train", &train), balance_line("validation", &val));
    let train_examples = cnn::encode_examples(&labeled_tweets(&train), &table, train_config.max_len);
    let val_examples = cnn::encode_examples(&labeled_tweets(&val), &table, train_config.max_len);
    let trained = cnn::train_with_early_stopping(&train_examples, &val_examples, &train_config)?;
    for e in &trained.log.epochs {
        eprintln!("epoch {:>3}  train loss {:.4}  val loss {:.4}  val acc {:.1}", e.epoch, e.train_loss, e.val_loss, 100.0 * e.val_accuracy);
    }
    eprintln!("kept epoch {}", trained.log.best_epoch);
    let file = CnnFile {
        format: CNN_FORMAT.into(),
        version: VERSION.into(),
        seed,
        config: train_config,
        log: trained.log,
        network: trained.model.to_file(),
    };
    write_json(&file, out, false)
}

pub fn predict(config: &Config, model: &Path, corpus: &Path, embeddings: Option<PathBuf>, out: &Path) -> Result<()> {
    let predictions: Vec<Prediction> = match read_model(model)? {
        ModelFile::Svm(file) => {
            let task = feature_task(&file.features);
            let table = if needs_embeddings(task) { Some(load_table(config, embeddings)?) } else { None };
            let records = load_records(corpus, task)?;
            let rows = feature_rows(&file.features, &records, table.as_ref())?;
            records
                .iter()
                .zip(&rows)
                .map(|(r, x)| {
                    let p = file.model.predict_proba(x)?;
                    Ok(Prediction { id: r.id.clone(), pred: p.argmax(), proba: Some(p) })
                })
                .collect::<Result<_>>()?
        }
        ModelFile::Cnn(file) => {
            let network = CnnModel::<Real>::from_file(file.network)?;
            let table = load_table(config, embeddings)?;
            if table.dimension() != network.architecture.embedding_dim {
                bail!("model expects {}-dimensional embeddings, got {}", network.architecture.embedding_dim, table.dimension());
            }
            let data = load_corpus(corpus, CorpusFormat::from_path(corpus))?;
            data.records
                .iter()
                .map(|r| {
                    let x = cnn::encode_sequence(&analyze(&r.text).tokens, &table, network.architecture.max_len);
                    let p = network.predict_proba(&x)?;
                    Ok(Prediction { id: r.id.clone(), pred: p.argmax(), proba: Some(p) })
                })
                .collect::<Result<_>>()?
        }
    };
    save_predictions(&predictions, out)?;
    eprintln!("wrote {} predictions to {}", predictions.len(), out.display());
    Ok(())
}

pub fn hybrid_predict(svm: &Path, cnn: &Path, out: &Path) -> Result<()> {
    let combined = ensemble::hybrid_predictions(&load_predictions(svm)?, &load_predictions(cnn)?)?;
    save_predictions(&combined, out)?;
    eprintln!("wrote {} hybrid predictions to {}", combined.len(), out.display());
    Ok(())
}

fn load_gold(path: &Path, aspect: bool) -> Result<LabeledCorpus> {
    let format = CorpusFormat::from_path(path);
    if !aspect {
        return Ok(load_corpus(path, format)?);
    }
    let data = load_aspect_corpus(path, format)?;
    let records = data.records.into_iter().map(|r| TweetRecord { id: r.id, text: r.text, label: r.label }).collect();
    Ok(Corpus::new(records, data.provenance)?)
}

pub fn evaluate(gold: &Path, pred: &Path, report: Option<PathBuf>, aspect: bool) -> Result<()> {
    let gold = load_gold(gold, aspect)?;
    let predictions = load_predictions(pred)?;
    let result = ensemble::evaluate_run(&predictions, &gold)?;
    print!("{}", result.render());
    if let Some(path) = report {
        write_json(&result, &path, true)?;
    }
    Ok(())
}
