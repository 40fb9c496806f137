use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod artifacts;
mod commands;
mod config;

/// Four-class polarity classification of Spanish tweets.
#[derive(Parser, Debug)]
#[command(name = "tweet-polarity", version, about)]
struct Cli {
    /// Flat key = value configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Task {
    /// Tweet-level polarity, full hand-engineered feature vector.
    #[value(name = "1")]
    Task1,
    /// Aspect polarity, bag of words + flags + markers + aspect.
    #[value(name = "2-svm1")]
    Svm1,
    /// Aspect polarity, embedding centroid + aspect.
    #[value(name = "2-svm2")]
    Svm2,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ResourceArgs {
    /// Word embeddings in text format (`word v1 v2 ...`).
    #[arg(long, value_name = "PATH")]
    pub embeddings: Option<PathBuf>,
    /// Lexicon JSON from `build-lexicon`.
    #[arg(long, value_name = "PATH")]
    pub lexicon: Option<PathBuf>,
    /// Markers JSON from `markers`; computed from the training corpus if absent.
    #[arg(long, value_name = "PATH")]
    pub markers: Option<PathBuf>,
    /// Word-polarity model from `train-polarity`; trained on the fly if absent.
    #[arg(long, value_name = "PATH")]
    pub polarity: Option<PathBuf>,
    /// Negator list, one word per line (built-in list by default).
    #[arg(long, value_name = "PATH")]
    pub negators: Option<PathBuf>,
    /// Stopword list, one word per line (built-in list by default).
    #[arg(long, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,
    /// Cosine threshold for the near-centroid counts.
    #[arg(long, value_name = "X")]
    pub near_threshold: Option<f64>,
    #[arg(long, value_name = "X")]
    pub marker_threshold: Option<f64>,
    #[arg(long, value_name = "N")]
    pub marker_min_count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stratified train/dev split.
    Split {
        #[arg(long, value_name = "PATH")]
        corpus: PathBuf,
        /// Training share per class.
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to `<corpus stem>.train.<ext>` next to the corpus.
        #[arg(long, value_name = "PATH")]
        train_out: Option<PathBuf>,
        /// Defaults to `<corpus stem>.dev.<ext>` next to the corpus.
        #[arg(long, value_name = "PATH")]
        dev_out: Option<PathBuf>,
        /// Corpus has an aspect column.
        #[arg(long)]
        aspect: bool,
    },
    /// Normalize and tokenize a corpus into JSONL.
    Preprocess {
        #[arg(long, value_name = "PATH")]
        corpus: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Intersect up to three lexicons and expand with inflections.
    BuildLexicon {
        #[arg(long, value_name = "PATH")]
        pos1: PathBuf,
        #[arg(long, value_name = "PATH")]
        neg1: PathBuf,
        #[arg(long, value_name = "PATH", requires = "neg2")]
        pos2: Option<PathBuf>,
        #[arg(long, value_name = "PATH", requires = "pos2")]
        neg2: Option<PathBuf>,
        #[arg(long, value_name = "PATH", requires = "neg3")]
        pos3: Option<PathBuf>,
        #[arg(long, value_name = "PATH", requires = "pos3")]
        neg3: Option<PathBuf>,
        /// `lemma<TAB>form1,form2,...` per line.
        #[arg(long, value_name = "PATH")]
        inflections: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Category marker words of a labeled corpus.
    Markers {
        #[arg(long, value_name = "PATH")]
        corpus: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        min_count: Option<usize>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Word-polarity regressor from a lexicon and embeddings.
    TrainPolarity {
        #[arg(long, value_name = "PATH")]
        lexicon: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Write feature vectors as text, one row per record, label index first.
    ExtractFeatures {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long, value_name = "PATH")]
        corpus: PathBuf,
        /// Corpus the vocabularies are built from (defaults to --corpus).
        #[arg(long, value_name = "PATH")]
        train_corpus: Option<PathBuf>,
        /// Reuse the resources stored in a trained SVM model.
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        #[command(flatten)]
        resources: ResourceArgs,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// One-vs-one SVM with probability outputs.
    TrainSvm {
        #[arg(long, value_enum, default_value = "1")]
        task: Task,
        #[arg(long, value_name = "PATH")]
        corpus: PathBuf,
        #[command(flatten)]
        resources: ResourceArgs,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// cnn4 convolutional classifier with early stopping.
    TrainCnn {
        #[arg(long, value_name = "PATH")]
        corpus: PathBuf,
        /// Validation corpus; without it a stratified share of --corpus is held out.
        #[arg(long, value_name = "PATH")]
        val: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        val_fraction: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Per-tweet class probabilities from an SVM or CNN model, as JSONL.
    Predict {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long, value_name = "PATH")]
        corpus: PathBuf,
        #[arg(long, value_name = "PATH")]
        embeddings: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Average SVM and CNN probabilities and take the best class.
    HybridPredict {
        #[arg(long, value_name = "PATH")]
        svm_proba: PathBuf,
        #[arg(long, value_name = "PATH")]
        cnn_proba: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Confusion matrix, accuracy and macro-F1 of a predictions file.
    Evaluate {
        #[arg(long, value_name = "PATH")]
        gold: PathBuf,
        #[arg(long, value_name = "PATH")]
        pred: PathBuf,
        /// Also write the report as JSON.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
        /// Gold corpus has an aspect column.
        #[arg(long)]
        aspect: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = config::Config::load_optional(cli.config.as_deref())?;
    match cli.command {
        Command::Split { corpus, fraction, seed, train_out, dev_out, aspect } => {
            commands::split(&config, &corpus, fraction, seed, train_out, dev_out, aspect)
        }
        Command::Preprocess { corpus, out } => commands::preprocess(&corpus, &out),
        Command::BuildLexicon { pos1, neg1, pos2, neg2, pos3, neg3, inflections, out } => {
            let mut sources = vec![(pos1, neg1)];
            sources.extend(pos2.zip(neg2));
            sources.extend(pos3.zip(neg3));
            commands::build_lexicon(&config, &sources, inflections, &out)
        }
        Command::Markers { corpus, threshold, min_count, out } => commands::markers(&config, &corpus, threshold, min_count, &out),
        Command::TrainPolarity { lexicon, embeddings, c, epsilon, seed, out } => {
            commands::train_polarity(&config, lexicon, embeddings, c, epsilon, seed, &out)
        }
        Command::ExtractFeatures { task, corpus, train_corpus, model, resources, out } => {
            commands::extract_features(&config, task, &corpus, train_corpus, model, &resources, &out)
        }
        Command::TrainSvm { task, corpus, resources, c, out } => commands::train_svm(&config, task, &corpus, &resources, c, &out),
        Command::TrainCnn { corpus, val, embeddings, max_len, batch_size, epochs, patience, lr, val_fraction, seed, out } => {
            let flags = commands::CnnFlags { max_len, batch_size, epochs, patience, lr, val_fraction, seed };
            commands::train_cnn(&config, &corpus, val, embeddings, &flags, &out)
        }
        Command::Predict { model, corpus, embeddings, out } => commands::predict(&config, &model, &corpus, embeddings, &out),
        Command::HybridPredict { svm_proba, cnn_proba, out } => commands::hybrid_predict(&svm_proba, &cnn_proba, &out),
        Command::Evaluate { gold, pred, report, aspect } => commands::evaluate(&gold, &pred, report, aspect),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
