//! Synthetic fixtures: a planted-signal corpus whose classes are marked by
//! their own vocabulary, a matching embedding table and lexicon sources.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BIN: &str = env!("CARGO_BIN_EXE_tweet-polarity");

pub const LABELS: [&str; 4] = ["P", "N", "NEU", "NONE"];

pub const CLASS_WORDS: [[&str; 12]; 4] = [
    ["alegre", "genial", "feliz", "bonito", "encanta", "gracias", "brillante", "estupendo", "maravilla", "orgullo", "disfrutar", "precioso"],
    ["triste", "horrible", "odio", "asco", "vergüenza", "fatal", "desastre", "mentira", "culpa", "dolor", "basura", "pésimo"],
    ["quizá", "depende", "regular", "mitad", "normal", "igual", "ambos", "parcial", "dudoso", "mezcla", "equilibrio", "término"],
    ["reunión", "horario", "anuncio", "rueda", "prensa", "sesión", "jornada", "agenda", "directo", "informe", "datos", "enlace"],
];

const STOPWORDS: [&str; 6] = ["el", "la", "de", "que", "y", "en"];

pub const DIM: usize = 16;

fn fillers() -> Vec<String> {
    let syllables = ["ba", "lo", "mi", "ta", "re", "su", "po", "ne", "ca", "di"];
    let mut out = Vec::new();
    for a in syllables {
        for b in syllables {
            if out.len() < 60 && a != b {
                out.push(format!("{a}{b}r"));
            }
        }
    }
    out
}

pub struct Fixture {
    pub dir: PathBuf,
    pub corpus: PathBuf,
    pub aspect_corpus: PathBuf,
    pub embeddings: PathBuf,
    pub pos1: PathBuf,
    pub neg1: PathBuf,
    pub pos2: PathBuf,
    pub neg2: PathBuf,
    pub inflections: PathBuf,
}

fn tweet(rng: &mut ChaCha8Rng, class: usize, fill: &[String]) -> String {
    let mut words: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(2..=3) {
        words.push(CLASS_WORDS[class].choose(rng).unwrap().to_string());
    }
    for _ in 0..rng.gen_range(3..=8) {
        words.push(fill.choose(rng).unwrap().clone());
    }
    words.push(STOPWORDS.choose(rng).unwrap().to_string());
    // distractors from other classes keep the task from being trivial
    let distractors = if rng.gen_bool(0.3) { rng.gen_range(1..=2) } else { 0 };
    for _ in 0..distractors {
        let other = (class + rng.gen_range(1..4)) % 4;
        words.push(CLASS_WORDS[other].choose(rng).unwrap().to_string());
    }
    words.shuffle(rng);
    if rng.gen_bool(0.1) {
        words[0] = words[0].to_uppercase();
    }
    if class == 0 && rng.gen_bool(0.2) {
        words.push("jajaja".into());
    }
    let end = ["", " !", " .", "..."].choose(rng).unwrap();
    format!("{}{end}", words.join(" "))
}

fn json_line(id: &str, label: &str, text: &str, aspect: Option<&str>) -> String {
    let mut v = serde_json::json!({ "id": id, "text": text, "label": label });
    if let Some(a) = aspect {
        v["aspect"] = a.into();
    }
    v.to_string()
}

/// Writes a `n`-tweet corpus and its resources under `dir`.
pub fn planted(dir: &Path, n: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fill = fillers();
    let mut lines = Vec::new();
    let mut aspect_lines = Vec::new();
    let aspects = ["equipo", "gobierno", "película"];
    for i in 0..n {
        let class = rng.gen_range(0..4);
        let text = tweet(&mut rng, class, &fill);
        lines.push(json_line(&format!("t{i:04}"), LABELS[class], &text, None));
        if i < n / 2 {
            let aspect = aspects[i % 3];
            aspect_lines.push(json_line(&format!("a{i:04}"), LABELS[class], &format!("{aspect} {text}"), Some(aspect)));
        }
    }
    let corpus = dir.join("corpus.jsonl");
    fs::write(&corpus, lines.join("\n") + "\n").unwrap();
    let aspect_corpus = dir.join("aspects.jsonl");
    fs::write(&aspect_corpus, aspect_lines.join("\n") + "\n").unwrap();

    let mut table = String::new();
    let vector = |rng: &mut ChaCha8Rng, class: Option<usize>| -> String {
        let v: Vec<String> = (0..DIM)
            .map(|k| {
                let signal = if class == Some(k % 4) && k < 8 { 1.0 } else { 0.0 };
                format!("{:.5}", signal + rng.gen_range(-0.5..0.5))
            })
            .collect();
        v.join(" ")
    };
    for (c, words) in CLASS_WORDS.iter().enumerate() {
        for w in words {
            table.push_str(&format!("{w} {}\n", vector(&mut rng, Some(c))));
        }
    }
    for w in fill.iter().map(String::as_str).chain(STOPWORDS).chain(["jaja", "equipo", "gobierno", "película", "!", "."]) {
        table.push_str(&format!("{w} {}\n", vector(&mut rng, None)));
    }
    let embeddings = dir.join("embeddings.txt");
    fs::write(&embeddings, table).unwrap();

    let list = |name: &str, words: &[&str]| {
        let p = dir.join(name);
        fs::write(&p, format!("# {name}\n{}\n", words.join("\n"))).unwrap();
        p
    };
    let p = &CLASS_WORDS[0];
    let ng = &CLASS_WORDS[1];
    let pos1 = list("pos1.txt", &[&p[..], &["quizá", "ambos"]].concat());
    let neg1 = list("neg1.txt", &[&ng[..], &["regular"]].concat());
    let pos2 = list("pos2.txt", &[&p[1..], &["ambos", "barer"]].concat());
    let neg2 = list("neg2.txt", &[&ng[..11], &["regular", "dudoso"]].concat());
    let inflections = dir.join("inflections.tsv");
    fs::write(&inflections, "feliz\tfelices\ntriste\ttristes,tristeza\n").unwrap();
    Fixture { dir: dir.to_path_buf(), corpus, aspect_corpus, embeddings, pos1, neg1, pos2, neg2, inflections }
}

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

/// Runs the binary and panics with its stderr on failure.
pub fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
