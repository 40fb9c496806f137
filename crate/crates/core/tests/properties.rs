use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tweet_polarity::cnn::{Architecture, CnnModel, SequenceInput};
use tweet_polarity::corpus::{stratified_split, Corpus, SplitSpec, TweetRecord};
use tweet_polarity::ensemble::{accuracy, hybrid_predict, macro_f1, ConfusionMatrix};
use tweet_polarity::polarity::{argmax, ClassDistribution};
use tweet_polarity::preprocess::normalize;
use tweet_polarity::Polarity;

fn tweetish() -> impl Strategy<Value = String> {
    prop_oneof![
        "\\PC{0,60}",
        "[jJaAeEiIoOuUhHlL @.…wt:/_ñÑ!¡?¿]{0,40}",
        "(@[a-z]{1,5} |https?://[a-z./]{1,8} |www\\.[a-z]{1,4} |[jJ][aAeE]{1,3}[jJ][aA]? |[a-zA-Z]{1,6}|\\.{1,4}| )*",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn normalize_is_idempotent(s in tweetish()) {
        let once = normalize(&s);
        prop_assert_eq!(normalize(&once), once);
    }
}

fn distribution() -> impl Strategy<Value = ClassDistribution<f64>> {
    prop::array::uniform4(0.0f64..1.0).prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-3).prop_map(|v| {
        let s: f64 = v.iter().sum();
        ClassDistribution::new(v.map(|x| x / s)).unwrap()
    })
}

fn matrix() -> impl Strategy<Value = ConfusionMatrix> {
    prop::array::uniform4(prop::array::uniform4(0u64..500))
        .prop_filter("nonempty", |m| m.iter().flatten().sum::<u64>() > 0)
        .prop_map(ConfusionMatrix::from_counts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn hybrid_of_a_distribution_with_itself_is_its_argmax(p in distribution()) {
        prop_assert_eq!(hybrid_predict(&p, &p).unwrap(), p.argmax());
    }

    #[test]
    fn hybrid_ignores_a_common_positive_scale(p in distribution(), q in distribution(), s in 1e-3f64..1e3) {
        let scaled: [f64; 4] = std::array::from_fn(|i| (s * p.probabilities()[i] + s * q.probabilities()[i]) / 2.0);
        prop_assert_eq!(hybrid_predict(&p, &q).unwrap(), argmax(&scaled));
    }

    #[test]
    fn metrics_survive_relabeling_the_classes(m in matrix(), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let counts = std::array::from_fn(|i| std::array::from_fn(|j| m.counts[perm[i]][perm[j]]));
        let permuted = ConfusionMatrix::from_counts(counts);
        prop_assert!((macro_f1(&m).unwrap() - macro_f1(&permuted).unwrap()).abs() < 1e-12);
        let acc = accuracy(&m).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        prop_assert_eq!(acc, accuracy(&permuted).unwrap());
    }

    #[test]
    fn split_partitions_each_class(labels in prop::collection::vec(0usize..4, 1..120), fraction in 0.05f64..0.95, seed in any::<u64>()) {
        let records: Vec<TweetRecord> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| TweetRecord { id: format!("t{i}"), text: format!("texto {i}"), label: Polarity::ALL[l] })
            .collect();
        let corpus = Corpus::new(records, "prop").unwrap();
        let spec = SplitSpec::new(fraction, seed).unwrap();
        let (train, dev) = stratified_split(&corpus, &spec).unwrap();
        prop_assert_eq!(train.len() + dev.len(), corpus.len());
        let mut ids: Vec<&str> = train.records.iter().chain(&dev.records).map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), corpus.len());
        for c in Polarity::ALL {
            let n = labels.iter().filter(|&&l| l == c.index()).count();
            let in_train = train.records.iter().filter(|r| r.label == c).count();
            prop_assert_eq!(in_train, spec.train_count(n));
        }
    }
}

#[test]
fn cnn_probabilities_sum_to_one() {
    use rand::Rng;
    let arch = Architecture { embedding_dim: 5, max_len: 8, windows: vec![2, 3, 4], filters: 6, hidden: 10, outputs: 4, dropout: 0.2 };
    let model = CnnModel::<f64>::new(arch, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let mut x = SequenceInput::zeros(8, 5);
        x.valid_length = rng.gen_range(1..=8);
        for v in &mut x.data[..x.valid_length * 5] {
            *v = rng.gen_range(-5.0..5.0);
        }
        let p = model.predict_proba(&x).unwrap();
        assert!((p.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
