use std::collections::BTreeSet;
use std::path::PathBuf;

use molforest::classifiers::{ClassifierConfig, ForestConfig};
use molforest::evaluate::{
    auroc, kfold_indices, kfold_splits, run_protocol, training_vocabulary, welch_t, MetricSample, PipelineSpec,
    Protocol,
};
use molforest::featurizer::{FeatureConfig, FeatureKey, FeatureVector, Label};
use molforest::molgraph::parse_smiles;
use proptest::prelude::*;

fn pair_count_auroc(scores: &[f64], labels: &[Label]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (sp, lp) in scores.iter().zip(labels) {
        for (sn, ln) in scores.iter().zip(labels) {
            if lp.is_positive() && !ln.is_positive() {
                pairs += 1.0;
                if sp > sn {
                    wins += 1.0;
                } else if sp == sn {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

fn labeled_scores() -> impl Strategy<Value = (Vec<f64>, Vec<Label>)> {
    (2usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..6, n).prop_map(|v| v.into_iter().map(f64::from).collect()),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(s, mut l)| {
                l[0] = true;
                l[1] = false;
                (s, l.into_iter().map(|b| if b { Label::Positive } else { Label::Negative }).collect())
            })
    })
}

proptest! {
    #[test]
    fn auroc_matches_pair_counting((scores, labels) in labeled_scores()) {
        let fast = auroc(&scores, &labels).unwrap();
        prop_assert!((fast - pair_count_auroc(&scores, &labels)).abs() < 1e-12);
        let warped: Vec<f64> = scores.iter().map(|s| (s * 0.7).exp() - 3.0).collect();
        prop_assert_eq!(auroc(&warped, &labels).unwrap(), fast);
    }

    #[test]
    fn negated_scores_complement(n in 2usize..40, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut labels: Vec<Label> = (0..n).map(|_| if rng.random_bool(0.5) { Label::Positive } else { Label::Negative }).collect();
        labels[0] = Label::Positive;
        labels[1] = Label::Negative;
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let sum = auroc(&scores, &labels).unwrap() + auroc(&neg, &labels).unwrap();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn folds_partition_indices(n in 2usize..200, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(n >= k);
        let folds = kfold_indices(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for f in &folds {
            prop_assert!(f.len() == n / k || f.len() == n.div_ceil(k));
        }
    }
}

/// Two-sided tail of Student's t by Simpson integration of the density on [0, |t|].
fn integrated_p(t: f64, df: f64) -> f64 {
    let ln_c = statrs::function::gamma::ln_gamma((df + 1.0) / 2.0)
        - statrs::function::gamma::ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln();
    let density = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    let steps = 20_000;
    let h = t.abs() / steps as f64;
    let mut acc = density(0.0) + density(t.abs());
    for i in 1..steps {
        acc += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * acc * h / 3.0
}

#[test]
fn welch_matches_integration_oracle() {
    let a = MetricSample::new("a", vec![0.80, 0.82, 0.81]).unwrap();
    let b = MetricSample::new("b", vec![0.70, 0.72, 0.71]).unwrap();
    let r = welch_t(&a, &b).unwrap();
    assert!((r.p - integrated_p(r.t, r.df)).abs() < 1e-9);
    let r = welch_t(&MetricSample::new("c", vec![0.5, 0.9, 0.7, 0.65]).unwrap(), &b).unwrap();
    assert!((r.p - integrated_p(r.t, r.df)).abs() < 1e-9);
}

#[test]
fn welch_p_shrinks_with_mean_gap() {
    let base = [0.1, 0.3, 0.2, 0.25];
    let b = MetricSample::new("b", base.to_vec()).unwrap();
    let mut last = 1.1;
    for shift in [0.0, 0.02, 0.05, 0.1, 0.2, 0.4] {
        let a = MetricSample::new("a", base.iter().map(|v| v + shift).collect()).unwrap();
        let r = welch_t(&a, &b).unwrap();
        assert!((0.0..=1.0).contains(&r.p));
        assert!(r.p < last);
        last = r.p;
    }
}

fn key(text: &str) -> FeatureKey {
    FeatureKey::new(format!("h0.d0|{text}"), 12.0)
}

fn separable_vectors(n: usize) -> (Vec<FeatureVector>, Vec<Label>) {
    (0..n)
        .map(|i| {
            let mut v = FeatureVector::new();
            v.add(key("C;"), 1 + (i % 4) as u32);
            let label = if i % 2 == 0 {
                v.add(key("N;"), 1);
                Label::Positive
            } else {
                v.add(key("O;"), 2);
                Label::Negative
            };
            (v, label)
        })
        .unzip()
}

fn forest_pipeline(trees: usize, features: FeatureConfig) -> PipelineSpec {
    PipelineSpec {
        features,
        kernel: None,
        classifier: ClassifierConfig::Forest(ForestConfig {
            n_trees: trees,
            ..ForestConfig::default()
        }),
    }
}

#[test]
fn separable_data_scores_perfectly_and_repeats() {
    let (v, y) = separable_vectors(40);
    let spec = forest_pipeline(10, FeatureConfig::height(vec![0]));
    let r = run_protocol::<f64>(&spec, &v, &y, Protocol::KFold { k: 5 }, 4).unwrap();
    assert_eq!(r.auroc().mean(), 1.0);
    assert_eq!(r.auroc().stdev(), 0.0);
    assert_eq!(r, run_protocol::<f64>(&spec, &v, &y, Protocol::KFold { k: 5 }, 4).unwrap());
    let shuffled = run_protocol::<f64>(&spec, &v, &y, "shuffle:7".parse().unwrap(), 3).unwrap();
    assert_eq!(shuffled.trials.len(), 7);
    assert_eq!(shuffled.predictions.len(), 7 * (40 - 27));
}

#[test]
fn validation_only_keys_never_reach_the_vocabulary() {
    let (mut v, _) = separable_vectors(30);
    for (i, fv) in v.iter_mut().enumerate() {
        fv.add(key(&format!("U{i};")), 1);
    }
    for split in kfold_splits(v.len(), 5, 1).unwrap() {
        let vocab = training_vocabulary(&v, &split.train);
        let train_keys: BTreeSet<&str> = split
            .train
            .iter()
            .flat_map(|&i| v[i].keys().map(|k| k.text()))
            .collect();
        for &i in &split.validation {
            assert!(vocab.index_of(&format!("h0.d0|U{i};")).is_none());
        }
        assert_eq!(vocab.len(), train_keys.len());
    }
}

fn nitro_fixture() -> (Vec<FeatureVector>, Vec<Label>) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/nitro_rule.tsv");
    let text = std::fs::read_to_string(path).unwrap();
    let cfg = FeatureConfig::height(vec![1]);
    text.lines()
        .skip(1)
        .map(|line| {
            let (smiles, label) = line.split_once('\t').unwrap();
            let g = parse_smiles(smiles).unwrap();
            (
                cfg.featurize(&g).unwrap(),
                Label::from_sign(label.parse().unwrap()).unwrap(),
            )
        })
        .unzip()
}

#[test]
fn nitro_rule_is_learned_from_height_one() {
    let (v, y) = nitro_fixture();
    assert_eq!(v.len(), 200);
    let spec = forest_pipeline(100, FeatureConfig::height(vec![1]));
    let r = run_protocol::<f64>(&spec, &v, &y, Protocol::KFold { k: 10 }, 7).unwrap();
    assert!(r.auroc().mean() >= 0.95, "mean AUROC {}", r.auroc().mean());
}
