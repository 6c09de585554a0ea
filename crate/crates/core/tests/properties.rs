//! Property tests for invariants that hold over whole input families.

use proptest::prelude::*;
use ulstyle::affect::{weighted_prior, SenseEntry};
use ulstyle::corpus::{filter_min_tokens, split_long_documents, CorpusRecord};
use ulstyle::features::{FeatureGroup, FeatureSchema, FeatureVector, Scaler};
use ulstyle::learn::{cross_validate, downsample, evaluate, make_folds, mcc_multiclass, ConfusionMatrix, CvConfig, LabeledDataset};
use ulstyle::stats::{f_test, t_test};
use ulstyle::text::{sentences_from_tokens, text_profile, tokenize, Document, TokenKind};

fn binary_mcc(tp: f64, fn_: f64, fp: f64, tn: f64) -> f64 {
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    if den == 0.0 {
        0.0
    } else {
        (tp * tn - fp * fn_) / den
    }
}

/// Four-column rows (the TIMEX layout), values drawn cyclically.
fn dataset(counts: &[usize], values: &[f64]) -> LabeledDataset {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut v = values.iter().cycle();
    for (c, &n) in counts.iter().enumerate() {
        for i in 0..n {
            rows.push(FeatureVector {
                doc_id: format!("c{c}-{i:03}"),
                values: (0..4).map(|_| *v.next().unwrap()).collect(),
            });
            labels.push(format!("c{c}"));
        }
    }
    LabeledDataset::new(FeatureSchema::new(&[FeatureGroup::Timex]), rows, labels).unwrap()
}

proptest! {
    #[test]
    fn gorodkin_mcc_equals_binary_formula(tp in 0u64..60, fn_ in 0u64..60, fp in 0u64..60, tn in 0u64..60) {
        prop_assume!(tp + fn_ + fp + tn > 0);
        let cm = ConfusionMatrix::from_counts(vec!["p".into(), "n".into()], vec![vec![tp, fn_], vec![fp, tn]]);
        let got = mcc_multiclass(&cm).unwrap();
        let want = binary_mcc(tp as f64, fn_ as f64, fp as f64, tn as f64);
        prop_assert!((got - want).abs() < 1e-12, "{} vs {}", got, want);
    }

    #[test]
    fn metrics_invariant_under_label_renaming(counts in proptest::collection::vec(0u64..20, 9)) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let m: Vec<Vec<u64>> = counts.chunks(3).map(<[u64]>::to_vec).collect();
        let a = evaluate(&ConfusionMatrix::from_counts(vec!["a".into(), "b".into(), "c".into()], m.clone())).unwrap();
        // Rename a->z, b->x, c->y and reorder classes accordingly.
        let perm = [1usize, 2, 0];
        let renamed: Vec<Vec<u64>> = (0..3).map(|i| (0..3).map(|j| m[perm[i]][perm[j]]).collect()).collect();
        let b = evaluate(&ConfusionMatrix::from_counts(vec!["x".into(), "y".into(), "z".into()], renamed)).unwrap();
        prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-12);
        prop_assert!((a.macro_precision - b.macro_precision).abs() < 1e-12);
        prop_assert!((a.accuracy - b.accuracy).abs() < 1e-12);
        prop_assert!((a.mcc - b.mcc).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&a.mcc));
    }

    #[test]
    fn t_statistic_is_antisymmetric(a in proptest::collection::vec(-100.0f64..100.0, 2..30), b in proptest::collection::vec(-100.0f64..100.0, 2..30), welch: bool) {
        if let (Ok(x), Ok(y)) = (t_test(&a, &b, welch), t_test(&b, &a, welch)) {
            prop_assert!((x.t + y.t).abs() <= 1e-9 * x.t.abs().max(1.0));
            prop_assert!((x.p - y.p).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&x.p));
        }
    }

    #[test]
    fn f_statistic_at_least_one(a in proptest::collection::vec(-100.0f64..100.0, 2..30), b in proptest::collection::vec(-100.0f64..100.0, 2..30)) {
        if let Ok(r) = f_test(&a, &b) {
            prop_assert!(r.f >= 1.0);
            prop_assert!((0.0..=1.0).contains(&r.p));
            let s = f_test(&b, &a).unwrap();
            prop_assert_eq!(r.f, s.f);
        }
    }

    #[test]
    fn prior_polarity_is_a_convex_combination(scores in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..12)) {
        let senses: Vec<SenseEntry> = scores
            .iter()
            .enumerate()
            .map(|(i, &(p, n))| SenseEntry { sense_rank: i as u32 + 1, pos_score: p, neg_score: n })
            .collect();
        let (pos, neg) = weighted_prior(&senses);
        let bounds = |f: fn(&(f64, f64)) -> f64| {
            let xs: Vec<f64> = scores.iter().map(f).collect();
            (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        };
        let (lo, hi) = bounds(|s| s.0);
        prop_assert!(pos >= lo - 1e-12 && pos <= hi + 1e-12);
        let (lo, hi) = bounds(|s| s.1);
        prop_assert!(neg >= lo - 1e-12 && neg <= hi + 1e-12);
    }

    #[test]
    fn folds_partition_and_stratify(counts in proptest::collection::vec(10usize..40, 2..4), k in 2usize..10, seed: u64) {
        let data = dataset(&counts, &[0.0]);
        let plan = make_folds(&data, k, seed).unwrap();
        let mut seen = vec![0; data.len()];
        for f in 0..k {
            for i in plan.test_indices(f) {
                seen[i] += 1;
            }
            let train = plan.train_indices(f);
            prop_assert_eq!(train.len() + plan.test_indices(f).len(), data.len());
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
        for c in 0..counts.len() {
            let class = format!("c{c}");
            let per_fold: Vec<usize> = (0..k)
                .map(|f| plan.test_indices(f).iter().filter(|&&i| data.labels[i] == class).count())
                .collect();
            prop_assert!(per_fold.iter().max().unwrap() - per_fold.iter().min().unwrap() <= 1);
        }
        let sizes: Vec<usize> = (0..k).map(|f| plan.test_indices(f).len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn downsampling_balances_exactly(counts in proptest::collection::vec(1usize..50, 2..4), seed: u64) {
        let data = dataset(&counts, &[1.0]);
        let d = downsample(&data, seed).unwrap();
        let min = *counts.iter().min().unwrap();
        prop_assert!(d.class_counts().values().all(|&n| n == min));
        prop_assert_eq!(d.len(), min * counts.len());
    }

    #[test]
    fn scaled_columns_have_zero_mean_unit_std(values in proptest::collection::vec(-1e3f64..1e3, 40..200)) {
        let rows: Vec<Vec<f64>> = values.chunks_exact(4).map(<[f64]>::to_vec).collect();
        prop_assume!(rows.len() >= 10);
        let scaler = Scaler::fit(&rows).unwrap();
        let scaled = scaler.apply_all(&rows);
        let n = scaled.len() as f64;
        for c in 0..4 {
            let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            let spread = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - col.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assume!(spread > 1e-6);
            let mean = scaled.iter().map(|r| r[c]).sum::<f64>() / n;
            let std = (scaled.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((std - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn splitting_is_lossless(parts in proptest::collection::vec((1usize..40, 0u8..3), 1..80), max in 60usize..300) {
        let mut text = String::new();
        let mut n = 0;
        for (len, brk) in parts {
            for _ in 0..len {
                text.push_str(if n % 7 == 0 { "Word " } else { "word " });
                n += 1;
            }
            match brk {
                0 => text.push_str("end. "),
                1 => text.push_str("end.\n\n"),
                _ => {}
            }
            n += usize::from(brk < 2);
        }
        let min = 30;
        let words = |t: &str| -> Vec<String> {
            tokenize(t).iter().filter(|t| t.is_wordlike()).map(|t| t.surface.to_string()).collect()
        };
        let original = CorpusRecord::new("doc", text.clone(), "UL");
        let out = split_long_documents(vec![original], max, min).unwrap();
        let joined: Vec<String> = out.iter().flat_map(|r| words(&r.text)).collect();
        prop_assert_eq!(&joined, &words(&text));
        if words(&text).len() <= max {
            prop_assert_eq!(out.len(), 1);
            prop_assert_eq!(&out[0].id, "doc");
        }
        if out.len() > 1 {
            for (i, r) in out.iter().enumerate() {
                prop_assert_eq!(&r.id, &format!("doc#{}", i + 1));
                prop_assert!(words(&r.text).len() >= min);
            }
            let (kept, dropped) = filter_min_tokens(out.clone(), min);
            prop_assert_eq!(kept.len(), out.len());
            prop_assert!(dropped.is_empty());
        }
    }

    #[test]
    fn sentence_word_counts_sum_to_profile(words in proptest::collection::vec("[A-Za-z]{1,9}", 1..60), stops in proptest::collection::vec(0u8..4, 60)) {
        let mut text = String::new();
        for (i, w) in words.iter().enumerate() {
            text.push_str(w);
            text.push_str(match stops[i] {
                0 => ". ",
                1 => "? ",
                _ => " ",
            });
        }
        let tokens = tokenize(&text);
        let sentences = sentences_from_tokens(&tokens);
        let per_sentence: usize = sentences
            .iter()
            .map(|s| tokens[s.token_start..s.token_end].iter().filter(|t| t.kind != TokenKind::Punctuation).count())
            .sum();
        let p = text_profile(&Document::new("d", text.clone(), "UL")).unwrap();
        prop_assert_eq!(per_sentence, p.words);
        prop_assert_eq!(p.sentences, sentences.len());
    }
}

/// With labels assigned at random, a two-class classifier cannot beat
/// chance: macro F1 stays near one half.
#[test]
fn permuted_labels_give_chance_f1() {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut f1s = Vec::new();
    for seed in 0..10u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..120 * 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut data = dataset(&[60, 60], &values);
        data.labels.shuffle(&mut rng);
        let cfg = CvConfig { seed, ..CvConfig::default() };
        let r = cross_validate(&data, &[FeatureGroup::Timex], &cfg).unwrap();
        f1s.push(r.metrics.macro_f1);
    }
    let mean = f1s.iter().sum::<f64>() / f1s.len() as f64;
    assert!((mean - 0.5).abs() <= 0.1, "mean {mean}, runs {f1s:?}");
}
