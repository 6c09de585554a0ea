//! Independent oracles for derived values: dense linear algebra, brute-force
//! recounts, closed forms and frozen reference-library outputs.

use nalgebra::DMatrix;
use ulstyle::affect::{EmotionSeeds, EmotionSpace, EMOTIONS};
use ulstyle::features::{analyze, extract_features, FeatureGroup, Resources};
use ulstyle::learn::{mcc_multiclass, ConfusionMatrix};
use ulstyle::lsa::{truncated_svd, SparseMatrix, SvdOptions};
use ulstyle::ner::{to_iob2, EntityTag};
use ulstyle::stats::{approx_randomization, f_test, f_upper_tail, generate_synthetic_corpus, inc_beta, t_test, SynthSpec};
use ulstyle::text::{count_syllables, sentences_from_tokens, text_profile, tokenize, Document, TokenKind};
use ulstyle::timex::TimexTag;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Dense SVD with the crate's sign convention: each left singular vector's
/// largest-magnitude component is positive. Columns sorted by singular value.
fn dense_left_svd(rows: &[Vec<f64>], dims: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("u requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut out = vec![vec![0.0; dims]; rows.len()];
    let mut values = Vec::new();
    for (c, &k) in order.iter().take(dims).enumerate() {
        let col = u.column(k);
        let pivot = col.iter().fold(0.0f64, |best, &x| if x.abs() > best.abs() { x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (r, row) in out.iter_mut().enumerate() {
            row[c] = sign * col[r];
        }
        values.push(svd.singular_values[k]);
    }
    (out, values)
}

#[test]
fn truncated_svd_matches_dense_svd_on_toy_matrix() {
    // 4 words x 3 documents.
    let rows = vec![
        vec![2.0, 0.0, 1.0],
        vec![0.0, 3.0, 1.0],
        vec![1.0, 1.0, 0.0],
        vec![0.0, 0.5, 2.0],
    ];
    let got = truncated_svd(&SparseMatrix::from_dense(&rows), 2, SvdOptions::default());
    let (u, s) = dense_left_svd(&rows, 2);
    for (g, e) in got.singular_values.iter().zip(&s) {
        assert!(close(*g, *e, 1e-9), "{g} vs {e}");
    }
    for (gr, er) in got.u.iter().zip(&u) {
        for (g, e) in gr.iter().zip(er) {
            assert!(close(*g, *e, 1e-9), "{:?} vs {:?}", got.u, u);
        }
    }
}

#[test]
fn truncated_svd_matches_dense_svd_on_random_sparse_matrix() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<Vec<f64>> = (0..30)
        .map(|_| (0..12).map(|_| if rng.gen_bool(0.3) { rng.gen_range(0.5..3.0) } else { 0.0 }).collect())
        .collect();
    let got = truncated_svd(&SparseMatrix::from_dense(&rows), 3, SvdOptions::default());
    let (u, s) = dense_left_svd(&rows, 3);
    for (g, e) in got.singular_values.iter().zip(&s) {
        assert!(close(*g, *e, 1e-8 * e.max(1.0)), "{g} vs {e}");
    }
    for (gr, er) in got.u.iter().zip(&u) {
        for (g, e) in gr.iter().zip(er) {
            assert!(close(*g, *e, 1e-7));
        }
    }
}

#[test]
fn emotion_load_on_dense_svd_space_matches_hand_cosines() {
    let rows = vec![
        vec![2.0, 0.0, 1.0],
        vec![0.0, 3.0, 1.0],
        vec![1.0, 1.0, 0.0],
        vec![0.0, 0.5, 2.0],
    ];
    let vocab: Vec<String> = ["calm", "dread", "river", "smile"].iter().map(|s| s.to_string()).collect();
    let (u, _) = dense_left_svd(&rows, 2);
    let vectors: Vec<f32> = u.iter().flatten().map(|&x| x as f32).collect();
    // anger, disgust, fear -> dread; joy -> smile; sadness -> calm; surprise -> river.
    let seeds_text = "anger\tdread\ndisgust\tdread\nfear\tdread\njoy\tsmile\nsadness\tcalm\nsurprise\triver\n";
    let seeds = EmotionSeeds::parse(seeds_text, "<toy>").unwrap();
    let space = EmotionSpace::from_vectors(2, vocab.clone(), vectors.clone(), &seeds).unwrap();

    let v = |w: &str| {
        let i = vocab.iter().position(|x| x == w).unwrap();
        [vectors[2 * i] as f64, vectors[2 * i + 1] as f64]
    };
    let unit = |x: [f64; 2]| {
        let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
        [x[0] / n, x[1] / n]
    };
    let doc = unit({
        let (a, b, c) = (v("calm"), v("smile"), v("river"));
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    });
    let seed_word = ["dread", "dread", "dread", "smile", "calm", "river"];
    let expected: Vec<f64> = seed_word
        .iter()
        .map(|w| {
            let c = unit(v(w));
            (1.0 + doc[0] * c[0] + doc[1] * c[1]) / 2.0
        })
        .collect();

    let tokens = tokenize("Calm smile, river unknownword.");
    let load = space.emotion_load(&tokens).unwrap();
    for (e, (g, x)) in EMOTIONS.iter().zip(load.similarities.iter().zip(&expected)) {
        assert!(close(*g, *x, 1e-6), "{e}: {g} vs {x}");
    }
    assert!(close(load.pos, (expected[3] + expected[5]) / 2.0, 1e-6));
    assert!(close(load.neg, (expected[0] + expected[1] + expected[2] + expected[4]) / 4.0, 1e-6));
}

fn synthetic_documents(n_per_label: usize, seed: u64) -> Vec<Document> {
    generate_synthetic_corpus(&SynthSpec::genre_template(n_per_label), seed)
        .unwrap()
        .iter()
        .map(|r| r.to_document())
        .collect()
}

/// Recount of spans from the IOB2 rendering for entities and from a token
/// tag array for temporal expressions, over an independent word count.
#[test]
fn coverage_equals_brute_force_recount() {
    let res = Resources::starter();
    let groups = [FeatureGroup::Ne, FeatureGroup::Timex];
    let docs = synthetic_documents(67, 5);
    assert!(docs.len() >= 200);
    let mut nonzero = 0;
    for doc in docs.iter().take(200) {
        let tokens = tokenize(&doc.text);
        let words = tokens.iter().filter(|t| t.kind != TokenKind::Punctuation).count() as f64;
        let sentences = sentences_from_tokens(&tokens);
        let analysis = analyze(doc, &res).unwrap();
        let iob = to_iob2(&tokens, &sentences, &analysis.entities);

        let ne_begins = |tag: &str| iob.lines().filter(|l| l.ends_with(&format!("\tB-{tag}"))).count() as f64;
        let mut expected = Vec::new();
        for tag in EntityTag::ALL {
            expected.push(ne_begins(tag.as_str()) / words);
        }
        expected.push(iob.lines().filter(|l| l.contains("\tB-")).count() as f64 / words);

        let mut marks: Vec<Option<(TimexTag, bool)>> = vec![None; tokens.len()];
        for s in &analysis.timexes {
            for (i, m) in marks.iter_mut().enumerate().take(s.token_end).skip(s.token_start) {
                *m = Some((s.tag, i == s.token_start));
            }
        }
        let tx_begins = |pred: &dyn Fn(TimexTag) -> bool| marks.iter().filter(|m| matches!(m, Some((t, true)) if pred(*t))).count() as f64;
        for tag in TimexTag::ALL {
            expected.push(tx_begins(&|t| t == tag) / words);
        }
        expected.push(tx_begins(&|_| true) / words);

        let got = extract_features(doc, &res, &groups).unwrap().values;
        assert_eq!(got, expected, "{}", doc.id);
        if got[4] > 0.0 {
            nonzero += 1;
        }
    }
    assert!(nonzero > 150);
}

#[test]
fn multi_token_span_counts_once() {
    let mut text = String::from("They moved to New York City last spring");
    let filler = " and we walked".repeat(14);
    text.push_str(&filler);
    text.push('.');
    let doc = Document::new("d", text, "UL");
    assert_eq!(text_profile(&doc).unwrap().words, 50);
    let mut res = Resources::starter();
    res.gazetteer.insert("New York City", EntityTag::Loc).unwrap();
    let v = extract_features(&doc, &res, &[FeatureGroup::Ne]).unwrap().values;
    assert_eq!(v[1], 0.02);
    assert_eq!(v[4], 0.02);
}

#[test]
fn binary_mcc_equals_classic_formula() {
    let (tp, fn_, fp, tn) = (4.0f64, 1.0, 2.0, 3.0);
    let classic = (tp * tn - fp * fn_) / ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    let cm = ConfusionMatrix::from_counts(vec!["pos".into(), "neg".into()], vec![vec![4, 1], vec![2, 3]]);
    let got = mcc_multiclass(&cm).unwrap();
    assert!(close(got, classic, 1e-12));
    assert!(close(got, 10.0 / 600f64.sqrt(), 1e-12));
}

#[test]
fn randomization_matches_exhaustive_enumeration() {
    let a = [1.0, 1.0, 1.0, 0.0];
    let b = [0.0, 1.0, 0.0, 0.0];
    let metric = |xs: &[f64]| xs.iter().sum::<f64>();
    let observed = (metric(&a) - metric(&b)).abs();
    let mut hits = 0;
    for mask in 0u32..16 {
        let (mut xa, mut xb) = (a, b);
        for i in 0..4 {
            if mask & (1 << i) != 0 {
                std::mem::swap(&mut xa[i], &mut xb[i]);
            }
        }
        if (metric(&xa) - metric(&xb)).abs() >= observed {
            hits += 1;
        }
    }
    let exact = hits as f64 / 16.0;
    assert_eq!(exact, 0.5);
    let sampled = approx_randomization(&a, &b, metric, 100_000, 9).unwrap();
    assert!(close(sampled, exact, 0.02), "{sampled} vs {exact}");
    assert_eq!(approx_randomization(&a, &a, metric, 1000, 9).unwrap(), 1.0);
}

// Reference values below were computed once with scipy.stats and
// scipy.special and frozen.

#[test]
fn pooled_t_test_reference() {
    let r = t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[3.0, 4.0, 5.0, 6.0, 7.0], false).unwrap();
    assert_eq!((r.t, r.df), (-2.0, 8.0));
    assert!(close(r.p, 0.08051623795726257, 1e-12));

    let r = t_test(&[1.5, 2.0, 3.0, 4.0, 5.0, 9.0], &[3.0, 4.0, 5.0, 6.0, 7.5], false).unwrap();
    assert!(close(r.t, -0.716578909840659, 1e-12));
    assert!(close(r.p, 0.4918090896556593, 1e-12));
}

#[test]
fn welch_t_test_reference() {
    let r = t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[3.0, 4.0, 5.0, 6.0, 7.5], true).unwrap();
    assert!(close(r.t, -1.9932317910802477, 1e-12));
    assert!(close(r.df, 7.9221990033756615, 1e-10));
    assert!(close(r.p, 0.08171612781998859, 1e-10));
}

#[test]
fn f_test_reference() {
    let r = f_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 6.0, 8.0, 10.0]).unwrap();
    assert_eq!((r.f, r.df_num, r.df_den), (4.0, 4.0, 4.0));
    assert!(close(r.p, 0.20800000000000005, 1e-12));
    assert!(close(2.0 * f_upper_tail(3.7, 7.0, 12.0), 0.04577165575948948, 1e-12));
}

#[test]
fn incomplete_beta_reference() {
    let cases = [
        (0.5, 0.5, 0.3, 0.36901011956554536),
        (2.0, 3.0, 0.4, 0.5248),
        (10.0, 20.0, 0.3, 0.3640040810719437),
        (100.0, 50.0, 0.7, 0.8054481662277528),
        (0.1, 10.0, 0.01, 0.8244896709066988),
    ];
    for (a, b, x, want) in cases {
        let got = inc_beta(a, b, x);
        assert!(close(got, want, 1e-12), "I_{x}({a}, {b}) = {got}, want {want}");
    }
}

/// Dictionary syllable counts for common words; the heuristic must agree
/// on most of them and never be off by more than one.
#[test]
fn syllable_heuristic_calibration() {
    let dictionary: &[(&str, usize)] = &[
        ("traveler", 3),
        ("organized", 3),
        ("the", 1),
        ("cat", 1),
        ("table", 2),
        ("little", 2),
        ("make", 1),
        ("cake", 1),
        ("walked", 1),
        ("wanted", 2),
        ("needed", 2),
        ("boxes", 2),
        ("wishes", 2),
        ("makes", 1),
        ("water", 2),
        ("people", 2),
        ("family", 3),
        ("beautiful", 3),
        ("government", 3),
        ("information", 4),
        ("university", 5),
        ("police", 2),
        ("happy", 2),
        ("city", 2),
        ("story", 2),
        ("legend", 2),
        ("urban", 2),
        ("kidney", 2),
        ("harvested", 3),
        ("bathtub", 2),
        ("operator", 4),
        ("paramedics", 4),
        ("documented", 4),
        ("confirmable", 4),
        ("careful", 2),
        ("remember", 3),
        ("remembers", 3),
        ("submerged", 2),
        ("instructed", 3),
        ("protruding", 3),
        ("slowly", 2),
        ("together", 3),
        ("another", 3),
        ("animal", 3),
        ("yesterday", 3),
        ("holiday", 3),
        ("computer", 3),
        ("telephone", 3),
        ("newspaper", 3),
        ("energy", 3),
        ("material", 4),
        ("library", 3),
        ("hospital", 3),
        ("president", 3),
        ("america", 4),
        ("education", 4),
        ("important", 3),
        ("interesting", 4),
        ("generation", 4),
        ("elephant", 3),
        ("banana", 3),
        ("tomato", 3),
        ("strength", 1),
        ("through", 1),
        ("thought", 1),
        ("house", 1),
        ("mother", 2),
        ("father", 2),
        ("garden", 2),
        ("forest", 2),
        ("princess", 2),
        ("castle", 2),
        ("dragon", 2),
        ("wizard", 2),
        ("queen", 1),
        ("king", 1),
        ("midnight", 2),
        ("morning", 2),
        ("evening", 2),
        ("minute", 2),
    ];
    let mut exact = 0;
    for (word, want) in dictionary {
        let got = count_syllables(word);
        assert!(got.abs_diff(*want) <= 1, "{word}: {got} vs {want}");
        if got == *want {
            exact += 1;
        }
    }
    let rate = exact as f64 / dictionary.len() as f64;
    assert!(rate >= 0.85, "agreement {rate}");
}

/// First two sentences of the kidney-theft story, elision removed. Hand
/// count: 17 + 19 words; dictionary syllables 23 + 30. The heuristic reads
/// "business" as three syllables, so it finds 54 syllables and six complex
/// words where a dictionary finds 53 and five.
#[test]
fn kidney_excerpt_profile() {
    let text = "Dear Friends: I wish to warn you about a new crime ring that is targeting business travelers. \
                This ring is well organized and is currently in most major cities and recently very active in New Orleans.";
    let p = text_profile(&Document::new("kidney", text, "UL")).unwrap();
    assert_eq!(p.words, 36);
    assert_eq!(p.sentences, 2);
    assert_eq!(p.syllables, 54);
    assert_eq!(p.complex_words, 6);
    assert!(p.syllables.abs_diff(53) <= 1);
}
