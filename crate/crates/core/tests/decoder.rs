use std::f64::consts::LN_10;

use phonotact::acoustic::Posteriorgram;
use phonotact::decoder::{
    collapse_labels, decode_phone_lm, decode_word_lm, default_weight_grid, exhaustive_decode,
    sweep_lm_weight, DecodeConfig, DecodeError, DecodeMode, Lexicon, LmSource, PhoneDecoder,
};
use phonotact::ipa::{tokenize, IpaPhone};
use phonotact::lm::{NGramModel, Smoothing};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POOL: [&str; 5] = ["a", "i", "p", "t", "uː"];

fn phones(s: &str) -> Vec<IpaPhone> {
    tokenize(s).unwrap()
}

fn random_pg(rng: &mut ChaCha8Rng, p: usize, t: usize) -> Posteriorgram {
    let inv: Vec<IpaPhone> = POOL[..p].iter().map(|s| IpaPhone::parse(s).unwrap()).collect();
    let frames = (0..t)
        .map(|_| {
            let logits: Vec<f64> = (0..p).map(|_| rng.random_range(-4.0..0.0)).collect();
            let z = logits.iter().map(|x| x.exp()).sum::<f64>().ln();
            logits.iter().map(|x| x - z).collect()
        })
        .collect();
    Posteriorgram::new(inv, frames).unwrap()
}

fn random_corpus(rng: &mut ChaCha8Rng, tokens: &[&str], n: usize) -> Vec<Vec<String>> {
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..6);
            (0..len)
                .map(|_| tokens[rng.random_range(0..tokens.len())].to_string())
                .collect()
        })
        .collect()
}

fn random_phone_lm(rng: &mut ChaCha8Rng, p: usize, order: usize) -> NGramModel {
    // sometimes leave a phone out so it decodes through <unk>
    let k = if rng.random_bool(0.2) { p - 1 } else { p };
    let n = rng.random_range(3..12);
    let corpus = random_corpus(rng, &POOL[..k.max(1)], n);
    NGramModel::train(&corpus, order, Smoothing::WittenBell).unwrap()
}

#[test]
fn viterbi_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let p = rng.random_range(2..=4);
        let t = rng.random_range(1..=6);
        let pg = random_pg(&mut rng, p, t);
        let order = rng.random_range(1..=3);
        let lm = random_phone_lm(&mut rng, p, order);
        let cfg = DecodeConfig::new(DecodeMode::PhoneLm)
            .with_lm_weight(rng.random_range(0.0..6.0))
            .with_insertion_penalty(rng.random_range(-2.0..2.0));
        let fast = decode_phone_lm(&pg, &lm, &cfg).unwrap();
        let slow = exhaustive_decode(&pg, &lm, &cfg).unwrap();
        assert_eq!(fast.phones, slow.phones, "case {case}");
        assert!((fast.score_total - slow.score_total).abs() < 1e-9, "case {case}");
        assert!((fast.score_acoustic - slow.score_acoustic).abs() < 1e-9, "case {case}");
        assert!((fast.score_lm - slow.score_lm).abs() < 1e-9, "case {case}");
    }
}

#[test]
fn score_decomposes_and_lm_term_is_recomputable() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let pg = random_pg(&mut rng, 4, 12);
        let lm = random_phone_lm(&mut rng, 4, 3);
        let cfg = DecodeConfig::new(DecodeMode::PhoneLm)
            .with_lm_weight(3.5)
            .with_insertion_penalty(-0.5);
        let h = decode_phone_lm(&pg, &lm, &cfg).unwrap();
        let recomposed = h.score_acoustic + 3.5 * h.score_lm - 0.5 * h.phones.len() as f64;
        assert_eq!(h.score_total, recomposed);
        assert!((h.score_lm - lm.logprob_seq(&h.phones) * LN_10).abs() < 1e-9);
        assert!(h.phones.windows(2).all(|w| w[0] != w[1]));
    }
}

#[test]
fn enlarging_the_beam_never_lowers_the_score() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let pg = random_pg(&mut rng, 4, 15);
        let lm = random_phone_lm(&mut rng, 4, 2);
        let mut last = f64::NEG_INFINITY;
        for beam in [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, f64::INFINITY] {
            let cfg = DecodeConfig::new(DecodeMode::PhoneLm)
                .with_lm_weight(4.0)
                .with_beam(beam);
            let s = decode_phone_lm(&pg, &lm, &cfg).unwrap().score_total;
            assert!(s >= last, "beam {beam}: {s} < {last}");
            last = s;
        }
    }
}

#[test]
fn per_frame_shifts_do_not_change_the_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let pg = random_pg(&mut rng, 3, 10);
        let shift: Vec<f64> = (0..10).map(|_| rng.random_range(-20.0..20.0)).collect();
        let moved = pg.shifted(&shift);
        let lm = random_phone_lm(&mut rng, 3, 2);
        let cfg = DecodeConfig::new(DecodeMode::PhoneLm).with_lm_weight(2.0);
        let a = decode_phone_lm(&pg, &lm, &cfg).unwrap();
        let b = decode_phone_lm(&moved, &lm, &cfg).unwrap();
        assert_eq!(a.phones, b.phones);
        assert!((b.score_total - a.score_total - shift.iter().sum::<f64>()).abs() < 1e-8);
    }
}

#[test]
fn zero_weight_and_penalty_give_collapsed_argmax() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let pg = random_pg(&mut rng, 4, 20);
        let lm = random_phone_lm(&mut rng, 4, 3);
        let cfg = DecodeConfig::new(DecodeMode::PhoneLm).with_lm_weight(0.0);
        let h = decode_phone_lm(&pg, &lm, &cfg).unwrap();
        let expect: Vec<IpaPhone> = collapse_labels(&pg.argmax_path())
            .into_iter()
            .map(|i| pg.phones()[i].clone())
            .collect();
        assert_eq!(h.phones, expect);
    }
}

#[test]
fn single_one_hot_frame() {
    let inv = phones("a i u");
    let pg = Posteriorgram::new(inv.clone(), vec![vec![f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY]]).unwrap();
    let lm = NGramModel::uniform(["a", "i", "u"]).unwrap();
    let h = decode_phone_lm(&pg, &lm, &DecodeConfig::new(DecodeMode::PhoneLm)).unwrap();
    assert_eq!(h.phones, phones("i"));
    let slow = exhaustive_decode(&pg, &lm, &DecodeConfig::new(DecodeMode::PhoneLm)).unwrap();
    assert_eq!(slow, h);
}

#[test]
fn reusable_decoder_agrees_with_one_shot() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let lm = random_phone_lm(&mut rng, 4, 3);
    let pg0 = random_pg(&mut rng, 4, 8);
    let mut d = PhoneDecoder::new(&lm, pg0.phones()).unwrap();
    for _ in 0..20 {
        let pg = random_pg(&mut rng, 4, 8);
        let cfg = DecodeConfig::new(DecodeMode::PhoneLm).with_lm_weight(5.0);
        assert_eq!(d.decode(&pg, &cfg).unwrap(), decode_phone_lm(&pg, &lm, &cfg).unwrap());
    }
}

#[test]
fn decoder_errors() {
    let pg = Posteriorgram::new(phones("a b"), vec![vec![0.5f64.ln(), 0.5f64.ln()]]).unwrap();
    // MLE model: no mass on <unk>, and b is unknown
    let mle = NGramModel::train(&[vec!["a"]], 2, Smoothing::Mle).unwrap();
    let cfg = DecodeConfig::new(DecodeMode::PhoneLm);
    assert!(matches!(decode_phone_lm(&pg, &mle, &cfg), Err(DecodeError::InventoryMismatch(_))));
    let wb = NGramModel::train(&[vec!["a"]], 2, Smoothing::WittenBell).unwrap();
    assert!(decode_phone_lm(&pg, &wb, &cfg).is_ok());
    let word_cfg = DecodeConfig::new(DecodeMode::WordLm);
    assert!(matches!(decode_phone_lm(&pg, &wb, &word_cfg), Err(DecodeError::InvalidConfig(_))));
    assert!(matches!(
        decode_word_lm(&pg, &Lexicon::new(), &wb, &word_cfg),
        Err(DecodeError::EmptyLexicon)
    ));
    let big = Posteriorgram::new(phones("a b"), vec![vec![0.0, f64::NEG_INFINITY]; 30]).unwrap();
    assert!(matches!(exhaustive_decode(&big, &wb, &cfg), Err(DecodeError::TooLarge { .. })));
    // MLE bigram "a" only; the only finite path needs a then </s>, but frame 1 forbids a
    let forced = Posteriorgram::new(phones("a b"), vec![vec![f64::NEG_INFINITY, 0.0]]).unwrap();
    let mle_ab = NGramModel::train(&[vec!["a"], vec!["b", "a"]], 2, Smoothing::Mle).unwrap();
    assert!(matches!(
        decode_phone_lm(&forced, &mle_ab, &cfg),
        Err(DecodeError::NoPath { frames: 1 })
    ));
}

// ---- word mode ----

fn go_lexicon() -> Lexicon {
    let mut lex = Lexicon::new();
    lex.insert("go", phones("g o")).unwrap();
    lex
}

#[test]
fn go_word_example() {
    let inv = phones("g o");
    let ninf = f64::NEG_INFINITY;
    let pg = Posteriorgram::new(inv, vec![vec![0.0, ninf], vec![ninf, 0.0]]).unwrap();
    let lms = [
        NGramModel::uniform(["go"]).unwrap(),
        NGramModel::train(&[vec!["go", "go"], vec!["no"]], 3, Smoothing::WittenBell).unwrap(),
        NGramModel::train(&[vec!["go"]], 2, Smoothing::Mle).unwrap(),
    ];
    for lm in &lms {
        for w in [0.0, 1.0, 10.0] {
            let cfg = DecodeConfig::new(DecodeMode::WordLm).with_lm_weight(w);
            let h = decode_word_lm(&pg, &go_lexicon(), lm, &cfg).unwrap();
            assert_eq!(h.words.as_deref(), Some(&["go".to_string()][..]));
            assert_eq!(h.phones, phones("g o"));
        }
    }
}

#[test]
fn lexicon_entries_outside_the_inventory_are_skipped() {
    let mut lex = go_lexicon();
    lex.insert("xo", phones("x o")).unwrap();
    lex.insert("oo", phones("o o")).unwrap();
    let pg = Posteriorgram::new(phones("g o"), vec![vec![0.0, f64::NEG_INFINITY]; 1]).unwrap();
    let lm = NGramModel::uniform(["go", "xo", "oo"]).unwrap();
    let d = phonotact::decoder::WordDecoder::new(&lm, &lex, pg.phones()).unwrap();
    assert_eq!(d.num_words(), 1);
    let mut only_x = Lexicon::new();
    only_x.insert("xo", phones("x o")).unwrap();
    assert!(matches!(
        phonotact::decoder::WordDecoder::new(&lm, &only_x, pg.phones()),
        Err(DecodeError::InventoryMismatch(_))
    ));
}

/// All ways to cut `seq` into lexicon words.
fn parses(seq: &[usize], words: &[(String, Vec<usize>)]) -> Vec<Vec<usize>> {
    if seq.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, (_, pron)) in words.iter().enumerate() {
        if seq.starts_with(pron) {
            for mut rest in parses(&seq[pron.len()..], words) {
                rest.insert(0, i);
                out.push(rest);
            }
        }
    }
    out
}

fn brute_force_word_decode(
    pg: &Posteriorgram,
    words: &[(String, Vec<usize>)],
    lm: &NGramModel,
    cfg: &DecodeConfig,
) -> Option<(f64, Vec<String>, Vec<usize>)> {
    let (t_len, p) = (pg.num_frames(), pg.num_phones());
    let mut best: Option<(f64, Vec<String>, Vec<usize>)> = None;
    for code in 0..p.pow(t_len as u32) {
        let labels: Vec<usize> = (0..t_len).map(|t| code / p.pow((t_len - 1 - t) as u32) % p).collect();
        let ac: f64 = labels.iter().enumerate().map(|(t, &l)| pg.frame(t)[l]).sum();
        let path = collapse_labels(&labels);
        for parse in parses(&path, words) {
            let names: Vec<String> = parse.iter().map(|&i| words[i].0.clone()).collect();
            let lm_score = lm.logprob_seq(&names) * LN_10;
            let total = ac + cfg.lm_weight * lm_score + cfg.insertion_penalty * path.len() as f64;
            if best.as_ref().is_none_or(|b| total > b.0) {
                best = Some((total, names, path.clone()));
            }
        }
    }
    best
}

#[test]
fn word_decoder_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let inv_names = ["a", "i", "p"];
    for case in 0..150 {
        let p = 3;
        let t = rng.random_range(1..=6);
        let pg = random_pg(&mut rng, p, t);
        // three distinct words of 1-3 phones with no adjacent repeats
        let mut words: Vec<(String, Vec<usize>)> = Vec::new();
        while words.len() < 3 {
            let len = rng.random_range(1..=3);
            let mut pron: Vec<usize> = Vec::new();
            while pron.len() < len {
                let x = rng.random_range(0..p);
                if pron.last() != Some(&x) {
                    pron.push(x);
                }
            }
            let name: String = pron.iter().map(|&i| inv_names[i]).collect();
            if !words.iter().any(|(n, _)| *n == name) {
                words.push((name, pron));
            }
        }
        let mut lex = Lexicon::new();
        for (name, pron) in &words {
            lex.insert(name.clone(), pron.iter().map(|&i| pg.phones()[i].clone()).collect()).unwrap();
        }
        let names: Vec<&str> = words.iter().map(|(n, _)| n.as_str()).collect();
        let order = if case % 3 == 0 { 2 } else { 1 };
        let lm = NGramModel::train(&random_corpus(&mut rng, &names, 6), order, Smoothing::WittenBell).unwrap();
        let cfg = DecodeConfig::new(DecodeMode::WordLm)
            .with_lm_weight(rng.random_range(0.5..6.0))
            .with_insertion_penalty(rng.random_range(-1.0..1.0));
        let expect = brute_force_word_decode(&pg, &words, &lm, &cfg);
        match (decode_word_lm(&pg, &lex, &lm, &cfg), expect) {
            (Ok(h), Some((score, names, path))) => {
                assert!((h.score_total - score).abs() < 1e-9, "case {case}");
                assert_eq!(h.words.as_ref().unwrap(), &names, "case {case}");
                let want: Vec<IpaPhone> = path.iter().map(|&i| pg.phones()[i].clone()).collect();
                assert_eq!(h.phones, want, "case {case}");
                let expanded: Vec<IpaPhone> = names.iter().flat_map(|n| lex.get(n).unwrap().to_vec()).collect();
                assert_eq!(h.phones, expanded);
            }
            (Err(DecodeError::NoPath { .. }), None) => {}
            (got, want) => panic!("case {case}: {got:?} vs {want:?}"),
        }
    }
}

// ---- sweep ----

#[test]
fn sweep_basics() {
    assert_eq!(default_weight_grid(), (2..=17).map(f64::from).collect::<Vec<_>>());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let lm = random_phone_lm(&mut rng, 3, 2);
    let dev: Vec<_> = (0..5)
        .map(|_| {
            let pg = random_pg(&mut rng, 3, 6);
            (pg, phones("a i p"))
        })
        .collect();
    let cfg = DecodeConfig::new(DecodeMode::PhoneLm);
    let one = sweep_lm_weight(&dev, LmSource::Phone(&lm), &[3.0], &cfg).unwrap();
    assert_eq!(one.best_weight, 3.0);
    assert_eq!(one.table.len(), 1);
    let full = sweep_lm_weight(&dev, LmSource::Phone(&lm), &default_weight_grid(), &cfg).unwrap();
    assert_eq!(full.table.len(), 16);
    let min = full.table.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    assert_eq!(full.best_per, min);
    let first_min = full.table.iter().find(|r| r.1 == min).unwrap().0;
    assert_eq!(full.best_weight, first_min);
    assert!(matches!(
        sweep_lm_weight(&dev, LmSource::Phone(&lm), &[], &cfg),
        Err(DecodeError::EmptySweep)
    ));
    assert!(matches!(
        sweep_lm_weight(&[], LmSource::Phone(&lm), &[1.0], &cfg),
        Err(DecodeError::EmptySweep)
    ));
}
