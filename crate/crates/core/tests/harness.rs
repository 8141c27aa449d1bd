use std::path::Path;

use phonotact::acoustic::simulate_utterance;
use phonotact::decoder::{decode_phone_lm, DecodeConfig, DecodeMode};
use phonotact::harness::*;
use phonotact::ipa::IpaPhone;
use phonotact::lm::{NGramModel, Smoothing};
use phonotact::scorer::per_report;

fn config(extra: &str) -> ExperimentConfig {
    ExperimentConfig::parse(extra).unwrap()
}

#[test]
fn noiseless_matched_trigram_is_perfect() {
    let cfg = config(
        "[experiment]\nseeds = 3\nsystems = mono:target:tg\n\
         [corpus]\nn_train = 300\nn_dev = 20\nn_eval = 40\n\
         [acoustic]\nconfusion = 0\nnoise = 0\n",
    );
    let result = run_experiment(&cfg, None).unwrap();
    for seed in &result.seeds {
        for cell in &seed.cells {
            assert_eq!(cell.report.per, 0.0, "seed {} {}", seed.index, cell.language);
        }
    }
}

#[test]
fn unseen_phones_bound_crosslingual_per() {
    let cfg = config(
        "[experiment]\nseeds = 2\nsystems = cross:loo:tg\n\
         [languages]\nn_shared = 3\nn_unique = 6\n\
         [corpus]\nn_train = 200\nn_dev = 10\nn_eval = 30\n\
         [decode]\nweights = 2..4\n",
    );
    let result = run_experiment(&cfg, None).unwrap();
    for seed in &result.seeds {
        for (t, cell) in seed.cells.iter().enumerate() {
            let am = am_inventory(&seed.languages, Training::LeaveOneOut, t);
            let (mut unseen, mut total) = (0usize, 0usize);
            for (r, _) in &cell.pairs {
                total += r.len();
                unseen += r.iter().filter(|p| !am.contains(p)).count();
            }
            let fraction = unseen as f64 / total as f64;
            assert!(fraction > 0.3);
            assert!(cell.report.per >= fraction, "per {} < unseen {fraction}", cell.report.per);
            for (p, stats) in &cell.report.per_phone {
                if !am.contains(p) {
                    assert_eq!(stats.error_rate(), Some(1.0));
                }
            }
        }
    }
}

#[test]
fn fully_unseen_target_scores_at_least_one() {
    use phonotact::acoustic::AmProfile;
    use phonotact::ipa::{tokenize, PhoneInventory};
    let target = tokenize("aː˥ iː˥ uː˥ eː˥").unwrap();
    let am = PhoneInventory::new("am", tokenize("a i u e o").unwrap());
    let profile = AmProfile::new(am, 0.2, 2.0, 3).with_noise(0.5);
    let utts: Vec<Vec<IpaPhone>> = vec![
        tokenize("aː˥ iː˥ uː˥").unwrap(),
        tokenize("eː˥ aː˥ eː˥ iː˥").unwrap(),
        target.clone(),
    ];
    let lm = NGramModel::train(&utts, 2, Smoothing::WittenBell).unwrap();
    let pairs: Vec<_> = utts
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let pg = simulate_utterance(&format!("u{i}"), u, &profile).unwrap();
            let cfg = DecodeConfig::new(DecodeMode::PhoneLm).with_lm_weight(2.0);
            (u.clone(), decode_phone_lm(&pg, &lm, &cfg).unwrap().phones)
        })
        .collect();
    assert!(per_report(&pairs).unwrap().per >= 1.0);
}

/// Rebuilds every multi-scenario cell from module calls: fresh LMs, a
/// hand-written weight sweep and one-shot decodes.
#[test]
fn grid_matches_scripted_module_calls() {
    let cfg = config(
        "[experiment]\nseed = 11\nseeds = 2\nsystems = multi:target:tg, multi:pooled:tg\n\
         [corpus]\nn_train = 300\nn_dev = 15\nn_eval = 25\n\
         [acoustic]\nnoise = 2\n\
         [decode]\nweights = 2..6\n",
    );
    let dir = tempfile::tempdir().unwrap();
    let result = run_experiment(&cfg, Some(dir.path())).unwrap();
    let grid = std::fs::read_to_string(dir.path().join("grid.tsv")).unwrap();
    let mut grid_rows = grid.lines().skip(1);

    for (index, seed_result) in result.seeds.iter().enumerate() {
        let seed = cfg.base_seed + index as u64;
        let langs = seed_languages(&cfg, seed).unwrap();
        let splits: Vec<CorpusSplit> = langs.iter().map(|l| seed_corpus(&cfg, l, seed).unwrap()).collect();
        for (t, lang) in langs.iter().enumerate() {
            let profile = am_profile(&cfg, &langs, Training::Pooled, t, seed);
            let sim = |part: &str, utts: &[Vec<IpaPhone>]| {
                utts.iter()
                    .enumerate()
                    .map(|(i, u)| simulate_utterance(&format!("{}/{part}/{i}", lang.id), u, &profile).unwrap())
                    .collect::<Vec<_>>()
            };
            let dev = sim("dev", &splits[t].dev);
            let eval = sim("eval", &splits[t].eval);
            let mut expected_row = format!("{index}\t{}", lang.id);
            for system in &cfg.systems {
                let corpus: Vec<Vec<IpaPhone>> = match system.lm_training {
                    Training::TargetOnly => splits[t].train.clone(),
                    _ => splits.iter().flat_map(|s| s.train.iter().cloned()).collect(),
                };
                let lm = NGramModel::train(&corpus, 3, Smoothing::WittenBell).unwrap();
                let score = |w: f64, pgs: &[phonotact::acoustic::Posteriorgram], refs: &[Vec<IpaPhone>]| {
                    let cfg = DecodeConfig::new(DecodeMode::PhoneLm).with_lm_weight(w);
                    let pairs: Vec<_> = pgs
                        .iter()
                        .zip(refs)
                        .map(|(pg, r)| (r.clone(), decode_phone_lm(pg, &lm, &cfg).unwrap().phones))
                        .collect();
                    per_report(&pairs).unwrap().per
                };
                let mut best = (f64::INFINITY, 0.0);
                for w in 2..=6 {
                    let per = score(w as f64, &dev, &splits[t].dev);
                    if per < best.0 {
                        best = (per, w as f64);
                    }
                }
                let eval_per = score(best.1, &eval, &splits[t].eval);
                let cell = seed_result.cell(&lang.id, system).unwrap();
                assert_eq!(cell.lm_weight, best.1);
                assert_eq!(cell.report.per, eval_per);
                expected_row.push_str(&format!("\t{:.1}\t{}", 100.0 * eval_per, best.1));
            }
            assert_eq!(grid_rows.next(), Some(expected_row.as_str()));
        }
    }
    assert_eq!(grid_rows.next(), None);
}

fn collect_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn repeated_runs_write_identical_files() {
    let cfg = config(
        "[experiment]\nseeds = 2\n\
         systems = mono:target:ug, cross:loo:wtg, multi:pooled:bg\n\
         [corpus]\nn_train = 200\nn_dev = 10\nn_eval = 15\n\
         [acoustic]\nnoise = 1\n\
         [decode]\nweights = 2..4\nmax_active_word = 50\n",
    );
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&cfg, Some(a.path())).unwrap();
    run_experiment(&cfg, Some(b.path())).unwrap();
    let fa = collect_files(a.path());
    let fb = collect_files(b.path());
    assert!(fa.len() > 10);
    assert_eq!(fa, fb);
    assert!(fa.iter().any(|(name, _)| name.ends_with("grid.tsv")));
}

#[test]
fn matched_phone_lm_weight_lands_inside_the_grid() {
    let cfg = config(
        "[experiment]\nseeds = 20\nsystems = mono:target:tg\n\
         [languages]\ncount = 1\n\
         [corpus]\nn_train = 1000\nn_dev = 100\nn_eval = 10\n\
         [acoustic]\nnoise = 3\n\
         [decode]\nmax_active_phone = 64\n",
    );
    let result = run_experiment(&cfg, None).unwrap();
    let interior = result
        .seeds
        .iter()
        .filter(|s| {
            let w = s.cells[0].lm_weight;
            w > 2.0 && w < 17.0
        })
        .count();
    assert!(interior >= 14, "interior in {interior} of 20 seeds");
}

#[test]
fn seed_override_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.cfg");
    std::fs::write(&path, "[experiment]\nseed = 5\nsystems = mono:target:ug\n").unwrap();
    assert_eq!(ExperimentConfig::load(&path).unwrap().base_seed, 5);
    // only this test touches the variable
    std::env::set_var(SEED_ENV, "42");
    let got = ExperimentConfig::load(&path).map(|c| c.base_seed);
    std::env::remove_var(SEED_ENV);
    assert_eq!(got.unwrap(), 42);
}
