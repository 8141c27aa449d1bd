use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::{ExperimentConfig, LmKind, ScenarioSpec, Training};
use super::synth::{gen_language_with, sample_split, CorpusSplit, SyntheticLanguage};
use super::words::build_pseudo_lexicon;
use super::HarnessError;
use crate::acoustic::{simulate_utterance, AmProfile, Posteriorgram};
use crate::decoder::{sweep_lm_weight, DecodeConfig, DecodeMode, Decoder, LmSource};
use crate::ipa::{IpaPhone, PhoneInventory};
use crate::lm::{NGramModel, Smoothing};
use crate::scorer::{
    lenient_report, per_report, phone_share_report, write_share_tsv, write_summary_tsv, PerReport,
    ShareRow,
};
use crate::util::{fnv1a, mix_seed};

type Pairs = Vec<(Vec<IpaPhone>, Vec<IpaPhone>)>;

/// One (target language, system) cell of one seed.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub language: String,
    pub system: ScenarioSpec,
    pub lm_weight: f64,
    /// Dev PER at every candidate weight.
    pub sweep: Vec<(f64, f64)>,
    pub report: PerReport,
    pub lenient: PerReport,
    pub share: Vec<ShareRow>,
    /// Eval references with their hypotheses.
    pub pairs: Pairs,
}

/// A system scored over all target languages of a seed at once.
#[derive(Debug, Clone)]
pub struct PooledResult {
    pub report: PerReport,
    pub lenient: PerReport,
    pub share: Vec<ShareRow>,
}

#[derive(Debug, Clone)]
pub struct SeedResult {
    pub index: usize,
    pub seed: u64,
    pub languages: Vec<SyntheticLanguage>,
    pub cells: Vec<CellResult>,
    pub pooled: BTreeMap<ScenarioSpec, PooledResult>,
}

impl SeedResult {
    pub fn cell(&self, language: &str, system: &ScenarioSpec) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.language == language && c.system == *system)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub seeds: Vec<SeedResult>,
}

fn sub_seed(seed: u64, label: &str) -> u64 {
    mix_seed(seed, fnv1a(label.as_bytes()))
}

/// Languages of one seed; later languages avoid earlier ones' unique phones.
pub fn seed_languages(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<SyntheticLanguage>, HarnessError> {
    let mut langs: Vec<SyntheticLanguage> = Vec::with_capacity(cfg.n_languages);
    for k in 0..cfg.n_languages {
        let id = format!("L{}", k + 1);
        let taken = PhoneInventory::union("taken", langs.iter().map(|l| &l.inventory));
        let lang = gen_language_with(&cfg.language, &id, sub_seed(seed, &format!("lang/{id}")), taken.phones())?;
        langs.push(lang);
    }
    Ok(langs)
}

pub fn seed_corpus(cfg: &ExperimentConfig, lang: &SyntheticLanguage, seed: u64) -> Result<CorpusSplit, HarnessError> {
    sample_split(
        lang,
        (cfg.n_train, cfg.n_dev, cfg.n_eval),
        (cfg.min_len, cfg.max_len),
        sub_seed(seed, &format!("corpus/{}", lang.id)),
    )
}

/// Languages whose data a model trained with `training` sees for target `t`.
fn training_set(training: Training, t: usize, n: usize) -> Vec<usize> {
    match training {
        Training::TargetOnly => vec![t],
        Training::Pooled => (0..n).collect(),
        Training::LeaveOneOut => (0..n).filter(|&k| k != t).collect(),
    }
}

pub fn am_inventory(langs: &[SyntheticLanguage], training: Training, t: usize) -> PhoneInventory {
    let members = training_set(training, t, langs.len());
    PhoneInventory::union("am", members.iter().map(|&k| &langs[k].inventory))
}

/// Acoustic model for target `t` of a seed. Utterance `i` of split `part`
/// (`dev` or `eval`) is simulated under the id `<language>/<part>/<i>`.
pub fn am_profile(cfg: &ExperimentConfig, langs: &[SyntheticLanguage], training: Training, t: usize, seed: u64) -> AmProfile {
    AmProfile::new(
        am_inventory(langs, training, t),
        cfg.confusion,
        cfg.mean_dur,
        sub_seed(seed, &format!("am/{}/{training:?}", langs[t].id)),
    )
    .with_noise(cfg.noise)
}

struct Simulated {
    dev: Vec<(Posteriorgram, Vec<IpaPhone>)>,
    eval: Vec<(Posteriorgram, Vec<IpaPhone>)>,
}

fn simulate_set(
    cfg: &ExperimentConfig,
    langs: &[SyntheticLanguage],
    splits: &[CorpusSplit],
    training: Training,
    t: usize,
    seed: u64,
) -> Result<Simulated, HarnessError> {
    let id = &langs[t].id;
    let profile = am_profile(cfg, langs, training, t, seed);
    let run = |part: &str, utts: &[Vec<IpaPhone>]| -> Result<Vec<_>, HarnessError> {
        utts.iter()
            .enumerate()
            .map(|(i, u)| Ok((simulate_utterance(&format!("{id}/{part}/{i}"), u, &profile)?, u.clone())))
            .collect()
    };
    Ok(Simulated {
        dev: run("dev", &splits[t].dev)?,
        eval: run("eval", &splits[t].eval)?,
    })
}

enum TrainedLm {
    Phone(NGramModel),
    Word(NGramModel, crate::decoder::Lexicon),
}

impl TrainedLm {
    fn source(&self) -> LmSource<'_> {
        match self {
            TrainedLm::Phone(lm) => LmSource::Phone(lm),
            TrainedLm::Word(lm, lexicon) => LmSource::Word { lm, lexicon },
        }
    }
}

fn train_lm(kind: LmKind, corpus: &[Vec<IpaPhone>]) -> Result<TrainedLm, HarnessError> {
    Ok(match kind {
        LmKind::WordTg => {
            let (lexicon, words) = build_pseudo_lexicon(corpus);
            TrainedLm::Word(NGramModel::train(&words, kind.order(), Smoothing::WittenBell)?, lexicon)
        }
        _ => TrainedLm::Phone(NGramModel::train(corpus, kind.order(), Smoothing::WittenBell)?),
    })
}

fn run_cell(
    cfg: &ExperimentConfig,
    langs: &[SyntheticLanguage],
    splits: &[CorpusSplit],
    sim: &Simulated,
    system: &ScenarioSpec,
    t: usize,
) -> Result<CellResult, HarnessError> {
    let corpus: Vec<Vec<IpaPhone>> = training_set(system.lm_training, t, langs.len())
        .into_iter()
        .flat_map(|k| splits[k].train.iter().cloned())
        .collect();
    let lm = train_lm(system.lm_kind, &corpus)?;
    let (mode, cap) = match system.lm_kind {
        LmKind::WordTg => (DecodeMode::WordLm, cfg.max_active_word),
        _ => (DecodeMode::PhoneLm, cfg.max_active_phone),
    };
    let base = DecodeConfig::new(mode)
        .with_beam(cfg.beam)
        .with_max_active(cap)
        .with_insertion_penalty(cfg.insertion_penalty);
    let sweep = sweep_lm_weight(&sim.dev, lm.source(), &cfg.weights, &base)?;
    let dcfg = base.with_lm_weight(sweep.best_weight);
    let mut decoder = Decoder::new(lm.source(), sim.eval[0].0.phones())?;
    let mut pairs = Vec::with_capacity(sim.eval.len());
    for (pg, reference) in &sim.eval {
        pairs.push((reference.clone(), decoder.decode_or_empty(pg, &dcfg)?));
    }
    let report = per_report(&pairs)?;
    let lenient = lenient_report(&pairs)?;
    let invs: Vec<PhoneInventory> = langs.iter().map(|l| l.inventory.clone()).collect();
    let share = phone_share_report(&report.per_phone, &invs)?;
    Ok(CellResult {
        language: langs[t].id.clone(),
        system: *system,
        lm_weight: sweep.best_weight,
        sweep: sweep.table,
        report,
        lenient,
        share,
        pairs,
    })
}

fn pool(cells: &[&CellResult], invs: &[PhoneInventory]) -> Result<PooledResult, HarnessError> {
    let pairs: Pairs = cells.iter().flat_map(|c| c.pairs.iter().cloned()).collect();
    let report = per_report(&pairs)?;
    let lenient = lenient_report(&pairs)?;
    let share = phone_share_report(&report.per_phone, invs)?;
    Ok(PooledResult {
        report,
        lenient,
        share,
    })
}

/// Runs every (target language x system) cell of seed number `index`.
/// With `out_dir`, each cell's files are written as soon as it completes.
pub fn run_seed(cfg: &ExperimentConfig, index: usize, out_dir: Option<&Path>) -> Result<SeedResult, HarnessError> {
    let seed = cfg.base_seed.wrapping_add(index as u64);
    let langs = seed_languages(cfg, seed)?;
    let splits: Vec<CorpusSplit> = langs
        .iter()
        .map(|l| seed_corpus(cfg, l, seed))
        .collect::<Result<_, _>>()?;
    let seed_dir = out_dir.map(|d| d.join(format!("seed_{index:02}")));
    if let Some(dir) = &seed_dir {
        fs::create_dir_all(dir.join("cells"))?;
    }

    let mut sims: HashMap<(usize, Training), Simulated> = HashMap::new();
    let mut cells = Vec::new();
    for t in 0..langs.len() {
        for system in &cfg.systems {
            let key = (t, system.am_training());
            if !sims.contains_key(&key) {
                let sim = simulate_set(cfg, &langs, &splits, key.1, t, seed)?;
                sims.insert(key, sim);
            }
            let cell = run_cell(cfg, &langs, &splits, &sims[&key], system, t)?;
            log::info!(
                "seed {index} {} {system}: lambda {} per {:.4}",
                cell.language,
                cell.lm_weight,
                cell.report.per
            );
            if let Some(dir) = &seed_dir {
                write_cell(&dir.join("cells"), &cell)?;
            }
            cells.push(cell);
        }
        // posteriorgrams are per target; free them before the next one
        sims.retain(|(k, _), _| *k != t);
    }

    let invs: Vec<PhoneInventory> = langs.iter().map(|l| l.inventory.clone()).collect();
    let mut pooled = BTreeMap::new();
    for system in &cfg.systems {
        let members: Vec<&CellResult> = cells.iter().filter(|c| c.system == *system).collect();
        pooled.insert(*system, pool(&members, &invs)?);
    }
    let result = SeedResult {
        index,
        seed,
        languages: langs,
        cells,
        pooled,
    };
    if let Some(dir) = &seed_dir {
        write_seed(dir, cfg, &result)?;
    }
    Ok(result)
}

pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let mut seeds = Vec::with_capacity(cfg.n_seeds);
    for index in 0..cfg.n_seeds {
        seeds.push(run_seed(cfg, index, out_dir)?);
    }
    let result = ExperimentResult { seeds };
    if let Some(dir) = out_dir {
        write_experiment(dir, cfg, &result)?;
    }
    Ok(result)
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_cell(dir: &Path, cell: &CellResult) -> Result<(), HarnessError> {
    let stem = format!("{}.{}", cell.language, cell.system.file_name());
    let name = cell.system.to_string();
    let mut w = create(&dir.join(format!("{stem}.summary.tsv")))?;
    write_summary_tsv(
        &mut w,
        &[(name.clone(), &cell.report), (format!("{name}/lenient"), &cell.lenient)],
    )?;
    w.flush()?;
    let mut w = create(&dir.join(format!("{stem}.sweep.tsv")))?;
    writeln!(w, "lm_weight\tdev_per")?;
    for (lambda, per) in &cell.sweep {
        let mark = if *lambda == cell.lm_weight { "\t*" } else { "" };
        writeln!(w, "{lambda}\t{:.1}{mark}", 100.0 * per)?;
    }
    w.flush()?;
    let mut w = create(&dir.join(format!("{stem}.share.tsv")))?;
    write_share_tsv(&mut w, &cell.share)?;
    w.flush()?;
    Ok(())
}

fn write_grid_rows<W: Write>(w: &mut W, cfg: &ExperimentConfig, seed: &SeedResult) -> Result<(), HarnessError> {
    for lang in &seed.languages {
        write!(w, "{}\t{}", seed.index, lang.id)?;
        for system in &cfg.systems {
            let c = seed.cell(&lang.id, system).expect("every cell was run");
            write!(w, "\t{:.1}\t{}", 100.0 * c.report.per, c.lm_weight)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn grid_header(cfg: &ExperimentConfig) -> String {
    let mut h = String::from("seed\tlanguage");
    for s in &cfg.systems {
        h.push_str(&format!("\t{s}.per\t{s}.lambda"));
    }
    h
}

fn write_seed(dir: &Path, cfg: &ExperimentConfig, seed: &SeedResult) -> Result<(), HarnessError> {
    let rows = |lenient: bool| -> Vec<(String, &PerReport)> {
        seed.pooled
            .iter()
            .map(|(s, p)| (s.to_string(), if lenient { &p.lenient } else { &p.report }))
            .collect()
    };
    let mut w = create(&dir.join("summary.tsv"))?;
    write_summary_tsv(&mut w, &rows(false))?;
    w.flush()?;
    let mut w = create(&dir.join("summary_lenient.tsv"))?;
    write_summary_tsv(&mut w, &rows(true))?;
    w.flush()?;
    for (s, p) in &seed.pooled {
        let mut w = create(&dir.join(format!("share_{}.tsv", s.file_name())))?;
        write_share_tsv(&mut w, &p.share)?;
        w.flush()?;
    }
    let mut w = create(&dir.join("grid.tsv"))?;
    writeln!(w, "{}", grid_header(cfg))?;
    write_grid_rows(&mut w, cfg, seed)?;
    w.flush()?;
    Ok(())
}

fn borrowed(rows: &[(String, PerReport)]) -> Vec<(String, &PerReport)> {
    rows.iter().map(|(s, r)| (s.clone(), r)).collect()
}

fn write_experiment(dir: &Path, cfg: &ExperimentConfig, result: &ExperimentResult) -> Result<(), HarnessError> {
    let mut w = create(&dir.join("grid.tsv"))?;
    writeln!(w, "{}", grid_header(cfg))?;
    for seed in &result.seeds {
        write_grid_rows(&mut w, cfg, seed)?;
    }
    w.flush()?;
    let mut strict = Vec::new();
    let mut lenient = Vec::new();
    for system in &cfg.systems {
        let pairs: Pairs = result
            .seeds
            .iter()
            .flat_map(|s| s.cells.iter().filter(|c| c.system == *system))
            .flat_map(|c| c.pairs.iter().cloned())
            .collect();
        strict.push((system.to_string(), per_report(&pairs)?));
        lenient.push((system.to_string(), lenient_report(&pairs)?));
    }
    let mut w = create(&dir.join("summary.tsv"))?;
    write_summary_tsv(&mut w, &borrowed(&strict))?;
    w.flush()?;
    let mut w = create(&dir.join("summary_lenient.tsv"))?;
    write_summary_tsv(&mut w, &borrowed(&lenient))?;
    w.flush()?;
    Ok(())
}
