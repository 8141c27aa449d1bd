//! Command-line front end. Exit status: 0 on success, 1 on usage errors, 2 on
//! data errors (bad or unreadable input), with the offending file on stderr.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::acoustic::{read_pgram, simulate_utterance, write_pgram, AmProfile};
use crate::decoder::{read_lexicon, DecodeConfig, DecodeMode, Decoder, LmSource};
use crate::harness::{gen_language_with, run_experiment, sample_corpus, ExperimentConfig, LanguageParams};
use crate::ipa::{render, read_transcripts, write_transcripts, IpaPhone, PhoneInventory, TranscriptMode, Utterance};
use crate::lm::{read_arpa, write_arpa, NGramModel, Smoothing};
use crate::scorer::{lenient_report, per_report, write_summary_tsv};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Data { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data { .. } => 2,
        }
    }
}

fn data_err<E: Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Data {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Parser, Debug)]
#[command(name = "phonotact", version, about = "Phonotactic phone recognition toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    /// raw IPA, split by the tokenizer
    Raw,
    /// whitespace-separated phones
    Phones,
}

impl From<Mode> for TranscriptMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Raw => TranscriptMode::Raw,
            Mode::Phones => TranscriptMode::Phones,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tokenize a transcript file into space-separated phones
    Tokenize {
        #[arg(long = "in")]
        input: PathBuf,
        /// output file, stdout if omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a phone n-gram model and write it as ARPA
    TrainLm {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value = "witten-bell")]
        smoothing: Smoothing,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "raw")]
        mode: Mode,
    },
    /// Print the perplexity of an ARPA model on a transcript file
    Perplexity {
        #[arg(long)]
        lm: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "raw")]
        mode: Mode,
    },
    /// Simulate posteriorgrams for every utterance of a transcript file
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        /// directory receiving one `<utt-id>.pgram` per utterance
        #[arg(long)]
        out_dir: PathBuf,
        /// space-separated phones the acoustic model knows; defaults to the input's phones
        #[arg(long)]
        inventory: Option<String>,
        #[arg(long, default_value_t = 0.3)]
        confusion: f64,
        #[arg(long, default_value_t = 3.0)]
        mean_dur: f64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "raw")]
        mode: Mode,
    },
    /// Decode posteriorgram files with a phone LM, or a lexicon plus word LM
    Decode {
        #[arg(long)]
        lm: PathBuf,
        /// switches to word-LM decoding
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        lm_weight: f64,
        #[arg(long, default_value_t = 0.0)]
        insertion_penalty: f64,
        #[arg(long, default_value_t = f64::INFINITY)]
        beam: f64,
        #[arg(long)]
        max_active: Option<usize>,
        /// hypothesis transcript file, stdout if omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// posteriorgram files; the utterance id is the file stem
        #[arg(required = true)]
        pgrams: Vec<PathBuf>,
    },
    /// Score hypotheses against references and print a summary row
    Score {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        /// strip modifiers before scoring
        #[arg(long)]
        lenient: bool,
        #[arg(long, default_value = "system")]
        system: String,
        #[arg(long, value_enum, default_value = "raw")]
        mode: Mode,
    },
    /// Generate a synthetic language and optionally sample a corpus from it
    GenLang {
        #[arg(long, default_value_t = 12)]
        n_shared: usize,
        #[arg(long, default_value_t = 4)]
        n_unique: usize,
        #[arg(long, default_value_t = 0.1)]
        temperature: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// number of utterances to sample
        #[arg(long, default_value_t = 0)]
        utterances: usize,
        #[arg(long, default_value_t = 4)]
        min_len: usize,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        /// corpus file for the sampled utterances
        #[arg(long, requires = "utterances")]
        out: Option<PathBuf>,
    },
    /// Run a configured experiment and write its result tables
    RunExperiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(data_err(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(data_err(path))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn transcripts(path: &Path, mode: Mode) -> Result<Vec<Utterance>, CliError> {
    read_transcripts(open(path)?, mode.into()).map_err(data_err(path))
}

fn load_lm(path: &Path) -> Result<NGramModel, CliError> {
    read_arpa(open(path)?).map_err(data_err(path))
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Tokenize { input, out } => {
            let utts = transcripts(&input, Mode::Raw)?;
            let target = out.as_deref().unwrap_or(Path::new("-"));
            let mut w = output(out.as_deref())?;
            write_transcripts(&mut w, &utts)
                .and_then(|_| w.flush())
                .map_err(data_err(target))
        }
        Command::TrainLm { order, smoothing, input, out, mode } => {
            let corpus: Vec<Vec<IpaPhone>> = transcripts(&input, mode)?.into_iter().map(|u| u.phones).collect();
            let model = NGramModel::train(&corpus, order, smoothing).map_err(|e| match e {
                crate::lm::LmError::InvalidOrder(_) => CliError::Usage(e.to_string()),
                other => data_err(&input)(other),
            })?;
            let mut w = create(&out)?;
            write_arpa(&model, &mut w).and_then(|_| w.flush()).map_err(data_err(&out))
        }
        Command::Perplexity { lm, input, mode } => {
            let model = load_lm(&lm)?;
            let corpus: Vec<Vec<IpaPhone>> = transcripts(&input, mode)?.into_iter().map(|u| u.phones).collect();
            let ppl = model.perplexity(&corpus).map_err(data_err(&input))?;
            println!("{ppl:.4}");
            Ok(())
        }
        Command::Simulate {
            input,
            out_dir,
            inventory,
            confusion,
            mean_dur,
            noise,
            seed,
            mode,
        } => {
            let utts = transcripts(&input, mode)?;
            let phones: Vec<IpaPhone> = match &inventory {
                Some(s) => s
                    .split_whitespace()
                    .map(IpaPhone::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Usage(format!("--inventory: {e}")))?,
                None => utts.iter().flat_map(|u| u.phones.iter().cloned()).collect(),
            };
            let profile = AmProfile::new(PhoneInventory::new("am", phones), confusion, mean_dur, seed).with_noise(noise);
            profile.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            std::fs::create_dir_all(&out_dir).map_err(data_err(&out_dir))?;
            for u in &utts {
                let pg = simulate_utterance(&u.id, &u.phones, &profile)
                    .map_err(|e| data_err(&input)(format!("utterance {}: {e}", u.id)))?;
                let path = out_dir.join(format!("{}.pgram", u.id));
                let mut w = create(&path)?;
                write_pgram(&pg, &mut w).and_then(|_| w.flush()).map_err(data_err(&path))?;
            }
            Ok(())
        }
        Command::Decode {
            lm,
            lexicon,
            lm_weight,
            insertion_penalty,
            beam,
            max_active,
            out,
            pgrams,
        } => {
            let model = load_lm(&lm)?;
            let lex = match &lexicon {
                Some(p) => Some(read_lexicon(open(p)?).map_err(data_err(p))?),
                None => None,
            };
            let source = match &lex {
                Some(l) => LmSource::Word { lm: &model, lexicon: l },
                None => LmSource::Phone(&model),
            };
            let mode = if lex.is_some() { DecodeMode::WordLm } else { DecodeMode::PhoneLm };
            let cfg = DecodeConfig::new(mode)
                .with_lm_weight(lm_weight)
                .with_insertion_penalty(insertion_penalty)
                .with_beam(beam)
                .with_max_active(max_active);
            cfg.validate(mode).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut decoder: Option<Decoder> = None;
            let mut hyps = Vec::with_capacity(pgrams.len());
            for path in &pgrams {
                let pg = read_pgram(open(path)?).map_err(data_err(path))?;
                if decoder.as_ref().is_none_or(|d| d.phones() != pg.phones()) {
                    decoder = Some(Decoder::new(source, pg.phones()).map_err(data_err(path))?);
                }
                let d = decoder.as_mut().expect("decoder was just built");
                let phones = d.decode_or_empty(&pg, &cfg).map_err(data_err(path))?;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                hyps.push(Utterance { id, phones });
            }
            let target = out.as_deref().unwrap_or(Path::new("-"));
            let mut w = output(out.as_deref())?;
            write_transcripts(&mut w, &hyps).and_then(|_| w.flush()).map_err(data_err(target))
        }
        Command::Score {
            reference,
            hyp,
            lenient,
            system,
            mode,
        } => {
            let refs = transcripts(&reference, mode)?;
            let hyps = transcripts(&hyp, mode)?;
            let mut by_id: std::collections::HashMap<&str, &Vec<IpaPhone>> =
                hyps.iter().map(|u| (u.id.as_str(), &u.phones)).collect();
            let mut pairs = Vec::with_capacity(refs.len());
            for r in &refs {
                let h = by_id
                    .remove(r.id.as_str())
                    .ok_or_else(|| data_err(&hyp)(format!("no hypothesis for utterance `{}`", r.id)))?;
                pairs.push((r.phones.clone(), h.clone()));
            }
            if let Some(extra) = hyps.iter().find(|u| by_id.contains_key(u.id.as_str())) {
                return Err(data_err(&hyp)(format!("utterance `{}` is not in the reference", extra.id)));
            }
            let report = if lenient { lenient_report(&pairs) } else { per_report(&pairs) }
                .map_err(data_err(&reference))?;
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_summary_tsv(&mut w, &[(system, &report)]).map_err(data_err(Path::new("-")))
        }
        Command::GenLang {
            n_shared,
            n_unique,
            temperature,
            seed,
            utterances,
            min_len,
            max_len,
            out,
        } => {
            let params = LanguageParams::new(n_shared, n_unique, temperature);
            let lang = gen_language_with(&params, "L1", seed, &Default::default())
                .map_err(|e| CliError::Usage(e.to_string()))?;
            println!("{}", render(&lang.phones, " "));
            if utterances > 0 {
                if min_len == 0 || min_len > max_len {
                    return Err(CliError::Usage("need 1 <= --min-len <= --max-len".into()));
                }
                let corpus = sample_corpus(&lang, utterances, (min_len, max_len), seed)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                let utts: Vec<Utterance> = corpus
                    .into_iter()
                    .enumerate()
                    .map(|(i, phones)| Utterance { id: format!("L1_{i:05}"), phones })
                    .collect();
                let target = out.as_deref().unwrap_or(Path::new("-"));
                let mut w = output(out.as_deref())?;
                write_transcripts(&mut w, &utts).and_then(|_| w.flush()).map_err(data_err(target))?;
            }
            Ok(())
        }
        Command::RunExperiment { config, out } => {
            let cfg = ExperimentConfig::load(&config).map_err(data_err(&config))?;
            let result = run_experiment(&cfg, Some(&out)).map_err(data_err(&out))?;
            log::info!("{} seeds written to {}", result.seeds.len(), out.display());
            Ok(())
        }
    }
}
