use std::fmt;
use std::str::FromStr;

use super::synth::{LanguageParams, DEFAULT_POOL_SIZE};
use super::HarnessError;
use crate::decoder::default_weight_grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    Mono,
    Multi,
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LmKind {
    PhoneUg,
    PhoneBg,
    PhoneTg,
    WordTg,
}

impl LmKind {
    pub fn order(self) -> usize {
        match self {
            LmKind::PhoneUg => 1,
            LmKind::PhoneBg => 2,
            LmKind::PhoneTg | LmKind::WordTg => 3,
        }
    }
}

/// Which languages' data a model is trained on, relative to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Training {
    TargetOnly,
    Pooled,
    LeaveOneOut,
}

/// One AM x LM system, written `scenario:lm_training:lm_kind`, for example
/// `cross:loo:wtg`. The AM training set follows from the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub lm_training: Training,
    pub lm_kind: LmKind,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, lm_training: Training, lm_kind: LmKind) -> Result<Self, HarnessError> {
        if scenario == Scenario::Mono && lm_training != Training::TargetOnly {
            return Err(HarnessError::InvalidSystem(
                "the mono scenario trains its LM on the target only".into(),
            ));
        }
        Ok(ScenarioSpec {
            scenario,
            lm_training,
            lm_kind,
        })
    }

    pub fn am_training(&self) -> Training {
        match self.scenario {
            Scenario::Mono => Training::TargetOnly,
            Scenario::Multi => Training::Pooled,
            Scenario::Cross => Training::LeaveOneOut,
        }
    }

    /// Name usable in file names.
    pub fn file_name(&self) -> String {
        self.to_string().replace(':', "-")
    }
}

impl fmt::Display for ScenarioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.scenario {
            Scenario::Mono => "mono",
            Scenario::Multi => "multi",
            Scenario::Cross => "cross",
        };
        let t = match self.lm_training {
            Training::TargetOnly => "target",
            Training::Pooled => "pooled",
            Training::LeaveOneOut => "loo",
        };
        let k = match self.lm_kind {
            LmKind::PhoneUg => "ug",
            LmKind::PhoneBg => "bg",
            LmKind::PhoneTg => "tg",
            LmKind::WordTg => "wtg",
        };
        write!(f, "{s}:{t}:{k}")
    }
}

impl FromStr for ScenarioSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::InvalidSystem(format!("`{s}` is not scenario:lm_training:lm_kind"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [sc, tr, kind] = parts[..] else {
            return Err(bad());
        };
        let scenario = match sc {
            "mono" => Scenario::Mono,
            "multi" => Scenario::Multi,
            "cross" => Scenario::Cross,
            _ => return Err(bad()),
        };
        let training = match tr {
            "target" => Training::TargetOnly,
            "pooled" => Training::Pooled,
            "loo" => Training::LeaveOneOut,
            _ => return Err(bad()),
        };
        let lm_kind = match kind {
            "ug" => LmKind::PhoneUg,
            "bg" => LmKind::PhoneBg,
            "tg" => LmKind::PhoneTg,
            "wtg" => LmKind::WordTg,
            _ => return Err(bad()),
        };
        ScenarioSpec::new(scenario, training, lm_kind)
    }
}

/// Everything `run_experiment` needs. See [`ExperimentConfig::parse`] for the file format.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub base_seed: u64,
    pub n_seeds: usize,
    pub n_languages: usize,
    pub language: LanguageParams,
    pub n_train: usize,
    pub n_dev: usize,
    pub n_eval: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub confusion: f64,
    pub mean_dur: f64,
    pub noise: f64,
    pub beam: f64,
    /// per-frame token caps for phone-LM and word-LM systems, `None` for exact search
    pub max_active_phone: Option<usize>,
    pub max_active_word: Option<usize>,
    pub insertion_penalty: f64,
    pub weights: Vec<f64>,
    pub systems: Vec<ScenarioSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            base_seed: 1,
            n_seeds: 20,
            n_languages: 2,
            language: LanguageParams {
                n_shared: 12,
                n_unique: 4,
                temperature: 0.1,
                pool_size: DEFAULT_POOL_SIZE,
            },
            n_train: 2000,
            n_dev: 200,
            n_eval: 400,
            min_len: 4,
            max_len: 12,
            confusion: 0.3,
            mean_dur: 3.0,
            noise: 0.0,
            beam: f64::INFINITY,
            max_active_phone: None,
            max_active_word: None,
            insertion_penalty: 0.0,
            weights: default_weight_grid(),
            systems: Vec::new(),
        }
    }
}

fn parse_num<T: FromStr>(v: &str, line: usize, key: &str) -> Result<T, HarnessError> {
    v.parse().map_err(|_| HarnessError::Config {
        line,
        message: format!("bad value `{v}` for `{key}`"),
    })
}

/// A positive integer or `none`.
fn parse_cap(v: &str, line: usize, key: &str) -> Result<Option<usize>, HarnessError> {
    match v {
        "none" => Ok(None),
        _ => match parse_num::<usize>(v, line, key)? {
            0 => Err(HarnessError::Config {
                line,
                message: format!("`{key}` must be >= 1 or `none`"),
            }),
            n => Ok(Some(n)),
        },
    }
}

/// `2..17` (integers inclusive) or a comma/space separated list.
fn parse_weights(v: &str, line: usize) -> Result<Vec<f64>, HarnessError> {
    let bad = || HarnessError::Config {
        line,
        message: format!("bad weight grid `{v}`"),
    };
    if let Some((a, b)) = v.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).map(|x| x as f64).collect());
    }
    let w: Vec<f64> = v
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    if w.is_empty() {
        return Err(bad());
    }
    Ok(w)
}

impl ExperimentConfig {
    /// Parses `[section]` headers and `key = value` lines; `#` starts a comment.
    ///
    /// Sections and keys (defaults in parentheses):
    /// - `experiment`: `name`, `seed` (1), `seeds` (20), `systems` (comma list, required)
    /// - `languages`: `count` (2), `n_shared` (12), `n_unique` (4), `temperature` (0.1), `pool_size` (16)
    /// - `corpus`: `n_train` (2000), `n_dev` (200), `n_eval` (400), `min_len` (4), `max_len` (12)
    /// - `acoustic`: `confusion` (0.3), `mean_dur` (3), `noise` (0)
    /// - `decode`: `beam` (inf), `max_active_phone` (none), `max_active_word` (none), `insertion_penalty` (0), `weights` (2..17)
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        let mut pool_size_set = false;
        let mut systems_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["experiment", "languages", "corpus", "acoustic", "decode"].contains(&section.as_str()) {
                    return Err(HarnessError::Config {
                        line,
                        message: format!("unknown section `{section}`"),
                    });
                }
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(HarnessError::Config {
                    line,
                    message: "expected `key = value`".into(),
                });
            };
            let (key, v) = (key.trim(), value.trim());
            match (section.as_str(), key) {
                ("experiment", "name") => cfg.name = v.to_string(),
                ("experiment", "seed") => cfg.base_seed = parse_num(v, line, key)?,
                ("experiment", "seeds") => cfg.n_seeds = parse_num(v, line, key)?,
                ("experiment", "systems") => {
                    systems_line = line;
                    cfg.systems = v
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| {
                            s.parse().map_err(|e: HarnessError| HarnessError::Config {
                                line,
                                message: e.to_string(),
                            })
                        })
                        .collect::<Result<_, _>>()?;
                }
                ("languages", "count") => cfg.n_languages = parse_num(v, line, key)?,
                ("languages", "n_shared") => cfg.language.n_shared = parse_num(v, line, key)?,
                ("languages", "n_unique") => cfg.language.n_unique = parse_num(v, line, key)?,
                ("languages", "temperature") => cfg.language.temperature = parse_num(v, line, key)?,
                ("languages", "pool_size") => {
                    cfg.language.pool_size = parse_num(v, line, key)?;
                    pool_size_set = true;
                }
                ("corpus", "n_train") => cfg.n_train = parse_num(v, line, key)?,
                ("corpus", "n_dev") => cfg.n_dev = parse_num(v, line, key)?,
                ("corpus", "n_eval") => cfg.n_eval = parse_num(v, line, key)?,
                ("corpus", "min_len") => cfg.min_len = parse_num(v, line, key)?,
                ("corpus", "max_len") => cfg.max_len = parse_num(v, line, key)?,
                ("acoustic", "confusion") => cfg.confusion = parse_num(v, line, key)?,
                ("acoustic", "mean_dur") => cfg.mean_dur = parse_num(v, line, key)?,
                ("acoustic", "noise") => cfg.noise = parse_num(v, line, key)?,
                ("decode", "beam") => cfg.beam = parse_num(v, line, key)?,
                ("decode", "max_active_phone") => cfg.max_active_phone = parse_cap(v, line, key)?,
                ("decode", "max_active_word") => cfg.max_active_word = parse_cap(v, line, key)?,
                ("decode", "insertion_penalty") => cfg.insertion_penalty = parse_num(v, line, key)?,
                ("decode", "weights") => cfg.weights = parse_weights(v, line)?,
                _ => {
                    return Err(HarnessError::Config {
                        line,
                        message: format!("unknown key `{key}` in section `[{section}]`"),
                    })
                }
            }
        }
        if !pool_size_set {
            cfg.language.pool_size = DEFAULT_POOL_SIZE.max(cfg.language.n_shared);
        }
        cfg.validate().map_err(|e| match e {
            HarnessError::InvalidSystem(_) => HarnessError::Config {
                line: systems_line,
                message: e.to_string(),
            },
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| {
            Err(HarnessError::Config {
                line: 0,
                message: m.to_string(),
            })
        };
        if self.systems.is_empty() {
            return Err(HarnessError::InvalidSystem("no systems configured".into()));
        }
        if self.n_seeds == 0 {
            return bad("seeds must be >= 1");
        }
        if self.n_languages == 0 {
            return bad("need at least one language");
        }
        let needs_others = self
            .systems
            .iter()
            .any(|s| s.scenario == Scenario::Cross || s.lm_training == Training::LeaveOneOut);
        if needs_others && self.n_languages < 2 {
            return Err(HarnessError::InvalidSystem(
                "leave-one-out training needs at least two languages".into(),
            ));
        }
        if self.n_train == 0 || self.n_dev == 0 || self.n_eval == 0 {
            return bad("corpus sizes must be >= 1");
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return bad("need 1 <= min_len <= max_len");
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return bad("weights must be finite and >= 0");
        }
        if !(self.beam > 0.0) {
            return bad("beam must be > 0");
        }
        Ok(())
    }
}
