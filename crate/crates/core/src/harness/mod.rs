//! Synthetic languages, scenario orchestration and experiment runs.

mod config;
mod run;
mod synth;
mod words;

pub use config::{ExperimentConfig, LmKind, Scenario, ScenarioSpec, Training};
pub use run::{
    am_inventory, am_profile, run_experiment, run_seed, seed_corpus, seed_languages, CellResult,
    ExperimentResult, PooledResult, SeedResult,
};
pub use synth::{
    gen_language, gen_language_with, sample_corpus, sample_split, sample_utterance, CorpusSplit,
    LanguageParams, SyntheticLanguage, DEFAULT_POOL_SIZE, GLOBAL_POOL,
};
pub use words::{build_pseudo_lexicon, MAX_WORD, MIN_CHUNK_COUNT, MIN_WORD};

/// Overrides the configured base seed when set.
pub const SEED_ENV: &str = "PHONOTACT_SEED";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("inventory too small: {0}")]
    InventoryTooSmall(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Lm(#[from] crate::lm::LmError),
    #[error(transparent)]
    Acoustic(#[from] crate::acoustic::AcousticError),
    #[error(transparent)]
    Decode(#[from] crate::decoder::DecodeError),
    #[error(transparent)]
    Score(#[from] crate::scorer::ScoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExperimentConfig {
    /// Reads and parses a config file, then applies the seed override from
    /// [`SEED_ENV`] if it is set.
    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = ExperimentConfig::parse(&text)?;
        if let Ok(v) = std::env::var(SEED_ENV) {
            cfg.base_seed = v.trim().parse().map_err(|_| {
                HarnessError::InvalidParameter(format!("{SEED_ENV} must be an integer, got `{v}`"))
            })?;
        }
        Ok(cfg)
    }
}
