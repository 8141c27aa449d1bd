//! Frame-synchronous Viterbi decoding of posteriorgrams with a phone n-gram
//! model or a lexicon plus word n-gram model, and LM-weight tuning.
//!
//! Path model: every frame carries one label, runs of equal labels collapse
//! into one emitted phone, and a path scores
//!
//! ```text
//! sum_t ln P_ac(label_t | t) + lm_weight * (sum ln P_lm(emission) + ln P_lm(</s>)) + insertion_penalty * #phones
//! ```
//!
//! In word mode the LM term is charged once per word. The beam prunes labels,
//! not tokens: at frame `t` only labels within `beam` nats of the frame's best
//! log posterior are admissible, and the search over admissible labels is exact.
//! A wider beam therefore never returns a worse path. An optional token cap
//! ([`DecodeConfig::max_active`]) trades that guarantee for bounded work.

mod exhaustive;
mod lexicon;
mod phone;
mod search;
mod sweep;
mod word;

pub use exhaustive::{exhaustive_decode, EXHAUSTIVE_LIMIT};
pub use lexicon::{read_lexicon, write_lexicon, Lexicon};
pub use phone::{decode_phone_lm, PhoneDecoder};
pub use sweep::{default_weight_grid, sweep_lm_weight, Decoder, LmSource, SweepResult};
pub use word::{decode_word_lm, WordDecoder};

use crate::acoustic::Posteriorgram;
use crate::ipa::IpaPhone;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    PhoneLm,
    WordLm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeConfig {
    pub lm_weight: f64,
    /// Natural-log bonus (positive) or penalty (negative) per emitted phone.
    pub insertion_penalty: f64,
    /// Label-pruning width in nats; `f64::INFINITY` searches exhaustively.
    pub beam: f64,
    /// Optional cap on live tokens per frame. When set, only the best
    /// `max_active` tokens survive each frame and the search is no longer
    /// exact; `None` keeps every token.
    pub max_active: Option<usize>,
    pub mode: DecodeMode,
}

impl DecodeConfig {
    pub fn new(mode: DecodeMode) -> Self {
        DecodeConfig {
            lm_weight: 1.0,
            insertion_penalty: 0.0,
            beam: f64::INFINITY,
            max_active: None,
            mode,
        }
    }

    pub fn with_lm_weight(mut self, w: f64) -> Self {
        self.lm_weight = w;
        self
    }

    pub fn with_beam(mut self, beam: f64) -> Self {
        self.beam = beam;
        self
    }

    pub fn with_max_active(mut self, n: Option<usize>) -> Self {
        self.max_active = n;
        self
    }

    pub fn with_insertion_penalty(mut self, p: f64) -> Self {
        self.insertion_penalty = p;
        self
    }

    pub fn validate(&self, expected: DecodeMode) -> Result<(), DecodeError> {
        if self.mode != expected {
            return Err(DecodeError::InvalidConfig(format!(
                "decoder expects {expected:?} mode, config says {:?}",
                self.mode
            )));
        }
        if !(self.lm_weight >= 0.0) || !self.lm_weight.is_finite() {
            return Err(DecodeError::InvalidConfig(format!(
                "lm weight must be finite and >= 0, got {}",
                self.lm_weight
            )));
        }
        if !(self.beam > 0.0) {
            return Err(DecodeError::InvalidConfig(format!(
                "beam must be > 0, got {}",
                self.beam
            )));
        }
        if self.max_active == Some(0) {
            return Err(DecodeError::InvalidConfig("max_active must be >= 1".into()));
        }
        if !self.insertion_penalty.is_finite() {
            return Err(DecodeError::InvalidConfig("insertion penalty must be finite".into()));
        }
        Ok(())
    }

    /// `lm_weight * lm`, with a zero weight silencing even impossible events.
    pub(crate) fn weigh(&self, lm: f64) -> f64 {
        if self.lm_weight == 0.0 {
            0.0
        } else {
            self.lm_weight * lm
        }
    }
}

/// Best path found by a decoder. Scores are natural logs and satisfy
/// `score_total = score_acoustic + lm_weight * score_lm + insertion_penalty * phones.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeHypothesis {
    pub phones: Vec<IpaPhone>,
    pub words: Option<Vec<String>>,
    pub score_total: f64,
    pub score_acoustic: f64,
    pub score_lm: f64,
}

impl DecodeHypothesis {
    pub(crate) fn assemble(
        phones: Vec<IpaPhone>,
        words: Option<Vec<String>>,
        score_acoustic: f64,
        score_lm: f64,
        cfg: &DecodeConfig,
    ) -> Self {
        let score_total =
            score_acoustic + cfg.weigh(score_lm) + cfg.insertion_penalty * phones.len() as f64;
        DecodeHypothesis {
            phones,
            words,
            score_total,
            score_acoustic,
            score_lm,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("invalid decode config: {0}")]
    InvalidConfig(String),
    #[error("inventory mismatch: {0}")]
    InventoryMismatch(String),
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("malformed lexicon at line {line}: {message}")]
    MalformedLexicon { line: usize, message: String },
    #[error("no admissible path through {frames} frames")]
    NoPath { frames: usize },
    #[error("exhaustive search over {labelings} labelings exceeds the limit")]
    TooLarge { labelings: f64 },
    #[error("empty weight grid or dev set")]
    EmptySweep,
    #[error(transparent)]
    Score(#[from] crate::scorer::ScoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fixed-width packing of the last `order - 1` LM token ids into one integer;
/// the newest id sits in the lowest field.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HistoryPacker {
    len: usize,
    mask: u128,
}

const FIELD_BITS: usize = 16;
/// Field value for a history slot that has been dropped as irrelevant.
const EMPTY: crate::lm::TokenId = 0xffff;
pub(crate) const MAX_ORDER: usize = 7;

impl HistoryPacker {
    pub(crate) fn for_model(lm: &crate::lm::NGramModel) -> Result<Self, DecodeError> {
        let len = lm.order() - 1;
        if lm.order() > MAX_ORDER || lm.vocab().len() > EMPTY as usize {
            return Err(DecodeError::InvalidConfig(format!(
                "decoder supports LM order <= {MAX_ORDER} and at most {EMPTY} tokens"
            )));
        }
        let mask = if len == 0 {
            0
        } else {
            (1u128 << (FIELD_BITS * len)) - 1
        };
        Ok(HistoryPacker { len, mask })
    }

    pub(crate) fn initial(&self) -> u128 {
        // BOS has id 0, so an all-BOS history packs to zero
        0
    }

    pub(crate) fn push(&self, hist: u128, id: crate::lm::TokenId) -> u128 {
        ((hist << FIELD_BITS) | id as u128) & self.mask
    }

    /// History tokens, oldest first, without dropped slots.
    pub(crate) fn unpack(&self, hist: u128) -> Vec<crate::lm::TokenId> {
        (0..self.len)
            .rev()
            .map(|i| ((hist >> (FIELD_BITS * i)) & 0xffff) as crate::lm::TokenId)
            .filter(|&id| id != EMPTY)
            .collect()
    }

    /// Drops leading history tokens the model cannot tell apart from their
    /// absence, so equivalent states share one key.
    pub(crate) fn reduce(&self, lm: &crate::lm::NGramModel, hist: u128) -> u128 {
        let h = self.unpack(hist);
        let mut start = 0;
        while start < h.len() && !lm.is_live_context(&h[start..]) {
            start += 1;
        }
        let mut out = 0u128;
        for _ in 0..self.len - h.len() + start {
            out = (out << FIELD_BITS) | EMPTY as u128;
        }
        for &id in &h[start..] {
            out = (out << FIELD_BITS) | id as u128;
        }
        out
    }
}

/// State keys put the history in the low 96 bits and a 32-bit tag above it.
pub(crate) fn state_key(hist: u128, tag: u32) -> u128 {
    hist | ((tag as u128) << 96)
}

/// Per-frame admissible labels: those within `beam` of the frame maximum.
pub(crate) fn admissible_labels(pg: &Posteriorgram, beam: f64) -> Vec<Vec<u32>> {
    pg.frames()
        .iter()
        .map(|row| {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            row.iter()
                .enumerate()
                .filter(|(_, &x)| x > f64::NEG_INFINITY && x >= max - beam)
                .map(|(i, _)| i as u32)
                .collect()
        })
        .collect()
}

/// Collapses runs of equal labels.
pub fn collapse_labels(labels: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(labels.len());
    for &l in labels {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    out
}
