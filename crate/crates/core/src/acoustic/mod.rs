//! Per-frame phone posteriorgrams: simulated from a reference phone sequence
//! or loaded from `PGRAM v1` files.

mod pgram;
mod simulate;

pub use pgram::{read_pgram, write_pgram};
pub use simulate::{simulate, simulate_utterance, AmProfile};

use crate::ipa::IpaPhone;

/// Row-sum tolerance after exponentiation.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum AcousticError {
    #[error("reference phone sequence is empty")]
    EmptyTruth,
    #[error("invalid acoustic profile: {0}")]
    InvalidProfile(String),
    #[error("malformed posteriorgram at line {line}: {message}")]
    MalformedPgram { line: usize, message: String },
    #[error("invalid posteriorgram: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// T x P matrix of natural-log phone posteriors.
#[derive(Debug, Clone, PartialEq)]
pub struct Posteriorgram {
    phones: Vec<IpaPhone>,
    frames: Vec<Vec<f64>>,
}

impl Posteriorgram {
    pub fn new(phones: Vec<IpaPhone>, frames: Vec<Vec<f64>>) -> Result<Self, AcousticError> {
        if phones.len() < 2 {
            return Err(AcousticError::Invalid(format!(
                "need at least 2 phones, got {}",
                phones.len()
            )));
        }
        let mut sorted = phones.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != phones.len() {
            return Err(AcousticError::Invalid("duplicate phone in inventory".into()));
        }
        if frames.is_empty() {
            return Err(AcousticError::Invalid("need at least one frame".into()));
        }
        for (t, row) in frames.iter().enumerate() {
            check_row(row, phones.len()).map_err(|m| AcousticError::Invalid(format!("frame {t}: {m}")))?;
        }
        Ok(Posteriorgram { phones, frames })
    }

    pub fn phones(&self) -> &[IpaPhone] {
        &self.phones
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn num_phones(&self) -> usize {
        self.phones.len()
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.frames[t]
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    /// Adds `shift[t]` to every entry of frame `t`. The result is no longer
    /// normalized, which is why this bypasses validation; decoders accept it.
    pub fn shifted(&self, shift: &[f64]) -> Posteriorgram {
        let frames = self
            .frames
            .iter()
            .zip(shift)
            .map(|(row, s)| row.iter().map(|x| x + s).collect())
            .collect();
        Posteriorgram {
            phones: self.phones.clone(),
            frames,
        }
    }

    /// Framewise argmax phone indices (lowest index on ties).
    pub fn argmax_path(&self) -> Vec<usize> {
        self.frames
            .iter()
            .map(|row| {
                let mut best = 0;
                for (i, &x) in row.iter().enumerate() {
                    if x > row[best] {
                        best = i;
                    }
                }
                best
            })
            .collect()
    }
}

pub(crate) fn check_row(row: &[f64], width: usize) -> Result<(), String> {
    if row.len() != width {
        return Err(format!("expected {width} values, got {}", row.len()));
    }
    if row.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
        return Err("NaN or +inf log probability".into());
    }
    let sum: f64 = row.iter().map(|x| x.exp()).sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(format!("probabilities sum to {sum}, not 1"));
    }
    Ok(())
}
