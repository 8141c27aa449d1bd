use super::{DecodeConfig, DecodeError, DecodeHypothesis, DecodeMode, Lexicon, PhoneDecoder, WordDecoder};
use crate::acoustic::Posteriorgram;
use crate::ipa::IpaPhone;
use crate::lm::NGramModel;
use crate::scorer::per_report;

#[derive(Debug, Clone, Copy)]
pub enum LmSource<'a> {
    Phone(&'a NGramModel),
    Word {
        lm: &'a NGramModel,
        lexicon: &'a Lexicon,
    },
}

impl LmSource<'_> {
    pub fn mode(&self) -> DecodeMode {
        match self {
            LmSource::Phone(_) => DecodeMode::PhoneLm,
            LmSource::Word { .. } => DecodeMode::WordLm,
        }
    }
}

/// Either decoder behind one interface.
pub enum Decoder<'a> {
    Phone(PhoneDecoder<'a>),
    Word(WordDecoder<'a>),
}

impl<'a> Decoder<'a> {
    pub fn new(source: LmSource<'a>, phones: &[IpaPhone]) -> Result<Self, DecodeError> {
        Ok(match source {
            LmSource::Phone(lm) => Decoder::Phone(PhoneDecoder::new(lm, phones)?),
            LmSource::Word { lm, lexicon } => Decoder::Word(WordDecoder::new(lm, lexicon, phones)?),
        })
    }

    /// Posteriorgram phone list this decoder is bound to.
    pub fn phones(&self) -> &[IpaPhone] {
        match self {
            Decoder::Phone(d) => d.phones(),
            Decoder::Word(d) => d.phones(),
        }
    }

    pub fn decode(&mut self, pg: &Posteriorgram, cfg: &DecodeConfig) -> Result<DecodeHypothesis, DecodeError> {
        match self {
            Decoder::Phone(d) => d.decode(pg, cfg),
            Decoder::Word(d) => d.decode(pg, cfg),
        }
    }

    /// Like [`Decoder::decode`], but an utterance with no admissible path
    /// yields an empty phone sequence instead of an error.
    pub fn decode_or_empty(&mut self, pg: &Posteriorgram, cfg: &DecodeConfig) -> Result<Vec<IpaPhone>, DecodeError> {
        match self.decode(pg, cfg) {
            Ok(h) => Ok(h.phones),
            Err(DecodeError::NoPath { frames }) => {
                log::debug!("no path through {frames} frames; emitting nothing");
                Ok(Vec::new())
            }
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub best_weight: f64,
    pub best_per: f64,
    /// `(weight, dev PER)` for every grid point, in grid order.
    pub table: Vec<(f64, f64)>,
}

/// The integers 2 through 17.
pub fn default_weight_grid() -> Vec<f64> {
    (2..=17).map(f64::from).collect()
}

/// Decodes the dev set at every weight and keeps the one with the lowest
/// pooled PER; ties go to the smaller weight. `cfg.lm_weight` is ignored.
pub fn sweep_lm_weight(
    dev: &[(Posteriorgram, Vec<IpaPhone>)],
    source: LmSource<'_>,
    weights: &[f64],
    cfg: &DecodeConfig,
) -> Result<SweepResult, DecodeError> {
    if dev.is_empty() || weights.is_empty() {
        return Err(DecodeError::EmptySweep);
    }
    let mut decoder: Option<(Vec<IpaPhone>, Decoder)> = None;
    let mut table = Vec::with_capacity(weights.len());
    for &w in weights {
        let c = cfg.with_lm_weight(w);
        c.validate(source.mode())?;
        let mut pairs = Vec::with_capacity(dev.len());
        for (pg, reference) in dev {
            if decoder.as_ref().is_none_or(|(p, _)| p.as_slice() != pg.phones()) {
                decoder = Some((pg.phones().to_vec(), Decoder::new(source, pg.phones())?));
            }
            let d = &mut decoder.as_mut().expect("decoder was just built").1;
            pairs.push((reference.clone(), d.decode_or_empty(pg, &c)?));
        }
        table.push((w, per_report(&pairs)?.per));
    }
    let (best_weight, best_per) = table
        .iter()
        .copied()
        .fold(None, |acc: Option<(f64, f64)>, (w, p)| match acc {
            Some((bw, bp)) if bp < p || (bp == p && bw <= w) => Some((bw, bp)),
            _ => Some((w, p)),
        })
        .expect("grid is non-empty");
    Ok(SweepResult {
        best_weight,
        best_per,
        table,
    })
}
