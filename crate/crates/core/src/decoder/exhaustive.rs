use std::f64::consts::LN_10;

use super::{collapse_labels, DecodeConfig, DecodeError, DecodeHypothesis, DecodeMode};
use crate::acoustic::Posteriorgram;
use crate::lm::{NGramModel, TokenId, UNK_ID};

/// Largest number of labelings [`exhaustive_decode`] will enumerate.
pub const EXHAUSTIVE_LIMIT: f64 = 1e7;

/// Reference decoder: scores every one of the `P^T` frame labelings.
/// Ignores the beam. Ties keep the first labeling in odometer order.
pub fn exhaustive_decode(
    pg: &Posteriorgram,
    lm: &NGramModel,
    cfg: &DecodeConfig,
) -> Result<DecodeHypothesis, DecodeError> {
    cfg.validate(DecodeMode::PhoneLm)?;
    let (t_len, p) = (pg.num_frames(), pg.num_phones());
    let labelings = (p as f64).powi(t_len as i32);
    if labelings > EXHAUSTIVE_LIMIT {
        return Err(DecodeError::TooLarge { labelings });
    }
    let ids: Vec<TokenId> = pg
        .phones()
        .iter()
        .map(|ph| lm.vocab().id(ph.as_str()).unwrap_or(UNK_ID))
        .collect();

    let mut labels = vec![0usize; t_len];
    let mut best: Option<(f64, f64, f64, Vec<usize>)> = None;
    loop {
        let ac: f64 = labels.iter().enumerate().map(|(t, &l)| pg.frame(t)[l]).sum();
        let path = collapse_labels(&labels);
        let seq: Vec<TokenId> = path.iter().map(|&l| ids[l]).collect();
        let lm_score = lm.logprob_ids(&seq) * LN_10;
        let total = ac + cfg.weigh(lm_score) + cfg.insertion_penalty * path.len() as f64;
        if !total.is_nan() && total > f64::NEG_INFINITY && best.as_ref().is_none_or(|b| total > b.0) {
            best = Some((total, ac, lm_score, path));
        }
        // odometer increment, last frame fastest
        let mut t = t_len;
        loop {
            if t == 0 {
                let (_, ac, lm_score, path) = best.ok_or(DecodeError::NoPath { frames: t_len })?;
                let phones = path.into_iter().map(|l| pg.phones()[l].clone()).collect();
                return Ok(DecodeHypothesis::assemble(phones, None, ac, lm_score, cfg));
            }
            t -= 1;
            labels[t] += 1;
            if labels[t] < p {
                break;
            }
            labels[t] = 0;
        }
    }
}
