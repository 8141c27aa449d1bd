use std::f64::consts::LN_10;

use rustc_hash::FxHashMap;

use super::search::{beats, is_dead, keep_best};
use super::{
    admissible_labels, collapse_labels, state_key, DecodeConfig, DecodeError, DecodeHypothesis,
    DecodeMode, HistoryPacker,
};
use crate::acoustic::Posteriorgram;
use crate::ipa::IpaPhone;
use crate::lm::{NGramModel, TokenId, EOS_ID, UNK_ID};

const NONE: u32 = u32::MAX;

/// Search state: the current label and the LM history ending in it.
struct State {
    label: u32,
    hist: u128,
    row: u32,
}

#[derive(Clone, Copy)]
struct Tok {
    state: u32,
    score: f64,
    ac: f64,
    lm: f64,
    stay: bool,
    from: u32,
    back: u32,
}

/// Reusable phone-LM decoder.
///
/// States, their successors and the conditional LM rows are interned on first
/// use and kept across calls, so decoding many utterances with one instance
/// turns the inner loop into array lookups.
pub struct PhoneDecoder<'a> {
    lm: &'a NGramModel,
    phones: Vec<IpaPhone>,
    lm_ids: Vec<TokenId>,
    packer: HistoryPacker,
    /// history -> offset into `row_data`
    rows: FxHashMap<u128, u32>,
    /// natural-log P(label | history) for every label, then P(</s> | history)
    row_data: Vec<f64>,
    states: Vec<State>,
    state_index: FxHashMap<u128, u32>,
    /// `states.len() * P` successor table, `NONE` until computed
    next: Vec<u32>,
    start: u32,
}

impl<'a> PhoneDecoder<'a> {
    /// Binds `lm` to a posteriorgram phone list. Phones missing from the LM
    /// vocabulary score as `<unk>`; that is an error when `<unk>` has no mass.
    pub fn new(lm: &'a NGramModel, phones: &[IpaPhone]) -> Result<Self, DecodeError> {
        let packer = HistoryPacker::for_model(lm)?;
        let mut lm_ids = Vec::with_capacity(phones.len());
        let mut unknown = Vec::new();
        for p in phones {
            match lm.vocab().id(p.as_str()) {
                Some(id) => lm_ids.push(id),
                None => {
                    unknown.push(p.as_str());
                    lm_ids.push(UNK_ID);
                }
            }
        }
        if !unknown.is_empty() {
            if lm.cond_log10(&[], UNK_ID) == f64::NEG_INFINITY {
                return Err(DecodeError::InventoryMismatch(format!(
                    "phones [{}] are not in the LM vocabulary and <unk> has zero probability",
                    unknown.join(" ")
                )));
            }
            log::debug!("{} posteriorgram phones map to <unk>", unknown.len());
        }
        let mut d = PhoneDecoder {
            lm,
            phones: phones.to_vec(),
            lm_ids,
            packer,
            rows: FxHashMap::default(),
            row_data: Vec::new(),
            states: Vec::new(),
            state_index: FxHashMap::default(),
            next: Vec::new(),
            start: 0,
        };
        d.start = d.intern(NONE, packer.initial());
        Ok(d)
    }

    pub fn phones(&self) -> &[IpaPhone] {
        &self.phones
    }

    fn row_offset(&mut self, hist: u128) -> u32 {
        if let Some(&r) = self.rows.get(&hist) {
            return r;
        }
        let h = self.packer.unpack(hist);
        let offset = self.row_data.len() as u32;
        for &id in self.lm_ids.iter().chain(std::iter::once(&EOS_ID)) {
            self.row_data.push(self.lm.cond_log10(&h, id) * LN_10);
        }
        self.rows.insert(hist, offset);
        offset
    }

    fn intern(&mut self, label: u32, hist: u128) -> u32 {
        let key = state_key(hist, label);
        if let Some(&s) = self.state_index.get(&key) {
            return s;
        }
        let row = self.row_offset(hist);
        let s = self.states.len() as u32;
        self.states.push(State { label, hist, row });
        self.state_index.insert(key, s);
        self.next.extend(std::iter::repeat_n(NONE, self.phones.len()));
        s
    }

    fn successor(&mut self, s: u32, x: u32) -> u32 {
        let slot = s as usize * self.phones.len() + x as usize;
        if self.next[slot] == NONE {
            let hist = self.packer.push(self.states[s as usize].hist, self.lm_ids[x as usize]);
            let n = self.intern(x, hist);
            self.next[slot] = n;
        }
        self.next[slot]
    }

    fn lm_score(&self, s: u32, x: usize) -> f64 {
        self.row_data[self.states[s as usize].row as usize + x]
    }

    pub fn decode(
        &mut self,
        pg: &Posteriorgram,
        cfg: &DecodeConfig,
    ) -> Result<DecodeHypothesis, DecodeError> {
        cfg.validate(DecodeMode::PhoneLm)?;
        if pg.phones() != self.phones.as_slice() {
            return Err(DecodeError::InventoryMismatch(
                "posteriorgram phone list differs from the decoder's".into(),
            ));
        }
        let n_labels = self.phones.len();
        let admissible = admissible_labels(pg, cfg.beam);
        let beta = cfg.insertion_penalty;
        let mut lattice: Vec<Vec<Tok>> = Vec::with_capacity(pg.num_frames());
        // state -> position in the frame being built
        let mut slot: Vec<u32> = Vec::new();

        let offer = |frame: &mut Vec<Tok>, slot: &mut Vec<u32>, cand: Tok| {
            if is_dead(cand.score) {
                return;
            }
            let s = cand.state as usize;
            if slot.len() <= s {
                slot.resize(s + 1, NONE);
            }
            match slot[s] {
                NONE => {
                    slot[s] = frame.len() as u32;
                    frame.push(cand);
                }
                i => {
                    let t = &mut frame[i as usize];
                    if beats(cand.score, cand.stay, cand.from, t.score, t.stay, t.from) {
                        *t = cand;
                    }
                }
            }
        };

        let mut first = Vec::new();
        for &x in &admissible[0] {
            let s = self.successor(self.start, x);
            let ac = pg.frame(0)[x as usize];
            let lm = self.lm_score(self.start, x as usize);
            offer(
                &mut first,
                &mut slot,
                Tok {
                    state: s,
                    score: ac + cfg.weigh(lm) + beta,
                    ac,
                    lm,
                    stay: false,
                    from: NONE,
                    back: NONE,
                },
            );
        }
        first.iter().for_each(|t| slot[t.state as usize] = NONE);
        if let Some(n) = cfg.max_active {
            keep_best(&mut first, n, |t| t.score, |t| t.state as u128);
        }
        lattice.push(first);

        let mut allowed = vec![false; n_labels];
        for t in 1..pg.num_frames() {
            allowed.iter_mut().for_each(|a| *a = false);
            for &x in &admissible[t] {
                allowed[x as usize] = true;
            }
            let frame = pg.frame(t);
            let mut next = Vec::with_capacity(lattice[t - 1].len());
            for i in 0..lattice[t - 1].len() {
                let tok = lattice[t - 1][i];
                let cur = self.states[tok.state as usize].label;
                if allowed[cur as usize] {
                    let ac = frame[cur as usize];
                    let cand = Tok {
                        score: tok.score + ac,
                        ac: tok.ac + ac,
                        stay: true,
                        from: cur,
                        back: i as u32,
                        ..tok
                    };
                    offer(&mut next, &mut slot, cand);
                }
                for &x in &admissible[t] {
                    if x == cur {
                        continue;
                    }
                    let ac = frame[x as usize];
                    let lm = self.lm_score(tok.state, x as usize);
                    let score = tok.score + ac + cfg.weigh(lm) + beta;
                    if is_dead(score) {
                        continue;
                    }
                    let cand = Tok {
                        state: self.successor(tok.state, x),
                        score,
                        ac: tok.ac + ac,
                        lm: tok.lm + lm,
                        stay: false,
                        from: cur,
                        back: i as u32,
                    };
                    offer(&mut next, &mut slot, cand);
                }
            }
            next.iter().for_each(|t| slot[t.state as usize] = NONE);
            if let Some(n) = cfg.max_active {
                keep_best(&mut next, n, |t| t.score, |t| t.state as u128);
            }
            lattice.push(next);
        }

        let mut best: Option<(usize, f64, f64)> = None;
        let last = &lattice[lattice.len() - 1];
        for (i, tok) in last.iter().enumerate() {
            let eos = self.lm_score(tok.state, n_labels);
            let score = tok.score + cfg.weigh(eos);
            if is_dead(score) {
                continue;
            }
            if best.is_none_or(|(_, s, _)| score > s) {
                best = Some((i, score, eos));
            }
        }
        let (end, _, eos) = best.ok_or(DecodeError::NoPath {
            frames: pg.num_frames(),
        })?;

        let mut labels = vec![0usize; lattice.len()];
        let mut idx = end;
        for t in (0..lattice.len()).rev() {
            let tok = &lattice[t][idx];
            labels[t] = self.states[tok.state as usize].label as usize;
            idx = tok.back as usize;
        }
        let final_tok = &last[end];
        let phones = collapse_labels(&labels)
            .into_iter()
            .map(|i| self.phones[i].clone())
            .collect();
        Ok(DecodeHypothesis::assemble(
            phones,
            None,
            final_tok.ac,
            final_tok.lm + eos,
            cfg,
        ))
    }
}

/// One-shot convenience wrapper around [`PhoneDecoder`].
pub fn decode_phone_lm(
    pg: &Posteriorgram,
    lm: &NGramModel,
    cfg: &DecodeConfig,
) -> Result<DecodeHypothesis, DecodeError> {
    PhoneDecoder::new(lm, pg.phones())?.decode(pg, cfg)
}
