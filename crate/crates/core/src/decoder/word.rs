use rustc_hash::FxHashMap as HashMap;
use std::f64::consts::LN_10;

use super::search::{beats, is_dead, keep_best};
use super::{
    admissible_labels, state_key, DecodeConfig, DecodeError, DecodeHypothesis, DecodeMode,
    HistoryPacker, Lexicon,
};
use crate::acoustic::Posteriorgram;
use crate::ipa::IpaPhone;
use crate::lm::{NGramModel, TokenId, EOS_ID};

const NONE: u32 = u32::MAX;
const ROOT: u32 = 0;

struct CompiledWord {
    name: String,
    lm_id: TokenId,
}

/// Prefix-tree node. The root carries no label.
struct Node {
    label: u32,
    children: Vec<u32>,
    /// word whose pronunciation ends here
    word: u32,
}

/// Interned search state: an LM history and a prefix-tree node.
struct State {
    hist: u128,
    node: u32,
    label: u32,
    /// successors in `succ`, children first, then the word-boundary entries
    succ_at: u32,
    n_children: u32,
    n_succ: u32,
    /// natural-log P(word | hist) for the word ending at `node`
    word_lm: f64,
}

const UNEXPANDED: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Tok {
    state: u32,
    score: f64,
    ac: f64,
    lm: f64,
    stay: bool,
    from: u32,
    back: u32,
    /// word completed on the transition into this token
    ended: u32,
}

fn offer(frame: &mut Vec<Tok>, slot: &mut [u32], cand: Tok) {
    if is_dead(cand.score) {
        return;
    }
    let s = cand.state as usize;
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
}

/// Reusable lexicon plus word-LM decoder.
///
/// Pronunciations share a prefix tree and a word's LM cost is charged when the
/// word ends, so a word boundary fans out to at most one branch per phone
/// rather than one per word. Lexicon entries that use phones outside the
/// posteriorgram inventory, or that repeat a phone back to back (a collapsed
/// path cannot produce them), are dropped with a warning. Adjacent words may
/// not join on the same phone.
pub struct WordDecoder<'a> {
    lm: &'a NGramModel,
    phones: Vec<IpaPhone>,
    words: Vec<CompiledWord>,
    nodes: Vec<Node>,
    packer: HistoryPacker,
    /// (history, token) -> natural-log conditional probability
    cache: HashMap<(u128, TokenId), f64>,
    /// (history, word) -> reduced history after the word
    advance: HashMap<(u128, TokenId), u128>,
    states: Vec<State>,
    state_index: HashMap<u128, u32>,
    succ: Vec<u32>,
}

impl<'a> WordDecoder<'a> {
    pub fn new(lm: &'a NGramModel, lexicon: &Lexicon, phones: &[IpaPhone]) -> Result<Self, DecodeError> {
        if lexicon.is_empty() {
            return Err(DecodeError::EmptyLexicon);
        }
        let packer = HistoryPacker::for_model(lm)?;
        let label: HashMap<&IpaPhone, u32> =
            phones.iter().enumerate().map(|(i, p)| (p, i as u32)).collect();
        let mut words = Vec::new();
        let mut nodes = vec![Node { label: NONE, children: Vec::new(), word: NONE }];
        let mut skipped = 0usize;
        for (name, pron) in lexicon.iter() {
            let labels: Option<Vec<u32>> = pron.iter().map(|p| label.get(p).copied()).collect();
            let Some(labels) = labels.filter(|l| l.windows(2).all(|w| w[0] != w[1])) else {
                skipped += 1;
                continue;
            };
            let mut at = ROOT;
            for &x in &labels {
                at = match nodes[at as usize].children.iter().find(|&&c| nodes[c as usize].label == x) {
                    Some(&c) => c,
                    None => {
                        let c = nodes.len() as u32;
                        nodes.push(Node { label: x, children: Vec::new(), word: NONE });
                        nodes[at as usize].children.push(c);
                        c
                    }
                };
            }
            nodes[at as usize].word = words.len() as u32;
            words.push(CompiledWord {
                name: name.to_string(),
                lm_id: lm.vocab().id_or_unk(name),
            });
        }
        if skipped > 0 {
            log::warn!("{skipped} of {} lexicon entries cannot be decoded and were skipped", lexicon.len());
        }
        if words.is_empty() {
            return Err(DecodeError::InventoryMismatch(
                "no lexicon entry is expressible in the posteriorgram inventory".into(),
            ));
        }
        Ok(WordDecoder {
            lm,
            phones: phones.to_vec(),
            words,
            nodes,
            packer,
            cache: HashMap::default(),
            advance: HashMap::default(),
            states: Vec::new(),
            state_index: HashMap::default(),
            succ: Vec::new(),
        })
    }

    pub fn phones(&self) -> &[IpaPhone] {
        &self.phones
    }

    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    fn lm_cost(&mut self, hist: u128, id: TokenId) -> f64 {
        if let Some(&v) = self.cache.get(&(hist, id)) {
            return v;
        }
        let v = self.lm.cond_log10(&self.packer.unpack(hist), id) * LN_10;
        self.cache.insert((hist, id), v);
        v
    }

    fn advance(&mut self, hist: u128, id: TokenId) -> u128 {
        if let Some(&h) = self.advance.get(&(hist, id)) {
            return h;
        }
        let h = self.packer.reduce(self.lm, self.packer.push(hist, id));
        self.advance.insert((hist, id), h);
        h
    }

    /// Clears the frame's slots and applies the token cap.
    fn finish(&self, frame: &mut Vec<Tok>, slot: &mut [u32], max_active: Option<usize>) {
        frame.iter().for_each(|t| slot[t.state as usize] = NONE);
        if let Some(n) = max_active {
            let states = &self.states;
            keep_best(frame, n, |t| t.score, |t| {
                let st = &states[t.state as usize];
                state_key(st.hist, st.node)
            });
        }
    }

    fn intern(&mut self, hist: u128, node: u32) -> u32 {
        let key = state_key(hist, node);
        if let Some(&s) = self.state_index.get(&key) {
            return s;
        }
        let s = self.states.len() as u32;
        self.states.push(State {
            hist,
            node,
            label: self.nodes[node as usize].label,
            succ_at: UNEXPANDED,
            n_children: 0,
            n_succ: 0,
            word_lm: f64::NEG_INFINITY,
        });
        self.state_index.insert(key, s);
        s
    }

    fn expand(&mut self, s: u32) {
        if self.states[s as usize].succ_at != UNEXPANDED {
            return;
        }
        let (hist, node) = (self.states[s as usize].hist, self.states[s as usize].node);
        let mut out = Vec::new();
        for i in 0..self.nodes[node as usize].children.len() {
            let c = self.nodes[node as usize].children[i];
            out.push(self.intern(hist, c));
        }
        let n_children = out.len() as u32;
        let w = self.nodes[node as usize].word;
        let mut word_lm = f64::NEG_INFINITY;
        if w != NONE {
            let id = self.words[w as usize].lm_id;
            word_lm = self.lm_cost(hist, id);
            let after = self.advance(hist, id);
            let cur = self.nodes[node as usize].label;
            for i in 0..self.nodes[ROOT as usize].children.len() {
                let c = self.nodes[ROOT as usize].children[i];
                if self.nodes[c as usize].label != cur {
                    out.push(self.intern(after, c));
                }
            }
        }
        let st = &mut self.states[s as usize];
        st.succ_at = self.succ.len() as u32;
        st.n_children = n_children;
        st.n_succ = out.len() as u32;
        st.word_lm = word_lm;
        self.succ.extend(out);
    }

    pub fn decode(
        &mut self,
        pg: &Posteriorgram,
        cfg: &DecodeConfig,
    ) -> Result<DecodeHypothesis, DecodeError> {
        cfg.validate(DecodeMode::WordLm)?;
        if pg.phones() != self.phones.as_slice() {
            return Err(DecodeError::InventoryMismatch(
                "posteriorgram phone list differs from the decoder's".into(),
            ));
        }
        let admissible = admissible_labels(pg, cfg.beam);
        let beta = cfg.insertion_penalty;
        let mut allowed = vec![false; self.phones.len()];
        let mut lattice: Vec<Vec<Tok>> = Vec::with_capacity(pg.num_frames());

        let initial = self.packer.reduce(self.lm, self.packer.initial());
        let mut slot: Vec<u32> = Vec::new();
        let mut first = Vec::new();
        for &x in &admissible[0] {
            allowed[x as usize] = true;
        }
        for i in 0..self.nodes[ROOT as usize].children.len() {
            let c = self.nodes[ROOT as usize].children[i];
            let x = self.nodes[c as usize].label;
            if !allowed[x as usize] {
                continue;
            }
            let ac = pg.frame(0)[x as usize];
            let state = self.intern(initial, c);
            slot.resize(self.states.len(), NONE);
            offer(
                &mut first,
                &mut slot,
                Tok {
                    state,
                    score: ac + beta,
                    ac,
                    lm: 0.0,
                    stay: false,
                    from: NONE,
                    back: NONE,
                    ended: NONE,
                },
            );
        }
        self.finish(&mut first, &mut slot, cfg.max_active);
        lattice.push(first);

        for t in 1..pg.num_frames() {
            allowed.iter_mut().for_each(|a| *a = false);
            for &x in &admissible[t] {
                allowed[x as usize] = true;
            }
            let frame = pg.frame(t);
            let mut next = Vec::with_capacity(lattice[t - 1].len());
            for i in 0..lattice[t - 1].len() {
                let tok = lattice[t - 1][i];
                self.expand(tok.state);
                slot.resize(self.states.len(), NONE);
                let st = &self.states[tok.state as usize];
                let cur = st.label;
                let base = Tok {
                    stay: false,
                    from: cur,
                    back: i as u32,
                    ended: NONE,
                    ..tok
                };
                if allowed[cur as usize] {
                    let ac = frame[cur as usize];
                    offer(
                        &mut next,
                        &mut slot,
                        Tok {
                            score: tok.score + ac,
                            ac: tok.ac + ac,
                            stay: true,
                            ..base
                        },
                    );
                }
                let succ = &self.succ[st.succ_at as usize..(st.succ_at + st.n_succ) as usize];
                let (children, entries) = succ.split_at(st.n_children as usize);
                for &c in children {
                    let x = self.states[c as usize].label;
                    if allowed[x as usize] {
                        let ac = frame[x as usize];
                        offer(
                            &mut next,
                            &mut slot,
                            Tok {
                                state: c,
                                score: tok.score + ac + beta,
                                ac: tok.ac + ac,
                                ..base
                            },
                        );
                    }
                }
                if entries.is_empty() {
                    continue;
                }
                let lm = st.word_lm;
                let entered = tok.score + cfg.weigh(lm) + beta;
                if is_dead(entered) {
                    continue;
                }
                let w = self.nodes[st.node as usize].word;
                for &c in entries {
                    let x = self.states[c as usize].label;
                    if !allowed[x as usize] {
                        continue;
                    }
                    let ac = frame[x as usize];
                    offer(
                        &mut next,
                        &mut slot,
                        Tok {
                            state: c,
                            score: entered + ac,
                            ac: tok.ac + ac,
                            lm: tok.lm + lm,
                            ended: w,
                            ..base
                        },
                    );
                }
            }
            self.finish(&mut next, &mut slot, cfg.max_active);
            lattice.push(next);
        }

        let mut best: Option<(usize, f64, f64)> = None;
        let n_last = lattice[lattice.len() - 1].len();
        for i in 0..n_last {
            let tok = lattice[lattice.len() - 1][i];
            let (hist, node) = (self.states[tok.state as usize].hist, self.states[tok.state as usize].node);
            let w = self.nodes[node as usize].word;
            if w == NONE {
                continue;
            }
            let id = self.words[w as usize].lm_id;
            let lm = self.lm_cost(hist, id);
            let after = self.advance(hist, id);
            let eos = self.lm_cost(after, EOS_ID);
            let score = tok.score + cfg.weigh(lm) + cfg.weigh(eos);
            if is_dead(score) {
                continue;
            }
            if best.is_none_or(|(_, s, _)| score > s) {
                best = Some((i, score, lm + eos));
            }
        }
        let (end, _, tail) = best.ok_or(DecodeError::NoPath {
            frames: pg.num_frames(),
        })?;

        let last = &lattice[lattice.len() - 1];
        let mut phones = Vec::new();
        let end_node = self.states[last[end].state as usize].node;
        let mut words = vec![self.words[self.nodes[end_node as usize].word as usize].name.clone()];
        let mut idx = end;
        for t in (0..lattice.len()).rev() {
            let tok = &lattice[t][idx];
            if !tok.stay {
                phones.push(self.phones[self.states[tok.state as usize].label as usize].clone());
            }
            if tok.ended != NONE {
                words.push(self.words[tok.ended as usize].name.clone());
            }
            idx = tok.back as usize;
        }
        phones.reverse();
        words.reverse();
        Ok(DecodeHypothesis::assemble(
            phones,
            Some(words),
            last[end].ac,
            last[end].lm + tail,
            cfg,
        ))
    }
}

/// One-shot convenience wrapper around [`WordDecoder`].
pub fn decode_word_lm(
    pg: &Posteriorgram,
    lexicon: &Lexicon,
    lm: &NGramModel,
    cfg: &DecodeConfig,
) -> Result<DecodeHypothesis, DecodeError> {
    WordDecoder::new(lm, lexicon, pg.phones())?.decode(pg, cfg)
}
