use std::collections::{BTreeMap, HashMap};

use super::vocab::{TokenId, Vocabulary, BOS_ID, EOS_ID};
use super::LmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Smoothing {
    Mle,
    WittenBell,
}

impl std::str::FromStr for Smoothing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mle" => Ok(Smoothing::Mle),
            "witten-bell" | "wb" => Ok(Smoothing::WittenBell),
            other => Err(format!("unknown smoothing `{other}` (expected mle or witten-bell)")),
        }
    }
}

/// Stored n-gram. Zero probabilities are `f64::NEG_INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub log10_prob: f64,
    pub log10_backoff: Option<f64>,
}

/// Backoff n-gram model with log10 scores.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    pub(super) order: usize,
    pub(super) vocab: Vocabulary,
    pub(super) smoothing: Option<Smoothing>,
    /// `grams[k - 1]` holds the k-grams, keyed by context followed by token.
    pub(super) grams: Vec<BTreeMap<Vec<TokenId>, Entry>>,
}

type Counts = HashMap<Vec<TokenId>, u64>;

impl NGramModel {
    /// Trains an order-`order` model with `order - 1` `<s>` paddings and a final `</s>`.
    pub fn train<S: AsRef<str>>(
        corpus: &[Vec<S>],
        order: usize,
        smoothing: Smoothing,
    ) -> Result<Self, LmError> {
        if corpus.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        if order == 0 {
            return Err(LmError::InvalidOrder(order));
        }
        let vocab = Vocabulary::from_tokens(corpus.iter().flatten())?;

        // counts[k - 1]: k-gram event counts, key = history (k - 1 tokens) + token
        let mut counts: Vec<Counts> = vec![HashMap::new(); order];
        let mut padded: Vec<TokenId> = Vec::new();
        for sentence in corpus {
            padded.clear();
            padded.extend(std::iter::repeat_n(BOS_ID, order - 1));
            padded.extend(sentence.iter().map(|t| vocab.id(t.as_ref()).unwrap()));
            padded.push(EOS_ID);
            for i in (order - 1)..padded.len() {
                for k in 1..=order {
                    *counts[k - 1].entry(padded[i + 1 - k..=i].to_vec()).or_default() += 1;
                }
            }
        }

        let mut model = NGramModel {
            order,
            vocab,
            smoothing: Some(smoothing),
            grams: vec![BTreeMap::new(); order],
        };
        model.estimate_unigrams(&counts[0], smoothing);
        for k in 2..=order {
            model.estimate_order(k, &counts[k - 1], smoothing);
        }
        Ok(model)
    }

    /// Uniform unigram model over `tokens` plus `</s>` and `<unk>`.
    pub fn uniform<I, S>(tokens: I) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let vocab = Vocabulary::from_tokens(tokens)?;
        let lp = -(vocab.num_predictable() as f64).log10();
        let mut unigrams = BTreeMap::new();
        for id in 0..vocab.len() as TokenId {
            let log10_prob = if id == BOS_ID { f64::NEG_INFINITY } else { lp };
            unigrams.insert(
                vec![id],
                Entry {
                    log10_prob,
                    log10_backoff: None,
                },
            );
        }
        Ok(NGramModel {
            order: 1,
            vocab,
            smoothing: None,
            grams: vec![unigrams],
        })
    }

    fn estimate_unigrams(&mut self, counts: &Counts, smoothing: Smoothing) {
        let total: u64 = counts.values().sum();
        let types = counts.len() as f64;
        let n_pred = self.vocab.num_predictable() as f64;
        for id in 0..self.vocab.len() as TokenId {
            let c = counts.get(&vec![id]).copied().unwrap_or(0) as f64;
            let p = if id == BOS_ID {
                0.0
            } else {
                match smoothing {
                    Smoothing::Mle => c / total as f64,
                    Smoothing::WittenBell => (c + types / n_pred) / (total as f64 + types),
                }
            };
            self.grams[0].insert(
                vec![id],
                Entry {
                    log10_prob: p.log10(),
                    log10_backoff: None,
                },
            );
        }
    }

    fn estimate_order(&mut self, k: usize, counts: &Counts, smoothing: Smoothing) {
        // history -> (total count, distinct followers)
        let mut history_stats: HashMap<&[TokenId], (u64, u64)> = HashMap::new();
        for (gram, &c) in counts {
            let s = history_stats.entry(&gram[..k - 1]).or_default();
            s.0 += c;
            s.1 += 1;
        }

        let mut entries = BTreeMap::new();
        for (gram, &c) in counts {
            let (total, types) = history_stats[&gram[..k - 1]];
            let (c, total, types) = (c as f64, total as f64, types as f64);
            let p = match smoothing {
                Smoothing::Mle => c / total,
                Smoothing::WittenBell => {
                    let lower = 10f64.powf(self.cond_log10(&gram[1..k - 1], gram[k - 1]));
                    (c + types * lower) / (total + types)
                }
            };
            entries.insert(
                gram.clone(),
                Entry {
                    log10_prob: p.log10(),
                    log10_backoff: None,
                },
            );
        }

        for (history, (total, types)) in history_stats {
            let bo = match smoothing {
                Smoothing::Mle => f64::NEG_INFINITY,
                Smoothing::WittenBell => (types as f64 / (total + types) as f64).log10(),
            };
            // all-<s> histories are never predicted themselves; store them as zero-probability grams
            let e = self.grams[k - 2].entry(history.to_vec()).or_insert(Entry {
                log10_prob: f64::NEG_INFINITY,
                log10_backoff: None,
            });
            e.log10_backoff = Some(bo);
        }
        self.grams[k - 1] = entries;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn smoothing(&self) -> Option<Smoothing> {
        self.smoothing
    }

    pub fn entry(&self, gram: &[TokenId]) -> Option<&Entry> {
        self.grams.get(gram.len().checked_sub(1)?)?.get(gram)
    }

    /// All stored k-grams, `k` in `1..=order`.
    pub fn grams(&self, k: usize) -> impl Iterator<Item = (&[TokenId], &Entry)> {
        self.grams[k - 1].iter().map(|(g, e)| (g.as_slice(), e))
    }

    pub fn num_grams(&self, k: usize) -> usize {
        self.grams[k - 1].len()
    }

    /// log10 P(token | history) with standard backoff resolution.
    /// Only the last `order - 1` history tokens are used.
    pub fn cond_log10(&self, history: &[TokenId], token: TokenId) -> f64 {
        let keep = history.len().min(self.order - 1);
        let h = &history[history.len() - keep..];
        let mut backoff = 0.0;
        let mut key = Vec::with_capacity(h.len() + 1);
        for start in 0..=h.len() {
            let ctx = &h[start..];
            key.clear();
            key.extend_from_slice(ctx);
            key.push(token);
            if let Some(e) = self.grams[ctx.len()].get(&key) {
                return backoff + e.log10_prob;
            }
            if !ctx.is_empty() {
                if let Some(bo) = self.grams[ctx.len() - 1].get(ctx).and_then(|e| e.log10_backoff) {
                    backoff += bo;
                }
            }
        }
        f64::NEG_INFINITY
    }

    /// Sum of per-token log10 probabilities of `seq` followed by `</s>`.
    pub fn logprob_seq<S: AsRef<str>>(&self, seq: &[S]) -> f64 {
        let ids: Vec<TokenId> = seq.iter().map(|t| self.vocab.id_or_unk(t.as_ref())).collect();
        self.logprob_ids(&ids)
    }

    pub fn logprob_ids(&self, ids: &[TokenId]) -> f64 {
        let mut history: Vec<TokenId> = vec![BOS_ID; self.order - 1];
        let mut total = 0.0;
        for &id in ids.iter().chain(std::iter::once(&EOS_ID)) {
            total += self.cond_log10(&history, id);
            history.push(id);
        }
        total
    }

    pub fn perplexity<S: AsRef<str>>(&self, corpus: &[Vec<S>]) -> Result<f64, LmError> {
        if corpus.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        let mut total = 0.0;
        let mut n = 0usize;
        for s in corpus {
            total += self.logprob_seq(s);
            n += s.len() + 1;
        }
        Ok(10f64.powf(-total / n as f64))
    }

    /// Whether the model can distinguish `context` from its one-token-shorter
    /// suffix: some stored gram extends it or it carries a nonzero backoff.
    /// When it cannot, every conditional given `context` equals the one given
    /// `context[1..]`.
    pub fn is_live_context(&self, context: &[TokenId]) -> bool {
        let k = context.len();
        if k == 0 {
            return true;
        }
        if k >= self.order {
            return false;
        }
        let weighted = self.grams[k - 1]
            .get(context)
            .and_then(|e| e.log10_backoff)
            .is_some_and(|b| b != 0.0);
        weighted
            || self.grams[k]
                .range(context.to_vec()..)
                .next()
                .is_some_and(|(g, _)| g.starts_with(context))
    }

    /// Total probability mass that `history` assigns to the predictable vocabulary.
    pub fn context_mass(&self, history: &[TokenId]) -> f64 {
        self.vocab
            .predictable()
            .map(|w| 10f64.powf(self.cond_log10(history, w)))
            .sum()
    }

    /// Contexts that carry (or could carry) a backoff weight: all stored grams below the top order.
    pub fn stored_contexts(&self) -> Vec<Vec<TokenId>> {
        self.grams[..self.order - 1]
            .iter()
            .flat_map(|m| m.keys().cloned())
            .collect()
    }

    /// First stored gram whose context is not itself stored.
    pub fn find_orphan(&self) -> Option<Vec<TokenId>> {
        for k in 2..=self.order {
            for gram in self.grams[k - 1].keys() {
                if !self.grams[k - 2].contains_key(&gram[..k - 1]) {
                    return Some(gram.clone());
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::vocab::UNK_ID;

    fn corpus(s: &[&[&str]]) -> Vec<Vec<String>> {
        s.iter().map(|u| u.iter().map(|t| t.to_string()).collect()).collect()
    }

    fn three_utts() -> Vec<Vec<String>> {
        corpus(&[&["a", "b"], &["a", "b"], &["a", "c"]])
    }

    #[test]
    fn mle_unigram_hand_counts() {
        let m = NGramModel::train(&three_utts(), 1, Smoothing::Mle).unwrap();
        let v = m.vocab();
        let p = |t: &str| 10f64.powf(m.cond_log10(&[], v.id(t).unwrap()));
        assert!((p("a") - 3.0 / 9.0).abs() < 1e-12);
        assert!((p("b") - 2.0 / 9.0).abs() < 1e-12);
        assert!((p("c") - 1.0 / 9.0).abs() < 1e-12);
        assert!((p("</s>") - 3.0 / 9.0).abs() < 1e-12);
        assert_eq!(m.cond_log10(&[], UNK_ID), f64::NEG_INFINITY);
    }

    #[test]
    fn mle_single_token() {
        let m = NGramModel::train(&corpus(&[&["a"]]), 1, Smoothing::Mle).unwrap();
        let v = m.vocab();
        assert!((m.cond_log10(&[], v.id("a").unwrap()) - 0.5f64.log10()).abs() < 1e-12);
        assert!((m.cond_log10(&[], EOS_ID) - 0.5f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn logprob_seq_hand_computed() {
        let m = NGramModel::train(&three_utts(), 1, Smoothing::Mle).unwrap();
        let expected = (1.0f64 / 3.0).log10() + (2.0f64 / 9.0).log10() + (3.0f64 / 9.0).log10();
        assert!((m.logprob_seq(&["a", "b"]) - expected).abs() < 1e-12);
    }

    #[test]
    fn uniform_decomposes() {
        let m = NGramModel::uniform(["a", "b"]).unwrap();
        // predictable: </s>, <unk>, a, b
        let lp = 0.25f64.log10();
        assert!((m.logprob_seq(&["a"]) - 2.0 * lp).abs() < 1e-12);
        let ppl = m.perplexity(&corpus(&[&["a", "b"], &["b"]])).unwrap();
        assert!((ppl - 4.0).abs() < 1e-9);
    }

    #[test]
    fn mle_bigram_hand_counts() {
        let m = NGramModel::train(&three_utts(), 2, Smoothing::Mle).unwrap();
        let v = m.vocab();
        let (a, b, c) = (v.id("a").unwrap(), v.id("b").unwrap(), v.id("c").unwrap());
        assert!((m.cond_log10(&[BOS_ID], a) - 0.0).abs() < 1e-12);
        assert!((10f64.powf(m.cond_log10(&[a], b)) - 2.0 / 3.0).abs() < 1e-12);
        assert!((10f64.powf(m.cond_log10(&[a], c)) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.cond_log10(&[a], a), f64::NEG_INFINITY);
        assert_eq!(m.cond_log10(&[b], EOS_ID), 0.0);
        assert!(m.find_orphan().is_none());
    }

    #[test]
    fn witten_bell_bigram_by_hand() {
        // corpus [a b] [a b] [a c]; unigram events a:3 b:2 c:1 </s>:3, N=9, T=4, V=5
        let m = NGramModel::train(&three_utts(), 2, Smoothing::WittenBell).unwrap();
        let v = m.vocab();
        let (a, b, c) = (v.id("a").unwrap(), v.id("b").unwrap(), v.id("c").unwrap());
        let uni = |count: f64| (count + 4.0 / 5.0) / 13.0;
        let p = |h: TokenId, w: TokenId| 10f64.powf(m.cond_log10(&[h], w));
        assert!((p(BOS_ID, c) - uni(1.0) / 4.0).abs() < 1e-12);
        assert!((10f64.powf(m.cond_log10(&[], UNK_ID)) - uni(0.0)).abs() < 1e-12);
        // history a: followers b:2 c:1, total 3, types 2
        assert!((p(a, b) - (2.0 + 2.0 * uni(2.0)) / 5.0).abs() < 1e-12);
        assert!((p(a, c) - (1.0 + 2.0 * uni(1.0)) / 5.0).abs() < 1e-12);
        assert!((p(a, a) - 2.0 / 5.0 * uni(3.0)).abs() < 1e-12);
        // history <s>: follower a:3, types 1
        assert!((p(BOS_ID, a) - (3.0 + uni(3.0)) / 4.0).abs() < 1e-12);
        for h in [BOS_ID, a, b, c, UNK_ID, EOS_ID] {
            assert!((m.context_mass(&[h]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trigram_stores_all_bos_context() {
        let m = NGramModel::train(&three_utts(), 3, Smoothing::WittenBell).unwrap();
        let e = m.entry(&[BOS_ID, BOS_ID]).unwrap();
        assert_eq!(e.log10_prob, f64::NEG_INFINITY);
        assert!(e.log10_backoff.is_some());
        assert!(m.find_orphan().is_none());
        assert!((m.context_mass(&[BOS_ID, BOS_ID]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_and_bad_order() {
        let empty: Vec<Vec<String>> = vec![];
        assert!(matches!(
            NGramModel::train(&empty, 2, Smoothing::Mle),
            Err(LmError::EmptyCorpus)
        ));
        assert!(matches!(
            NGramModel::train(&three_utts(), 0, Smoothing::Mle),
            Err(LmError::InvalidOrder(0))
        ));
        let m = NGramModel::train(&three_utts(), 1, Smoothing::Mle).unwrap();
        assert!(matches!(m.perplexity(&empty), Err(LmError::EmptyCorpus)));
    }

    #[test]
    fn perplexity_matches_direct_product() {
        let train = corpus(&[
            &["a", "b", "c"],
            &["b", "c"],
            &["a", "c", "b", "a"],
            &["c"],
            &["a", "b"],
        ]);
        let m = NGramModel::train(&train, 2, Smoothing::WittenBell).unwrap();
        // brute force: product of per-token probabilities, independent of logprob_seq
        let mut prob = 1.0f64;
        let mut n = 0;
        for s in &train {
            let mut prev = BOS_ID;
            for t in s.iter().map(|t| m.vocab().id(t).unwrap()).chain([EOS_ID]) {
                prob *= 10f64.powf(m.cond_log10(&[prev], t));
                prev = t;
                n += 1;
            }
        }
        let expected = prob.powf(-1.0 / n as f64);
        assert!((m.perplexity(&train).unwrap() - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn higher_order_mle_never_has_higher_training_perplexity() {
        let train = corpus(&[
            &["a", "b", "c", "a"],
            &["b", "c", "b"],
            &["a", "c", "b", "a", "c"],
            &["c", "a"],
        ]);
        let mut prev = f64::INFINITY;
        for n in 1..=4 {
            let ppl = NGramModel::train(&train, n, Smoothing::Mle)
                .unwrap()
                .perplexity(&train)
                .unwrap();
            assert!(ppl <= prev + 1e-12, "order {n}: {ppl} > {prev}");
            prev = ppl;
        }
    }

    #[test]
    fn training_is_deterministic() {
        let a = NGramModel::train(&three_utts(), 3, Smoothing::WittenBell).unwrap();
        let b = NGramModel::train(&three_utts(), 3, Smoothing::WittenBell).unwrap();
        assert_eq!(a, b);
    }
}
