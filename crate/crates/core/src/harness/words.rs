use std::collections::HashMap;

use crate::decoder::Lexicon;
use crate::ipa::{render, IpaPhone};

pub const MIN_WORD: usize = 2;
pub const MAX_WORD: usize = 4;
/// Corpus frequency a chunk needs before it can win on length.
pub const MIN_CHUNK_COUNT: usize = 3;

/// Cuts each utterance into 2-4 phone chunks and turns the chunks into words.
///
/// Greedy left to right: at every position take the longest chunk that occurs
/// at least [`MIN_CHUNK_COUNT`] times in the whole corpus (the more frequent
/// wins among equal lengths), else the longest chunk, never leaving a single
/// phone behind. An utterance shorter than two phones becomes
/// one word. Returns the lexicon and the corpus rewritten as word sequences.
pub fn build_pseudo_lexicon(corpus: &[Vec<IpaPhone>]) -> (Lexicon, Vec<Vec<String>>) {
    let mut counts: HashMap<&[IpaPhone], usize> = HashMap::new();
    for u in corpus {
        for k in MIN_WORD..=MAX_WORD {
            for w in u.windows(k) {
                *counts.entry(w).or_default() += 1;
            }
        }
    }
    let mut lexicon = Lexicon::new();
    let mut words = Vec::with_capacity(corpus.len());
    for u in corpus {
        let mut out = Vec::new();
        let mut i = 0;
        while i < u.len() {
            let rest = u.len() - i;
            let k = (MIN_WORD..=MAX_WORD.min(rest))
                .filter(|&k| rest - k != 1)
                .max_by_key(|&k| {
                    let c = counts.get(&u[i..i + k]).copied().unwrap_or(0);
                    (c >= MIN_CHUNK_COUNT, k, c)
                })
                .unwrap_or(rest);
            let chunk = &u[i..i + k];
            let name = render(chunk, "");
            if lexicon.get(&name).is_none() {
                lexicon
                    .insert(name.clone(), chunk.to_vec())
                    .expect("chunk names are unique, non-empty and space-free");
            }
            out.push(name);
            i += k;
        }
        words.push(out);
    }
    (lexicon, words)
}
