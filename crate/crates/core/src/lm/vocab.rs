use std::collections::HashMap;

use super::LmError;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub type TokenId = u32;

pub const BOS_ID: TokenId = 0;
pub const EOS_ID: TokenId = 1;
pub const UNK_ID: TokenId = 2;

/// Dense token index. Reserved tokens take ids 0..3, corpus tokens follow in sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    items: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut corpus: Vec<String> = Vec::new();
        for t in tokens {
            let t = t.as_ref();
            if is_reserved(t) {
                return Err(LmError::ReservedToken(t.to_string()));
            }
            corpus.push(t.to_string());
        }
        corpus.sort();
        corpus.dedup();
        let items: Vec<String> = [BOS, EOS, UNK]
            .iter()
            .map(|s| s.to_string())
            .chain(corpus)
            .collect();
        let index = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as TokenId))
            .collect();
        Ok(Vocabulary { items, index })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> TokenId {
        self.id(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.items[id as usize]
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|s| s.as_str())
    }

    /// Every id that can be predicted, i.e. all but `<s>`.
    pub fn predictable(&self) -> impl Iterator<Item = TokenId> {
        1..self.items.len() as TokenId
    }

    pub fn num_predictable(&self) -> usize {
        self.items.len() - 1
    }
}

pub fn is_reserved(token: &str) -> bool {
    token == BOS || token == EOS || token == UNK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_first_then_sorted() {
        let v = Vocabulary::from_tokens(["b", "a", "b"]).unwrap();
        assert_eq!(v.tokens().collect::<Vec<_>>(), vec![BOS, EOS, UNK, "a", "b"]);
        assert_eq!(v.id("a"), Some(3));
        assert_eq!(v.id_or_unk("zz"), UNK_ID);
        assert_eq!(v.num_predictable(), 4);
    }

    #[test]
    fn corpus_may_not_use_reserved_tokens() {
        assert!(matches!(
            Vocabulary::from_tokens(["a", "</s>"]),
            Err(LmError::ReservedToken(t)) if t == "</s>"
        ));
    }
}
