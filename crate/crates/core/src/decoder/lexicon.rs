use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::DecodeError;
use crate::ipa::{render, tokenize, IpaPhone};

/// Word to pronunciation map; `<word>\t<IPA>` per line on disk.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<IpaPhone>>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, pron: Vec<IpaPhone>) -> Result<(), DecodeError> {
        let word = word.into();
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(DecodeError::MalformedLexicon {
                line: 0,
                message: format!("invalid word `{word}`"),
            });
        }
        if pron.is_empty() {
            return Err(DecodeError::MalformedLexicon {
                line: 0,
                message: format!("word `{word}` has no phones"),
            });
        }
        if self.entries.contains_key(&word) {
            return Err(DecodeError::MalformedLexicon {
                line: 0,
                message: format!("duplicate word `{word}`"),
            });
        }
        self.entries.insert(word, pron);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[IpaPhone]> {
        self.entries.get(word).map(|v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[IpaPhone])> {
        self.entries.iter().map(|(w, p)| (w.as_str(), p.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn read_lexicon<R: BufRead>(reader: R) -> Result<Lexicon, DecodeError> {
    let mut lex = Lexicon::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| DecodeError::MalformedLexicon { line: lineno, message };
        let (word, ipa) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected `<word>\\t<IPA>`".into()))?;
        let pron = tokenize(ipa).map_err(|e| bad(e.to_string()))?;
        lex.insert(word, pron).map_err(|e| match e {
            DecodeError::MalformedLexicon { message, .. } => bad(message),
            other => other,
        })?;
    }
    Ok(lex)
}

pub fn write_lexicon<W: Write>(lex: &Lexicon, mut w: W) -> std::io::Result<()> {
    for (word, pron) in lex.iter() {
        writeln!(w, "{word}\t{}", render(pron, " "))?;
    }
    Ok(())
}
