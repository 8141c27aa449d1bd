//! `<utt-id>\t<transcript>` files, one utterance per line.

use std::io::{BufRead, Write};

use super::{render, tokenize, IpaError, IpaPhone};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptMode {
    /// Raw IPA; the tokenizer decides phone boundaries.
    Raw,
    /// Whitespace-separated phones, each of which must parse as exactly one phone.
    Phones,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub id: String,
    pub phones: Vec<IpaPhone>,
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("line {line}: {source}")]
    Ipa {
        line: usize,
        #[source]
        source: IpaError,
    },
    #[error("line {line}: expected `<utt-id>\\t<transcript>`")]
    MissingTab { line: usize },
    #[error("line {line}: duplicate utterance id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn parse_transcript_line(text: &str, mode: TranscriptMode) -> Result<Vec<IpaPhone>, IpaError> {
    match mode {
        TranscriptMode::Raw => tokenize(text),
        TranscriptMode::Phones => text.split_whitespace().map(IpaPhone::parse).collect(),
    }
}

pub fn read_transcripts<R: BufRead>(
    reader: R,
    mode: TranscriptMode,
) -> Result<Vec<Utterance>, TranscriptError> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line
            .split_once('\t')
            .ok_or(TranscriptError::MissingTab { line: lineno })?;
        let phones = parse_transcript_line(text, mode)
            .map_err(|source| TranscriptError::Ipa { line: lineno, source })?;
        if !seen.insert(id.to_string()) {
            return Err(TranscriptError::DuplicateId {
                line: lineno,
                id: id.to_string(),
            });
        }
        out.push(Utterance {
            id: id.to_string(),
            phones,
        });
    }
    Ok(out)
}

/// Writes utterances as space-separated canonical phones, readable in either mode.
pub fn write_transcripts<W: Write>(mut w: W, utts: &[Utterance]) -> std::io::Result<()> {
    for u in utts {
        writeln!(w, "{}\t{}", u.id, render(&u.phones, " "))?;
    }
    Ok(())
}
