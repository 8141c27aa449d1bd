//! Backoff n-gram language models over phones or words.

mod arpa;
mod model;
mod vocab;

pub use arpa::{read_arpa, write_arpa};
pub use model::{Entry, NGramModel, Smoothing};
pub use vocab::{is_reserved, TokenId, Vocabulary, BOS, BOS_ID, EOS, EOS_ID, UNK, UNK_ID};

#[derive(Debug, thiserror::Error)]
pub enum LmError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("corpus uses reserved token `{0}`")]
    ReservedToken(String),
    #[error("malformed ARPA at line {line}: {message}")]
    MalformedArpa { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
