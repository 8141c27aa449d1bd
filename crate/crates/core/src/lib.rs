//! Phonotactics-aware IPA phone recognition toolkit.
//!
//! The pipeline tokenizes IPA transcripts into phones ([`ipa`]), trains
//! backoff n-gram phonotactic models ([`lm`]), produces or loads per-frame
//! phone posteriors ([`acoustic`]), decodes them with an LM weight
//! ([`decoder`]) and scores the output ([`scorer`]). The [`harness`] module
//! generates synthetic languages and runs monolingual, multilingual and
//! crosslingual experiments.

pub mod ipa;
pub mod lm;
pub mod acoustic;
pub mod scorer;
pub mod decoder;
pub mod harness;
pub mod cli;

mod util;
