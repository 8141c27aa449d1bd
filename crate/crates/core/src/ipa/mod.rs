//! IPA symbol classification, phone tokenization and inventory statistics.

mod inventory;
mod phone;
mod symbol;
pub mod transcript;

pub use inventory::{inventory_stats, phone_class, sharing_count, InventoryStats, PhoneClass, PhoneInventory};
pub use phone::{render, strip_modifiers, tokenize, IpaPhone};
pub use symbol::{classify_symbol, is_vowel_letter, IpaSymbol, SymbolClass};
pub use transcript::{read_transcripts, write_transcripts, TranscriptMode, Utterance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IpaError {
    #[error("unsupported codepoint U+{:04X} ({codepoint:?}) at position {position}", *codepoint as u32)]
    UnsupportedCodepoint { codepoint: char, position: usize },
    #[error("modifier {codepoint:?} at position {position} has no preceding base letter")]
    DanglingModifier { codepoint: char, position: usize },
    #[error("tie bar at position {position} is not between two base letters")]
    DanglingTieBar { position: usize },
    #[error("`{text}` holds {count} phones, expected exactly one")]
    NotASinglePhone { text: String, count: usize },
}
