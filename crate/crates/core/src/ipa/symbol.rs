use super::IpaError;

/// Role a codepoint plays inside an IPA transcription.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolClass {
    BaseLetter,
    CombiningDiacritic,
    ModifierLetter,
    LengthMark,
    ToneLetter,
    TieBar,
    Separator,
}

impl SymbolClass {
    /// True for every class that attaches to a preceding base letter.
    pub fn is_modifier(self) -> bool {
        matches!(
            self,
            SymbolClass::CombiningDiacritic
                | SymbolClass::ModifierLetter
                | SymbolClass::LengthMark
                | SymbolClass::ToneLetter
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IpaSymbol {
    pub codepoint: char,
    pub class: SymbolClass,
}

/// Latin-1 and Greek letters that the IPA chart borrows.
const EXTRA_BASE_LETTERS: &[char] = &[
    'æ', 'ç', 'ð', 'ø', 'ħ', 'ŋ', 'œ', 'β', 'θ', 'χ', 'ⱱ', 'ꞎ',
];

/// Spacing modifier letters accepted as secondary articulations.
/// ʰ ʷ ʲ ˠ ˤ ⁿ ˡ plus breathy ʱ, ejective ʼ and rhotic hook ˞.
const MODIFIER_LETTERS: &[char] = &[
    '\u{02B0}', '\u{02B7}', '\u{02B2}', '\u{02E0}', '\u{02E4}', '\u{207F}', '\u{02E1}',
    '\u{02B1}', '\u{02BC}', '\u{02DE}',
];

const VOWEL_LETTERS: &[char] = &[
    'i', 'y', 'ɨ', 'ʉ', 'ɯ', 'u', 'ɪ', 'ʏ', 'ʊ', 'e', 'ø', 'ɘ', 'ɵ', 'ɤ', 'o', 'ə', 'ɛ', 'œ',
    'ɜ', 'ɞ', 'ʌ', 'ɔ', 'æ', 'ɐ', 'a', 'ɶ', 'ɑ', 'ɒ', 'ɚ', 'ɝ',
];

fn class_of(c: char) -> Option<SymbolClass> {
    use SymbolClass::*;
    let class = match c {
        '\u{0361}' | '\u{035C}' => TieBar,
        '\u{02D0}' | '\u{02D1}' => LengthMark,
        '\u{02E5}'..='\u{02E9}' => ToneLetter,
        '\u{0300}'..='\u{036F}' | '\u{1DC0}'..='\u{1DFF}' => CombiningDiacritic,
        c if MODIFIER_LETTERS.contains(&c) => ModifierLetter,
        'a'..='z' => BaseLetter,
        // IPA Extensions block letters
        '\u{0250}'..='\u{02AF}' => BaseLetter,
        c if EXTRA_BASE_LETTERS.contains(&c) => BaseLetter,
        ' ' | '\t' => Separator,
        _ => return None,
    };
    Some(class)
}

/// Classifies a single codepoint, rejecting anything outside the supported IPA table.
pub fn classify_symbol(c: char) -> Result<IpaSymbol, IpaError> {
    class_of(c)
        .map(|class| IpaSymbol {
            codepoint: c,
            class,
        })
        .ok_or(IpaError::UnsupportedCodepoint {
            codepoint: c,
            position: 0,
        })
}

/// Whether a base letter denotes a vowel.
pub fn is_vowel_letter(c: char) -> bool {
    VOWEL_LETTERS.contains(&c)
}
