use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use super::symbol::{classify_symbol, is_vowel_letter, SymbolClass};
use super::IpaError;

/// One recognition unit: base letter(s) plus the modifiers attached to them.
///
/// Identity is the canonical string, so `a` and `aː˥˩` are different phones.
#[derive(Debug, Clone)]
pub struct IpaPhone {
    bases: Vec<char>,
    modifiers: Vec<char>,
    canonical: String,
}

impl IpaPhone {
    /// Parses a string that must contain exactly one phone.
    pub fn parse(s: &str) -> Result<Self, IpaError> {
        let mut phones = tokenize(s)?;
        match phones.len() {
            1 => Ok(phones.pop().unwrap()),
            n => Err(IpaError::NotASinglePhone {
                text: s.to_string(),
                count: n,
            }),
        }
    }

    pub fn bases(&self) -> &[char] {
        &self.bases
    }

    pub fn modifiers(&self) -> &[char] {
        &self.modifiers
    }

    pub fn as_str(&self) -> &str {
        &self.canonical
    }

    pub fn is_vowel(&self) -> bool {
        is_vowel_letter(self.bases[0])
    }

    pub fn has_modifiers(&self) -> bool {
        !self.modifiers.is_empty()
    }
}

impl PartialEq for IpaPhone {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for IpaPhone {}

impl Hash for IpaPhone {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state)
    }
}

impl PartialOrd for IpaPhone {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IpaPhone {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl fmt::Display for IpaPhone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

impl AsRef<str> for IpaPhone {
    fn as_ref(&self) -> &str {
        &self.canonical
    }
}

impl FromStr for IpaPhone {
    type Err = IpaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IpaPhone::parse(s)
    }
}

#[derive(Default)]
struct PhoneBuilder {
    bases: Vec<char>,
    modifiers: Vec<char>,
    canonical: String,
    tie_open: bool,
}

impl PhoneBuilder {
    fn finish(self) -> IpaPhone {
        IpaPhone {
            bases: self.bases,
            modifiers: self.modifiers,
            canonical: self.canonical,
        }
    }
}

/// Splits an IPA string into phones.
///
/// Modifiers attach to the nearest preceding base letter, a tie bar joins its
/// two flanking base letters into one phone, and whitespace only separates.
pub fn tokenize(s: &str) -> Result<Vec<IpaPhone>, IpaError> {
    let mut phones = Vec::new();
    let mut current: Option<PhoneBuilder> = None;

    for (position, c) in s.chars().enumerate() {
        let class = classify_symbol(c)
            .map_err(|_| IpaError::UnsupportedCodepoint {
                codepoint: c,
                position,
            })?
            .class;
        match class {
            SymbolClass::Separator => {
                if let Some(b) = current.take() {
                    if b.tie_open {
                        return Err(IpaError::DanglingTieBar { position });
                    }
                    phones.push(b.finish());
                }
            }
            SymbolClass::BaseLetter => match current.as_mut() {
                Some(b) if b.tie_open => {
                    b.bases.push(c);
                    b.canonical.push(c);
                    b.tie_open = false;
                }
                _ => {
                    if let Some(b) = current.take() {
                        phones.push(b.finish());
                    }
                    let mut b = PhoneBuilder::default();
                    b.bases.push(c);
                    b.canonical.push(c);
                    current = Some(b);
                }
            },
            SymbolClass::TieBar => match current.as_mut() {
                Some(b) if !b.tie_open => {
                    b.canonical.push(c);
                    b.tie_open = true;
                }
                _ => return Err(IpaError::DanglingTieBar { position }),
            },
            _ => match current.as_mut() {
                None => {
                    return Err(IpaError::DanglingModifier {
                        codepoint: c,
                        position,
                    })
                }
                Some(b) if b.tie_open => return Err(IpaError::DanglingTieBar { position }),
                Some(b) => {
                    b.modifiers.push(c);
                    b.canonical.push(c);
                }
            },
        }
    }
    if let Some(b) = current {
        if b.tie_open {
            return Err(IpaError::DanglingTieBar {
                position: s.chars().count(),
            });
        }
        phones.push(b.finish());
    }
    Ok(phones)
}

/// Joins canonical forms with `separator`.
pub fn render<P: AsRef<str>>(phones: &[P], separator: &str) -> String {
    let mut out = String::new();
    for (i, p) in phones.iter().enumerate() {
        if i > 0 {
            out.push_str(separator);
        }
        out.push_str(p.as_ref());
    }
    out
}

/// Drops every modifier while keeping base letters and tie bars.
pub fn strip_modifiers(p: &IpaPhone) -> IpaPhone {
    if p.modifiers.is_empty() {
        return p.clone();
    }
    let canonical: String = p
        .canonical
        .chars()
        .filter(|&c| {
            matches!(
                classify_symbol(c).map(|s| s.class),
                Ok(SymbolClass::BaseLetter) | Ok(SymbolClass::TieBar)
            )
        })
        .collect();
    IpaPhone {
        bases: p.bases.clone(),
        modifiers: Vec::new(),
        canonical,
    }
}
