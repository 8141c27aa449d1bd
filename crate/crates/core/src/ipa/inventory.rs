use std::collections::BTreeSet;

use super::IpaPhone;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhoneClass {
    Vowel,
    Consonant,
}

/// The set of phones used by one language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneInventory {
    pub language_id: String,
    phones: BTreeSet<IpaPhone>,
}

impl PhoneInventory {
    pub fn new(language_id: impl Into<String>, phones: impl IntoIterator<Item = IpaPhone>) -> Self {
        PhoneInventory {
            language_id: language_id.into(),
            phones: phones.into_iter().collect(),
        }
    }

    pub fn phones(&self) -> &BTreeSet<IpaPhone> {
        &self.phones
    }

    pub fn contains(&self, p: &IpaPhone) -> bool {
        self.phones.contains(p)
    }

    pub fn len(&self) -> usize {
        self.phones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phones.is_empty()
    }

    /// Vowel/consonant class, decided by the first base letter only.
    pub fn class_of(&self, p: &IpaPhone) -> Option<PhoneClass> {
        self.phones.contains(p).then(|| phone_class(p))
    }

    /// Union of several inventories under a new id.
    pub fn union<'a>(
        language_id: impl Into<String>,
        inventories: impl IntoIterator<Item = &'a PhoneInventory>,
    ) -> Self {
        let phones = inventories
            .into_iter()
            .flat_map(|inv| inv.phones.iter().cloned())
            .collect();
        PhoneInventory {
            language_id: language_id.into(),
            phones,
        }
    }
}

pub fn phone_class(p: &IpaPhone) -> PhoneClass {
    if p.is_vowel() {
        PhoneClass::Vowel
    } else {
        PhoneClass::Consonant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InventoryStats {
    pub n_vowels: usize,
    pub n_consonants: usize,
    pub n_unique: usize,
}

/// Vowel, consonant and language-unique phone counts of `inv` relative to `others`.
pub fn inventory_stats(inv: &PhoneInventory, others: &[PhoneInventory]) -> InventoryStats {
    let n_vowels = inv.phones.iter().filter(|p| p.is_vowel()).count();
    let n_unique = inv
        .phones
        .iter()
        .filter(|p| !others.iter().any(|o| o.contains(p)))
        .count();
    InventoryStats {
        n_vowels,
        n_consonants: inv.len() - n_vowels,
        n_unique,
    }
}

/// How many of `inventories` contain `p`.
pub fn sharing_count(p: &IpaPhone, inventories: &[PhoneInventory]) -> usize {
    inventories.iter().filter(|inv| inv.contains(p)).count()
}
