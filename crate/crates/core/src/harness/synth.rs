use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::HarnessError;
use crate::ipa::{IpaPhone, PhoneInventory};
use crate::util::{fnv1a, mix_seed};

/// Base phones available to every synthetic language, most common first.
pub const GLOBAL_POOL: [&str; 30] = [
    "a", "p", "i", "t", "u", "k", "e", "m", "o", "n", "s", "ə", "l", "ɛ", "b", "d", "ɡ", "f",
    "ɔ", "r", "w", "j", "x", "z", "ʃ", "h", "v", "ŋ", "t͡s", "t͡ʃ",
];

pub const DEFAULT_POOL_SIZE: usize = 16;

const VOWEL_MODS: [&str; 10] = ["ː", "˥", "˩", "˥˩", "˧˥", "˨˩˦", "ː˥", "ː˩", "˦", "˨"];
const CONSONANT_MODS: [&str; 3] = ["ʰ", "ʷ", "ʲ"];

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageParams {
    pub n_shared: usize,
    pub n_unique: usize,
    /// Dirichlet concentration of every transition row; small values give peaked rows.
    pub temperature: f64,
    /// Shared phones are drawn from the first `pool_size` entries of [`GLOBAL_POOL`].
    pub pool_size: usize,
}

impl LanguageParams {
    pub fn new(n_shared: usize, n_unique: usize, temperature: f64) -> Self {
        LanguageParams {
            n_shared,
            n_unique,
            temperature,
            pool_size: DEFAULT_POOL_SIZE.max(n_shared),
        }
    }
}

/// A first-order Markov source over an inventory.
///
/// `transition[0]` is the start row and `transition[i + 1]` the row of
/// `phones[i]`; column `j < P` is `phones[j]` and column `P` is end of utterance.
/// The start row gives the end column no mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLanguage {
    pub id: String,
    pub inventory: PhoneInventory,
    pub phones: Vec<IpaPhone>,
    pub transition: Vec<Vec<f64>>,
    pub seed: u64,
}

impl SyntheticLanguage {
    pub fn num_phones(&self) -> usize {
        self.phones.len()
    }

    /// Row of `phones[i]` restricted to phones and renormalized.
    pub fn phone_row(&self, state: usize) -> Vec<f64> {
        let row = &self.transition[state][..self.phones.len()];
        let s: f64 = row.iter().sum();
        row.iter().map(|x| x / s).collect()
    }
}

pub fn gen_language(
    n_shared: usize,
    n_unique: usize,
    temperature: f64,
    seed: u64,
) -> Result<SyntheticLanguage, HarnessError> {
    gen_language_with(&LanguageParams::new(n_shared, n_unique, temperature), "L", seed, &BTreeSet::new())
}

/// Generates a language whose unique phones avoid `exclude`, so a set of
/// languages built in sequence keeps its unique phones disjoint.
pub fn gen_language_with(
    params: &LanguageParams,
    id: &str,
    seed: u64,
    exclude: &BTreeSet<IpaPhone>,
) -> Result<SyntheticLanguage, HarnessError> {
    let too_small = |m: String| Err(HarnessError::InventoryTooSmall(m));
    if params.n_shared + params.n_unique < 2 {
        return too_small("a language needs at least 2 phones".into());
    }
    if params.n_shared == 0 && params.n_unique > 0 {
        return too_small("unique phones are built on shared bases".into());
    }
    if params.pool_size > GLOBAL_POOL.len() || params.n_shared > params.pool_size {
        return too_small(format!(
            "cannot draw {} shared phones from a pool of {} (max {})",
            params.n_shared,
            params.pool_size,
            GLOBAL_POOL.len()
        ));
    }
    if !(params.temperature > 0.0) || !params.temperature.is_finite() {
        return Err(HarnessError::InvalidParameter(format!(
            "temperature must be positive, got {}",
            params.temperature
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut shared: Vec<IpaPhone> = GLOBAL_POOL[..params.pool_size]
        .choose_multiple(&mut rng, params.n_shared)
        .map(|s| IpaPhone::parse(s).expect("pool phones are valid"))
        .collect();
    shared.sort();

    let mut vowel_cands = Vec::new();
    let mut consonant_cands = Vec::new();
    for base in &shared {
        if base.bases().len() != 1 {
            continue;
        }
        let (mods, out): (&[&str], _) = if base.is_vowel() {
            (&VOWEL_MODS, &mut vowel_cands)
        } else {
            (&CONSONANT_MODS, &mut consonant_cands)
        };
        for m in mods {
            let p = IpaPhone::parse(&format!("{base}{m}")).expect("modifier combos are valid");
            if !exclude.contains(&p) {
                out.push(p);
            }
        }
    }
    vowel_cands.shuffle(&mut rng);
    consonant_cands.shuffle(&mut rng);
    let unique: Vec<IpaPhone> = vowel_cands
        .into_iter()
        .chain(consonant_cands)
        .take(params.n_unique)
        .collect();
    if unique.len() < params.n_unique {
        return too_small(format!(
            "only {} unique phones can be built on the shared bases, {} requested",
            unique.len(),
            params.n_unique
        ));
    }

    let inventory = PhoneInventory::new(id, shared.into_iter().chain(unique));
    let phones: Vec<IpaPhone> = inventory.phones().iter().cloned().collect();
    let p = phones.len();
    let gamma = Gamma::new(params.temperature, 1.0)
        .map_err(|e| HarnessError::InvalidParameter(e.to_string()))?;
    let mut transition = Vec::with_capacity(p + 1);
    for state in 0..=p {
        loop {
            let mut row: Vec<f64> = (0..=p).map(|_| gamma.sample(&mut rng)).collect();
            if state == 0 {
                row[p] = 0.0;
            } else {
                row[state - 1] = 0.0;
            }
            let phone_mass: f64 = row[..p].iter().sum();
            if phone_mass > 0.0 {
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= total);
                transition.push(row);
                break;
            }
        }
    }
    Ok(SyntheticLanguage {
        id: id.to_string(),
        inventory,
        phones,
        transition,
        seed,
    })
}

/// Samples one utterance per index from the chain. Utterance `i` uses its own
/// stream derived from `(seed, i)`. The end symbol is blocked before `min_len`
/// phones and forced at `max_len`.
pub fn sample_corpus(
    lang: &SyntheticLanguage,
    n_utts: usize,
    len_range: (usize, usize),
    seed: u64,
) -> Result<Vec<Vec<IpaPhone>>, HarnessError> {
    let (min_len, max_len) = len_range;
    if n_utts == 0 || min_len == 0 || min_len > max_len {
        return Err(HarnessError::InvalidParameter(format!(
            "need n_utts >= 1 and 1 <= min_len <= max_len, got {n_utts} and {min_len}..{max_len}"
        )));
    }
    Ok((0..n_utts)
        .map(|i| sample_utterance(lang, len_range, seed, i as u64))
        .collect())
}

pub fn sample_utterance(
    lang: &SyntheticLanguage,
    (min_len, max_len): (usize, usize),
    seed: u64,
    index: u64,
) -> Vec<IpaPhone> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, index));
    let p = lang.num_phones();
    let mut out = Vec::with_capacity(max_len);
    let mut state = 0;
    while out.len() < max_len {
        let row = &lang.transition[state];
        let allowed = if out.len() < min_len { p } else { p + 1 };
        let total: f64 = row[..allowed].iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut next = allowed - 1;
        for (j, &x) in row[..allowed].iter().enumerate() {
            if u < x {
                next = j;
                break;
            }
            u -= x;
        }
        // guard against landing on a zero cell through rounding
        while row[next] == 0.0 {
            next -= 1;
        }
        if next == p {
            break;
        }
        out.push(lang.phones[next].clone());
        state = next + 1;
    }
    out
}

/// Train, dev and eval corpora of one language.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<Vec<IpaPhone>>,
    pub dev: Vec<Vec<IpaPhone>>,
    pub eval: Vec<Vec<IpaPhone>>,
}

/// Streams utterances by index. An index whose hash is 0 mod 10 goes to dev
/// while dev has room; everything else fills eval and then train.
pub fn sample_split(
    lang: &SyntheticLanguage,
    sizes: (usize, usize, usize),
    len_range: (usize, usize),
    seed: u64,
) -> Result<CorpusSplit, HarnessError> {
    let (n_train, n_dev, n_eval) = sizes;
    sample_corpus(lang, 1, len_range, seed)?;
    let mut split = CorpusSplit {
        train: Vec::with_capacity(n_train),
        dev: Vec::with_capacity(n_dev),
        eval: Vec::with_capacity(n_eval),
    };
    let mut i: u64 = 0;
    while split.train.len() < n_train || split.dev.len() < n_dev || split.eval.len() < n_eval {
        let to_dev = fnv1a(&i.to_le_bytes()) % 10 == 0;
        let bucket = if to_dev && split.dev.len() < n_dev {
            &mut split.dev
        } else if split.eval.len() < n_eval {
            &mut split.eval
        } else if split.train.len() < n_train {
            &mut split.train
        } else {
            i += 1;
            continue;
        };
        bucket.push(sample_utterance(lang, len_range, seed, i));
        i += 1;
    }
    Ok(split)
}
