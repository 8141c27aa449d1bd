use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal};

use super::{AcousticError, Posteriorgram};
use crate::ipa::{strip_modifiers, IpaPhone, PhoneInventory};
use crate::util::{fnv1a, mix_seed};

/// Knobs of a simulated acoustic model.
#[derive(Debug, Clone, PartialEq)]
pub struct AmProfile {
    /// Phones the model was trained on; the only phones it can emit.
    pub inventory: PhoneInventory,
    /// Mass taken from the target phone and spread over confusable phones, in [0, 1).
    pub confusion: f64,
    /// Mean frames per phone, at least 1.
    pub mean_dur: f64,
    /// Standard deviation of Gaussian jitter added to every finite log posterior
    /// before renormalizing. Zero keeps the target mass at exactly `1 - confusion`.
    pub noise: f64,
    pub seed: u64,
}

impl AmProfile {
    pub fn new(inventory: PhoneInventory, confusion: f64, mean_dur: f64, seed: u64) -> Self {
        AmProfile {
            inventory,
            confusion,
            mean_dur,
            noise: 0.0,
            seed,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<(), AcousticError> {
        let bad = |m: String| Err(AcousticError::InvalidProfile(m));
        if !(0.0..1.0).contains(&self.confusion) {
            return bad(format!("confusion must be in [0, 1), got {}", self.confusion));
        }
        if !(self.mean_dur >= 1.0) {
            return bad(format!("mean duration must be >= 1, got {}", self.mean_dur));
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return bad(format!("noise must be finite and >= 0, got {}", self.noise));
        }
        if self.inventory.len() < 2 {
            return bad("inventory needs at least 2 phones".into());
        }
        Ok(())
    }
}

/// Simulates one utterance using the profile's own seed as the random stream.
pub fn simulate(truth: &[IpaPhone], profile: &AmProfile) -> Result<Posteriorgram, AcousticError> {
    simulate_with_rng(truth, profile, &mut ChaCha8Rng::seed_from_u64(profile.seed))
}

/// Simulates one utterance with a stream derived from `(profile.seed, utt_id)`, so
/// utterances can be processed in any order.
pub fn simulate_utterance(
    utt_id: &str,
    truth: &[IpaPhone],
    profile: &AmProfile,
) -> Result<Posteriorgram, AcousticError> {
    let seed = mix_seed(profile.seed, fnv1a(utt_id.as_bytes()));
    simulate_with_rng(truth, profile, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn simulate_with_rng(
    truth: &[IpaPhone],
    profile: &AmProfile,
    rng: &mut ChaCha8Rng,
) -> Result<Posteriorgram, AcousticError> {
    if truth.is_empty() {
        return Err(AcousticError::EmptyTruth);
    }
    profile.validate()?;
    let phones: Vec<IpaPhone> = profile.inventory.phones().iter().cloned().collect();
    let stripped: Vec<IpaPhone> = phones.iter().map(strip_modifiers).collect();
    let duration = Geometric::new(1.0 / profile.mean_dur)
        .map_err(|e| AcousticError::InvalidProfile(e.to_string()))?;
    let jitter = Normal::new(0.0, profile.noise).unwrap();

    let mut frames = Vec::new();
    for phone in truth {
        let target = match phones.binary_search(phone) {
            Ok(i) => i,
            Err(_) => substitute(phone, &phones, &stripped, rng),
        };
        let row = emission_row(target, &stripped, profile.confusion);
        let dur = 1 + duration.sample(rng) as usize;
        for _ in 0..dur {
            let mut frame = row.clone();
            if profile.noise > 0.0 {
                for x in frame.iter_mut().filter(|x| x.is_finite()) {
                    *x += jitter.sample(rng);
                }
                normalize_log(&mut frame);
            }
            frames.push(frame);
        }
    }
    Posteriorgram::new(phones, frames)
}

/// In-inventory stand-in for a phone the model never saw: its bare base if
/// present, else the first phone sharing that base, else a uniform draw.
fn substitute(phone: &IpaPhone, phones: &[IpaPhone], stripped: &[IpaPhone], rng: &mut ChaCha8Rng) -> usize {
    let base = strip_modifiers(phone);
    if let Ok(i) = phones.binary_search(&base) {
        return i;
    }
    stripped
        .iter()
        .position(|s| *s == base)
        .unwrap_or_else(|| rng.random_range(0..phones.len()))
}

/// Log posterior row: `1 - confusion` on the target; the rest split evenly between
/// same-base siblings and all other phones (all to whichever group exists).
fn emission_row(target: usize, stripped: &[IpaPhone], confusion: f64) -> Vec<f64> {
    let n = stripped.len();
    let siblings: Vec<usize> = (0..n)
        .filter(|&i| i != target && stripped[i] == stripped[target])
        .collect();
    let n_rest = n - 1 - siblings.len();
    let (sib_mass, rest_mass) = match (siblings.is_empty(), n_rest == 0) {
        (false, false) => (confusion / 2.0, confusion / 2.0),
        (false, true) => (confusion, 0.0),
        _ => (0.0, confusion),
    };
    let mut probs = vec![0.0; n];
    for (i, p) in probs.iter_mut().enumerate() {
        *p = if i == target {
            1.0 - confusion
        } else if siblings.contains(&i) {
            sib_mass / siblings.len() as f64
        } else {
            rest_mass / n_rest as f64
        };
    }
    probs.into_iter().map(f64::ln).collect()
}

fn normalize_log(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    for x in row.iter_mut() {
        *x -= lse;
    }
}
