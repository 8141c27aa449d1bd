use std::collections::BTreeMap;

use super::align::{align, AlignOp, ErrorCounts};
use super::ScoreError;
use crate::ipa::{sharing_count, strip_modifiers, IpaPhone, PhoneInventory};

/// Per-phone error attribution. Substitutions and deletions count against the
/// reference phone; insertions are tracked against the hypothesis phone but do not
/// enter the reference-side error rate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhoneErrorStats {
    pub occurrences: usize,
    pub subs: usize,
    pub dels: usize,
    pub ins: usize,
}

impl PhoneErrorStats {
    pub fn errors(&self) -> usize {
        self.subs + self.dels
    }

    pub fn error_rate(&self) -> Option<f64> {
        (self.occurrences > 0).then(|| self.errors() as f64 / self.occurrences as f64)
    }
}

/// Corpus-level (pooled) phone error rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PerReport {
    /// Errors over reference length, as a fraction.
    pub per: f64,
    /// Shares of the total error mass, in percent; all zero when there are no errors.
    pub pct_ins: f64,
    pub pct_del: f64,
    pub pct_sub: f64,
    pub counts: ErrorCounts,
    pub n_ref: usize,
    pub per_phone: BTreeMap<IpaPhone, PhoneErrorStats>,
}

impl PerReport {
    pub fn errors(&self) -> usize {
        self.counts.errors()
    }
}

/// Pools the alignments of all `(reference, hypothesis)` pairs.
pub fn per_report(pairs: &[(Vec<IpaPhone>, Vec<IpaPhone>)]) -> Result<PerReport, ScoreError> {
    let mut counts = ErrorCounts::default();
    let mut per_phone: BTreeMap<IpaPhone, PhoneErrorStats> = BTreeMap::new();
    for (reference, hypothesis) in pairs {
        let a = align(reference, hypothesis);
        counts.add(&a.counts);
        for op in a.ops {
            match op {
                AlignOp::Match(p) => per_phone.entry(p).or_default().occurrences += 1,
                AlignOp::Sub { reference, .. } => {
                    let s = per_phone.entry(reference).or_default();
                    s.occurrences += 1;
                    s.subs += 1;
                }
                AlignOp::Del(p) => {
                    let s = per_phone.entry(p).or_default();
                    s.occurrences += 1;
                    s.dels += 1;
                }
                AlignOp::Ins(p) => per_phone.entry(p).or_default().ins += 1,
            }
        }
    }
    let n_ref = counts.n_ref();
    if n_ref == 0 {
        return Err(ScoreError::EmptyReference);
    }
    let errors = counts.errors();
    let pct = |x: usize| {
        if errors == 0 {
            0.0
        } else {
            100.0 * x as f64 / errors as f64
        }
    };
    Ok(PerReport {
        per: errors as f64 / n_ref as f64,
        pct_ins: pct(counts.inss),
        pct_del: pct(counts.dels),
        pct_sub: pct(counts.subs),
        counts,
        n_ref,
        per_phone,
    })
}

/// [`per_report`] after stripping modifiers from both sides.
pub fn lenient_report(pairs: &[(Vec<IpaPhone>, Vec<IpaPhone>)]) -> Result<PerReport, ScoreError> {
    let strip = |s: &[IpaPhone]| s.iter().map(strip_modifiers).collect::<Vec<_>>();
    let stripped: Vec<_> = pairs.iter().map(|(r, h)| (strip(r), strip(h))).collect();
    per_report(&stripped)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShareRow {
    pub phone: IpaPhone,
    pub n_languages: usize,
    pub occurrences: usize,
    pub error_rate: f64,
}

/// Per-phone error rates with the number of inventories containing each phone.
/// Phones that never occur in a reference are omitted.
pub fn phone_share_report(
    per_phone: &BTreeMap<IpaPhone, PhoneErrorStats>,
    inventories: &[PhoneInventory],
) -> Result<Vec<ShareRow>, ScoreError> {
    let mut rows = Vec::new();
    for (phone, stats) in per_phone {
        let Some(error_rate) = stats.error_rate() else {
            continue;
        };
        let n_languages = sharing_count(phone, inventories);
        if n_languages == 0 {
            return Err(ScoreError::UnknownPhone(phone.to_string()));
        }
        rows.push(ShareRow {
            phone: phone.clone(),
            n_languages,
            occurrences: stats.occurrences,
            error_rate,
        });
    }
    Ok(rows)
}

/// Mean per-phone error rate and phone count for each sharing group.
pub fn share_group_means(rows: &[ShareRow]) -> BTreeMap<usize, (f64, usize)> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(r.n_languages).or_default();
        e.0 += r.error_rate;
        e.1 += 1;
    }
    for (sum, n) in acc.values_mut() {
        *sum /= *n as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipa::tokenize;
    use proptest::prelude::*;

    fn seq(s: &str) -> Vec<IpaPhone> {
        tokenize(s).unwrap()
    }

    fn pair(r: &str, h: &str) -> (Vec<IpaPhone>, Vec<IpaPhone>) {
        (seq(r), seq(h))
    }

    #[test]
    fn identical_pairs() {
        let r = per_report(&[pair("a b c", "a b c"), pair("d", "d")]).unwrap();
        assert_eq!(r.per, 0.0);
        assert_eq!((r.pct_ins, r.pct_del, r.pct_sub), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_reference() {
        assert!(matches!(per_report(&[]), Err(ScoreError::EmptyReference)));
        assert!(matches!(
            per_report(&[pair("", "a")]),
            Err(ScoreError::EmptyReference)
        ));
    }

    #[test]
    fn hand_counted_three_utterances() {
        // 1: a b c d vs a x c d      -> 1 sub
        // 2: e f     vs e f g        -> 1 ins
        // 3: h i j k l vs h k l      -> 2 del
        // pooled: 4 errors / 11 ref phones; per-utterance mean would be (1/4 + 1/2 + 2/5) / 3
        let pairs = [
            pair("a b c d", "a x c d"),
            pair("e f", "e f ɡ"),
            pair("h i j k l", "h k l"),
        ];
        let r = per_report(&pairs).unwrap();
        assert_eq!(r.n_ref, 11);
        assert_eq!(r.counts, ErrorCounts { matches: 8, subs: 1, dels: 2, inss: 1 });
        assert!((r.per - 4.0 / 11.0).abs() < 1e-15);
        assert!((r.pct_sub - 25.0).abs() < 1e-12);
        assert!((r.pct_del - 50.0).abs() < 1e-12);
        assert!((r.pct_ins - 25.0).abs() < 1e-12);
        let b = &r.per_phone[&IpaPhone::parse("b").unwrap()];
        assert_eq!((b.occurrences, b.subs), (1, 1));
        let g = &r.per_phone[&IpaPhone::parse("ɡ").unwrap()];
        assert_eq!((g.occurrences, g.ins), (0, 1));
        let subs_dels: usize = r.per_phone.values().map(|s| s.errors()).sum();
        assert_eq!(subs_dels, r.counts.subs + r.counts.dels);
    }

    #[test]
    fn lenient_equals_strict_without_modifiers() {
        let pairs = [pair("a b c", "a c"), pair("p t", "p k t")];
        assert_eq!(
            per_report(&pairs).unwrap().per,
            lenient_report(&pairs).unwrap().per
        );
    }

    #[test]
    fn lenient_forgives_tone_errors() {
        let pairs = [pair("aː˥ p i˩", "a p i")];
        assert!((per_report(&pairs).unwrap().per - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(lenient_report(&pairs).unwrap().per, 0.0);
    }

    #[test]
    fn share_report_toy() {
        // three languages; "a" shared by all, "p" by two, "aː˥" unique to the first
        let inv = |id: &str, s: &str| PhoneInventory::new(id, seq(s));
        let invs = [inv("x", "a p aː˥ t"), inv("y", "a p k"), inv("z", "a m")];
        let pairs = [
            pair("a p aː˥ t", "a p a t"),
            pair("aː˥ a t", "a a"),
            pair("p a", "k a m"),
        ];
        let r = per_report(&pairs).unwrap();
        let rows = phone_share_report(&r.per_phone, &invs).unwrap();
        let get = |p: &str| rows.iter().find(|r| r.phone.as_str() == p).unwrap().clone();
        // aː˥: 2 occurrences, 2 errors (sub, then sub/del) -> 1.0, group 1
        assert_eq!(get("aː˥").n_languages, 1);
        assert_eq!(get("aː˥").error_rate, 1.0);
        // a: 3 occurrences, all matched
        assert_eq!((get("a").n_languages, get("a").occurrences), (3, 3));
        assert_eq!(get("a").error_rate, 0.0);
        // p: 2 occurrences, 1 substituted by k
        assert_eq!(get("p").n_languages, 2);
        assert!((get("p").error_rate - 0.5).abs() < 1e-12);
        // t: 2 occurrences, one substituted
        assert!((get("t").error_rate - 0.5).abs() < 1e-12);
        // k and m were only inserted or substituted in -> omitted
        assert!(rows.iter().all(|r| r.phone.as_str() != "m" && r.phone.as_str() != "k"));
        let groups = share_group_means(&rows);
        assert_eq!(groups[&1], (0.75, 2));
        assert_eq!(groups[&3], (0.0, 1));
    }

    #[test]
    fn share_report_unknown_phone() {
        let r = per_report(&[pair("a", "a")]).unwrap();
        let invs = [PhoneInventory::new("x", seq("b"))];
        assert!(matches!(
            phone_share_report(&r.per_phone, &invs),
            Err(ScoreError::UnknownPhone(p)) if p == "a"
        ));
    }

    fn arb_phone_str() -> impl Strategy<Value = String> {
        (
            prop::sample::select(vec!["a", "i", "u", "p", "t"]),
            prop::sample::select(vec!["", "ː", "˥", "˩", "ʰ", "ː˥˩"]),
        )
            .prop_map(|(b, m)| format!("{b}{m}"))
    }

    fn arb_corpus() -> impl Strategy<Value = Vec<(Vec<IpaPhone>, Vec<IpaPhone>)>> {
        fn side() -> impl Strategy<Value = Vec<IpaPhone>> {
            prop::collection::vec(arb_phone_str(), 0..8)
                .prop_map(|v| v.iter().map(|s| IpaPhone::parse(s).unwrap()).collect())
        }
        prop::collection::vec((side(), side()), 1..6)
            .prop_filter("needs reference phones", |pairs| pairs.iter().any(|(r, _)| !r.is_empty()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn lenient_never_exceeds_strict(pairs in arb_corpus()) {
            let strict = per_report(&pairs).unwrap();
            let lenient = lenient_report(&pairs).unwrap();
            prop_assert!(lenient.per <= strict.per);
        }

        #[test]
        fn pooled_and_breakdown_invariants(pairs in arb_corpus()) {
            let r = per_report(&pairs).unwrap();
            let total_ref: usize = pairs.iter().map(|(x, _)| x.len()).sum();
            let total_err: usize = pairs.iter().map(|(x, y)| align(x, y).distance()).sum();
            prop_assert_eq!(r.n_ref, total_ref);
            prop_assert!((r.per - total_err as f64 / total_ref as f64).abs() < 1e-15);
            if r.errors() > 0 {
                prop_assert!((r.pct_ins + r.pct_del + r.pct_sub - 100.0).abs() < 1e-9);
            }
            let attributed: usize = r.per_phone.values().map(|s| s.errors()).sum();
            prop_assert_eq!(attributed, r.counts.subs + r.counts.dels);
            let inserted: usize = r.per_phone.values().map(|s| s.ins).sum();
            prop_assert_eq!(inserted, r.counts.inss);
        }
    }
}
