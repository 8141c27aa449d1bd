/// Replacement order for two candidates reaching the same state: higher score,
/// then staying over transitioning, then the lower predecessor label.
pub(crate) fn beats(score: f64, stay: bool, from: u32, other_score: f64, other_stay: bool, other_from: u32) -> bool {
    if score != other_score {
        return score > other_score;
    }
    if stay != other_stay {
        return stay;
    }
    from < other_from
}

pub(crate) fn is_dead(score: f64) -> bool {
    score == f64::NEG_INFINITY || score.is_nan()
}

/// Keeps the `n` best tokens by score, breaking ties on the lower state key so
/// the survivors do not depend on insertion order.
pub(crate) fn keep_best<T>(tokens: &mut Vec<T>, n: usize, score: impl Fn(&T) -> f64, key: impl Fn(&T) -> u128) {
    if tokens.len() <= n {
        return;
    }
    tokens.select_nth_unstable_by(n - 1, |a, b| {
        score(b).total_cmp(&score(a)).then_with(|| key(a).cmp(&key(b)))
    });
    tokens.truncate(n);
}
