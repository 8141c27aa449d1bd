#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignOp<T> {
    Match(T),
    Sub { reference: T, hypothesis: T },
    Del(T),
    Ins(T),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub matches: usize,
    pub subs: usize,
    pub dels: usize,
    pub inss: usize,
}

impl ErrorCounts {
    pub fn errors(&self) -> usize {
        self.subs + self.dels + self.inss
    }

    pub fn n_ref(&self) -> usize {
        self.matches + self.subs + self.dels
    }

    pub fn add(&mut self, other: &ErrorCounts) {
        self.matches += other.matches;
        self.subs += other.subs;
        self.dels += other.dels;
        self.inss += other.inss;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentReport<T> {
    pub ops: Vec<AlignOp<T>>,
    pub n_ref: usize,
    pub counts: ErrorCounts,
}

impl<T> AlignmentReport<T> {
    pub fn distance(&self) -> usize {
        self.counts.errors()
    }
}

/// Minimum edit alignment with unit costs.
///
/// The backtrace runs from the end and prefers Match, then Sub, Del, Ins among
/// equal-cost predecessors, so the result is deterministic.
pub fn align<T: PartialEq + Clone>(reference: &[T], hypothesis: &[T]) -> AlignmentReport<T> {
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut d = vec![0usize; (n + 1) * width];
    for i in 0..=n {
        d[i * width] = i;
    }
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = d[(i - 1) * width + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let up = d[(i - 1) * width + j] + 1;
            let left = d[i * width + j - 1] + 1;
            d[i * width + j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let mut counts = ErrorCounts::default();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let diag = d[(i - 1) * width + j - 1];
            if reference[i - 1] == hypothesis[j - 1] && diag == here {
                ops.push(AlignOp::Match(reference[i - 1].clone()));
                counts.matches += 1;
                i -= 1;
                j -= 1;
                continue;
            }
            if reference[i - 1] != hypothesis[j - 1] && diag + 1 == here {
                ops.push(AlignOp::Sub {
                    reference: reference[i - 1].clone(),
                    hypothesis: hypothesis[j - 1].clone(),
                });
                counts.subs += 1;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[(i - 1) * width + j] + 1 == here {
            ops.push(AlignOp::Del(reference[i - 1].clone()));
            counts.dels += 1;
            i -= 1;
        } else {
            ops.push(AlignOp::Ins(hypothesis[j - 1].clone()));
            counts.inss += 1;
            j -= 1;
        }
    }
    ops.reverse();
    AlignmentReport { ops, n_ref: n, counts }
}
