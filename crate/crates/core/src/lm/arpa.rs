//! ARPA backoff format. Log values are printed with six decimals; zero
//! probabilities are written as `-99.000000` and read back as negative infinity.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::model::{Entry, NGramModel};
use super::vocab::{TokenId, Vocabulary, BOS, EOS, UNK};
use super::LmError;

const LOG_ZERO: f64 = -99.0;

fn fmt_log(x: f64) -> String {
    if x <= LOG_ZERO {
        format!("{LOG_ZERO:.6}")
    } else {
        format!("{x:.6}")
    }
}

pub fn write_arpa<W: Write>(m: &NGramModel, mut w: W) -> std::io::Result<()> {
    writeln!(w, "\\data\\")?;
    for k in 1..=m.order() {
        writeln!(w, "ngram {}={}", k, m.num_grams(k))?;
    }
    for k in 1..=m.order() {
        writeln!(w)?;
        writeln!(w, "\\{k}-grams:")?;
        for (gram, e) in m.grams(k) {
            let tokens: Vec<&str> = gram.iter().map(|&id| m.vocab().token(id)).collect();
            write!(w, "{}\t{}", fmt_log(e.log10_prob), tokens.join(" "))?;
            if let Some(bo) = e.log10_backoff {
                write!(w, "\t{}", fmt_log(bo))?;
            }
            writeln!(w)?;
        }
    }
    writeln!(w)?;
    writeln!(w, "\\end\\")?;
    Ok(())
}

fn malformed(line: usize, message: impl Into<String>) -> LmError {
    LmError::MalformedArpa {
        line,
        message: message.into(),
    }
}

fn parse_log(s: &str, line: usize) -> Result<f64, LmError> {
    let v: f64 = s
        .parse()
        .map_err(|_| malformed(line, format!("bad log value `{s}`")))?;
    if v.is_nan() {
        return Err(malformed(line, "NaN log value"));
    }
    Ok(if v <= LOG_ZERO { f64::NEG_INFINITY } else { v })
}

struct RawGram {
    tokens: Vec<String>,
    entry: Entry,
}

pub fn read_arpa<R: BufRead>(reader: R) -> Result<NGramModel, LmError> {
    #[derive(PartialEq)]
    enum State {
        Preamble,
        Data,
        Grams(usize),
        End,
    }
    let mut state = State::Preamble;
    let mut declared: Vec<usize> = Vec::new();
    let mut sections: Vec<Vec<RawGram>> = Vec::new();
    let mut last_line = 0;

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        last_line = lineno;
        let text = line.trim();
        if state == State::End {
            if !text.is_empty() {
                return Err(malformed(lineno, "content after \\end\\"));
            }
            continue;
        }
        if text == "\\data\\" {
            if state != State::Preamble {
                return Err(malformed(lineno, "duplicate \\data\\ header"));
            }
            state = State::Data;
            continue;
        }
        if state == State::Preamble || text.is_empty() {
            continue;
        }
        if text == "\\end\\" {
            state = State::End;
            continue;
        }
        if let Some(rest) = text.strip_prefix('\\').and_then(|r| r.strip_suffix("-grams:")) {
            let k: usize = rest
                .parse()
                .map_err(|_| malformed(lineno, format!("bad section header `{text}`")))?;
            let expected = sections.len() + 1;
            if k != expected || k > declared.len() {
                return Err(malformed(
                    lineno,
                    format!("section \\{k}-grams: out of order or undeclared"),
                ));
            }
            sections.push(Vec::new());
            state = State::Grams(k);
            continue;
        }
        match state {
            State::Data => {
                let spec = text
                    .strip_prefix("ngram ")
                    .ok_or_else(|| malformed(lineno, format!("expected `ngram N=count`, got `{text}`")))?;
                let (k, count) = spec
                    .split_once('=')
                    .ok_or_else(|| malformed(lineno, "expected `ngram N=count`"))?;
                let k: usize = k.trim().parse().map_err(|_| malformed(lineno, "bad n-gram order"))?;
                let count: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| malformed(lineno, "bad n-gram count"))?;
                if k != declared.len() + 1 {
                    return Err(malformed(lineno, "n-gram orders must be declared in sequence"));
                }
                declared.push(count);
            }
            State::Grams(k) => {
                let fields: Vec<&str> = text.split_whitespace().collect();
                if fields.len() != k + 1 && fields.len() != k + 2 {
                    return Err(malformed(
                        lineno,
                        format!("expected {k} tokens with a log probability and optional backoff"),
                    ));
                }
                let log10_prob = parse_log(fields[0], lineno)?;
                let log10_backoff = if fields.len() == k + 2 {
                    Some(parse_log(fields[k + 1], lineno)?)
                } else {
                    None
                };
                sections[k - 1].push(RawGram {
                    tokens: fields[1..=k].iter().map(|s| s.to_string()).collect(),
                    entry: Entry {
                        log10_prob,
                        log10_backoff,
                    },
                });
            }
            State::Preamble | State::End => unreachable!(),
        }
    }

    if state != State::End {
        return Err(malformed(last_line, "missing \\end\\"));
    }
    if declared.is_empty() {
        return Err(malformed(last_line, "no n-gram counts declared"));
    }
    if sections.len() != declared.len() {
        return Err(malformed(
            last_line,
            format!("{} sections declared, {} present", declared.len(), sections.len()),
        ));
    }
    for (k, (sec, &count)) in sections.iter().zip(&declared).enumerate() {
        if sec.len() != count {
            return Err(malformed(
                last_line,
                format!("ngram {}={} declared but {} entries present", k + 1, count, sec.len()),
            ));
        }
    }

    let vocab = Vocabulary::from_tokens(
        sections[0]
            .iter()
            .map(|g| g.tokens[0].as_str())
            .filter(|t| *t != BOS && *t != EOS && *t != UNK),
    )?;
    let order = declared.len();
    let mut grams: Vec<BTreeMap<Vec<TokenId>, Entry>> = vec![BTreeMap::new(); order];
    for (k, sec) in sections.into_iter().enumerate() {
        for g in sec {
            let mut ids = Vec::with_capacity(k + 1);
            for t in &g.tokens {
                ids.push(vocab.id(t).ok_or_else(|| {
                    malformed(last_line, format!("token `{t}` has no unigram entry"))
                })?);
            }
            if grams[k].insert(ids, g.entry).is_some() {
                return Err(malformed(
                    last_line,
                    format!("duplicate n-gram `{}`", g.tokens.join(" ")),
                ));
            }
        }
    }
    // reserved tokens absent from the file get zero probability
    for id in 0..3 {
        grams[0].entry(vec![id]).or_insert(Entry {
            log10_prob: f64::NEG_INFINITY,
            log10_backoff: None,
        });
    }
    let model = NGramModel {
        order,
        vocab,
        smoothing: None,
        grams,
    };
    if let Some(orphan) = model.find_orphan() {
        let tokens: Vec<&str> = orphan.iter().map(|&id| model.vocab().token(id)).collect();
        return Err(malformed(
            last_line,
            format!("n-gram `{}` has no stored context", tokens.join(" ")),
        ));
    }
    Ok(model)
}
