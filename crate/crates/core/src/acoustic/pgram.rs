//! `PGRAM v1` text files: magic line, `<T> <P>`, the phone list, then T rows
//! of P natural-log probabilities with 9 significant digits.

use std::io::{BufRead, Write};

use super::{check_row, AcousticError, Posteriorgram};
use crate::ipa::IpaPhone;

const MAGIC: &str = "PGRAM v1";

pub fn write_pgram<W: Write>(pg: &Posteriorgram, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "{} {}", pg.num_frames(), pg.num_phones())?;
    let phones: Vec<&str> = pg.phones().iter().map(|p| p.as_str()).collect();
    writeln!(w, "{}", phones.join(" "))?;
    for row in pg.frames() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.8e}")).collect();
        writeln!(w, "{}", cells.join(" "))?;
    }
    Ok(())
}

fn malformed(line: usize, message: impl Into<String>) -> AcousticError {
    AcousticError::MalformedPgram {
        line,
        message: message.into(),
    }
}

pub fn read_pgram<R: BufRead>(reader: R) -> Result<Posteriorgram, AcousticError> {
    let mut lines = reader.lines();
    let mut next = |lineno: usize| -> Result<String, AcousticError> {
        match lines.next() {
            Some(l) => Ok(l?),
            None => Err(malformed(lineno, "unexpected end of file")),
        }
    };

    if next(1)?.trim_end() != MAGIC {
        return Err(malformed(1, format!("expected `{MAGIC}`")));
    }
    let dims = next(2)?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| malformed(2, format!("bad dimension `{s}`"))))
        .collect::<Result<_, _>>()?;
    let [n_frames, n_phones] = dims[..] else {
        return Err(malformed(2, "expected `<T> <P>`"));
    };
    if n_frames == 0 {
        return Err(malformed(2, "T must be at least 1"));
    }
    if n_phones < 2 {
        return Err(malformed(2, "P must be at least 2"));
    }
    let phones: Vec<IpaPhone> = next(3)?
        .split_whitespace()
        .map(|s| IpaPhone::parse(s).map_err(|e| malformed(3, e.to_string())))
        .collect::<Result<_, _>>()?;
    if phones.len() != n_phones {
        return Err(malformed(3, format!("expected {n_phones} phones, got {}", phones.len())));
    }

    let mut frames = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let lineno = t + 4;
        let row: Vec<f64> = next(lineno)?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| malformed(lineno, format!("bad value `{s}`"))))
            .collect::<Result<_, _>>()?;
        check_row(&row, n_phones).map_err(|m| malformed(lineno, m))?;
        frames.push(row);
    }
    if let Some(extra) = lines.next() {
        if !extra?.trim().is_empty() {
            return Err(malformed(n_frames + 4, "trailing content after last frame"));
        }
    }
    Posteriorgram::new(phones, frames).map_err(|e| malformed(3, e.to_string()))
}
