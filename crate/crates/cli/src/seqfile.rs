//! Input file parsing: matrix sequences and word inventories.

use ergoshift::{Cocycle, Error, Mat, Result, Word};

/// Parses a matrix sequence from plain text: one row of numbers per
/// line, a blank line between consecutive matrices, `#` starting a
/// comment. Every matrix must be square and all must share a dimension.
pub fn parse_sequence(text: &str) -> Result<Vec<Mat>> {
    let mut mats = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let bad = |line_no: usize, what: String| {
        Error::BadParameter(format!("sequence file line {line_no}: {what}"))
    };
    for (idx, raw) in text.lines().chain(std::iter::once("")).enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if !rows.is_empty() {
                mats.push(matrix_from_rows(std::mem::take(&mut rows), idx)?);
            }
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad(idx + 1, format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if mats.is_empty() {
        return Err(Error::BadParameter("sequence file holds no matrices".into()));
    }
    let d = mats[0].dim();
    if let Some(m) = mats.iter().find(|m| m.dim() != d) {
        return Err(Error::BadParameter(format!(
            "sequence mixes dimensions {d} and {}",
            m.dim()
        )));
    }
    Ok(mats)
}

fn matrix_from_rows(rows: Vec<Vec<f64>>, line_no: usize) -> Result<Mat> {
    let d = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::BadParameter(format!(
            "sequence file near line {line_no}: matrix with {d} rows has a row of {} entries",
            r.len()
        )));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Mat::from_row_major(d, &flat)
}

/// Repackages an explicit sequence as a cocycle plus a word visiting it
/// in order: equal matrices share one generator, so a sequence like
/// `A^20` costs a single symbol.
pub fn sequence_cocycle(mats: &[Mat]) -> Result<(Cocycle, Word)> {
    let mut gens: Vec<Mat> = Vec::new();
    let mut symbols = Vec::with_capacity(mats.len());
    for m in mats {
        let sym = match gens.iter().position(|g| g.as_slice() == m.as_slice()) {
            Some(i) => i,
            None => {
                gens.push(m.clone());
                gens.len() - 1
            }
        };
        if sym >= u8::MAX as usize {
            return Err(Error::BadParameter(format!(
                "sequence has more than {} distinct matrices",
                u8::MAX
            )));
        }
        symbols.push(sym as u8);
    }
    let alphabet = gens.len();
    let cocycle = Cocycle::new(gens)?;
    let word = Word::new(symbols, alphabet)?;
    Ok((cocycle, word))
}

/// One word per line, `#` comments and blank lines skipped.
pub fn parse_word_lines(text: &str, alphabet: usize) -> Result<Vec<Word>> {
    let mut words = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        words.push(Word::parse(line, alphabet)?);
    }
    if words.is_empty() {
        return Err(Error::BadParameter("inventory file holds no words".into()));
    }
    Ok(words)
}

/// Canonical bytes of a parsed sequence, for fingerprinting: formatting
/// and comments in the source file do not change the hash.
pub fn canonical_sequence(mats: &[Mat]) -> String {
    let mut s = String::new();
    for m in mats {
        let d = m.dim();
        for r in 0..d {
            let row: Vec<String> = (0..d).map(|c| format!("{}", m.get(r, c))).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s.push('\n');
    }
    s
}
