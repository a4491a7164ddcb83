//! Whitespace tokenization with punctuation detachment. Offsets are in
//! characters, as in the corpus annotation files.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenSpan {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'
                | '\u{2019}'
                | '\u{201c}'
                | '\u{201d}'
                | '\u{2013}'
                | '\u{2014}'
                | '\u{2026}'
        )
}

/// Splits `chars` into tokens. Leading and trailing punctuation of each
/// whitespace-separated chunk becomes one token per character. Any token
/// straddling an offset in `boundaries` is cut there; the number of such
/// cuts is returned alongside the tokens.
pub fn tokenize(chars: &[char], boundaries: &[usize]) -> (Vec<TokenSpan>, usize) {
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        chunk(chars, start, i, &mut out);
    }

    let mut bounds: Vec<usize> = boundaries.to_vec();
    bounds.sort_unstable();
    bounds.dedup();
    let mut cuts = 0;
    let mut cut_out = Vec::with_capacity(out.len());
    for t in out {
        let mut s = t.start;
        for &b in bounds.iter().filter(|&&b| t.start < b && b < t.end) {
            cut_out.push(TokenSpan { start: s, end: b });
            s = b;
            cuts += 1;
        }
        cut_out.push(TokenSpan {
            start: s,
            end: t.end,
        });
    }
    (cut_out, cuts)
}

fn chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<TokenSpan>) {
    let mut lo = start;
    let mut hi = end;
    while lo < hi && is_punct(chars[lo]) {
        out.push(TokenSpan {
            start: lo,
            end: lo + 1,
        });
        lo += 1;
    }
    let mut tail = Vec::new();
    while hi > lo && is_punct(chars[hi - 1]) {
        tail.push(TokenSpan {
            start: hi - 1,
            end: hi,
        });
        hi -= 1;
    }
    if lo < hi {
        out.push(TokenSpan { start: lo, end: hi });
    }
    out.extend(tail.into_iter().rev());
}

/// Inclusive token range covering characters `start..end`, if any token lies
/// entirely inside it.
pub(crate) fn token_range(
    tokens: &[TokenSpan],
    start: usize,
    end: usize,
) -> Option<(usize, usize)> {
    let first = tokens
        .iter()
        .position(|t| t.start >= start && t.end <= end)?;
    let last = tokens
        .iter()
        .rposition(|t| t.start >= start && t.end <= end)?;
    Some((first, last))
}

pub(crate) fn token_text(chars: &[char], t: TokenSpan) -> String {
    chars[t.start..t.end].iter().collect()
}
