use std::collections::VecDeque;

/// Span-identifying symbol stream, as seen by boundary pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Open,
    Close,
    Token,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundaryPairing {
    /// `(open position, close position)`, in order of the close.
    pub pairs: Vec<(usize, usize)>,
    /// Positions of unmatched open and close symbols, ascending.
    pub removed: Vec<usize>,
}

/// Scans left to right and pairs every close with the leftmost open that is
/// still unmatched. Closes without an available open, and opens left over at
/// the end, are removed.
pub fn pair_boundaries(symbols: &[Symbol]) -> BoundaryPairing {
    let mut unmatched: VecDeque<usize> = VecDeque::new();
    let mut out = BoundaryPairing::default();
    for (pos, sym) in symbols.iter().enumerate() {
        match sym {
            Symbol::Open => unmatched.push_back(pos),
            Symbol::Close => match unmatched.pop_front() {
                Some(open) => out.pairs.push((open, pos)),
                None => out.removed.push(pos),
            },
            Symbol::Token => {}
        }
    }
    out.removed.extend(unmatched);
    out.removed.sort_unstable();
    out
}
