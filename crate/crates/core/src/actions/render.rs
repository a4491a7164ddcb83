//! Human-readable rendering of action sequences.
//!
//! Tokens appear verbatim and space-separated, `<m>` marks an `Open`, and a
//! `Close` is written `</m>[type]`, followed by one `|link→k:artype:dir`
//! group per link inside the brackets, where `k` is the antecedent step index
//! and `dir` is `cur` (current mention is the head) or `ant`. Example:
//!
//! ```text
//! <m> we should act </m>[Claim] because <m> costs rise </m>[Premise|link→4:supports:cur]
//! ```

use thiserror::Error;

use super::pairing::pair_boundaries;
use super::{ActionSequence, ActionStep, Direction, Link};
use crate::structure::Paragraph;

pub const OPEN_MARK: &str = "<m>";
pub const CLOSE_MARK: &str = "</m>";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("item {index}: malformed close annotation `{text}`")]
    BadClose { index: usize, text: String },
}

fn dir_code(d: Direction) -> &'static str {
    match d {
        Direction::HeadIsCurrent => "cur",
        Direction::HeadIsAntecedent => "ant",
    }
}

pub fn render(seq: &ActionSequence, paragraph: &Paragraph) -> String {
    let mut out: Vec<String> = Vec::with_capacity(seq.steps.len());
    let mut cursor = 0;
    for step in &seq.steps {
        match step {
            ActionStep::Copy => {
                out.push(
                    paragraph
                        .tokens
                        .get(cursor)
                        .cloned()
                        .unwrap_or_else(|| "?".to_string()),
                );
                cursor += 1;
            }
            ActionStep::Open => out.push(OPEN_MARK.to_string()),
            ActionStep::Close { ac_type, links, .. } => {
                let mut s = format!("{CLOSE_MARK}[{ac_type}");
                for l in links {
                    s.push_str(&format!(
                        "|link→{}:{}:{}",
                        l.antecedent,
                        l.ar_type,
                        dir_code(l.direction)
                    ));
                }
                s.push(']');
                out.push(s);
            }
        }
    }
    out.join(" ")
}

fn parse_link(part: &str) -> Option<Link> {
    let body = part.strip_prefix("link→")?;
    let (k, rest) = body.split_once(':')?;
    let (ar_type, dir) = rest.rsplit_once(':')?;
    let direction = match dir {
        "cur" => Direction::HeadIsCurrent,
        "ant" => Direction::HeadIsAntecedent,
        _ => return None,
    };
    if ar_type.is_empty() {
        return None;
    }
    Some(Link {
        antecedent: k.parse().ok()?,
        ar_type: ar_type.to_string(),
        direction,
    })
}

/// Parses a rendered sequence back into steps and the copied tokens. The text
/// carries no boundaries, so each close is paired by the leftmost-unmatched
/// rule; an unpairable close points at itself.
pub fn parse_rendered(
    paragraph_id: &str,
    text: &str,
) -> Result<(ActionSequence, Vec<String>), RenderError> {
    let mut steps = Vec::new();
    let mut tokens = Vec::new();
    for (index, item) in text.split_whitespace().enumerate() {
        if item == OPEN_MARK {
            steps.push(ActionStep::Open);
        } else if let Some(rest) = item.strip_prefix(CLOSE_MARK) {
            let bad = || RenderError::BadClose {
                index,
                text: item.to_string(),
            };
            let inner = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(bad)?;
            let mut parts = inner.split('|');
            let ac_type = parts.next().filter(|t| !t.is_empty()).ok_or_else(bad)?;
            let links = parts
                .map(|p| parse_link(p).ok_or_else(bad))
                .collect::<Result<Vec<_>, _>>()?;
            steps.push(ActionStep::Close {
                boundary: steps.len(),
                ac_type: ac_type.to_string(),
                links,
            });
        } else {
            steps.push(ActionStep::Copy);
            tokens.push(item.to_string());
        }
    }
    let symbols: Vec<_> = steps.iter().map(ActionStep::symbol).collect();
    for (open, close) in pair_boundaries(&symbols).pairs {
        if let ActionStep::Close { boundary, .. } = &mut steps[close] {
            *boundary = open;
        }
    }
    Ok((
        ActionSequence {
            paragraph_id: paragraph_id.to_string(),
            steps,
        },
        tokens,
    ))
}
