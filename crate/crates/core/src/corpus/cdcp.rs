//! User-comment corpus: `NNNNN.txt` with `NNNNN.ann.json` holding
//! proposition offsets, labels, and reason/evidence links whose sources are
//! inclusive proposition ranges. `train/` and `test/` subdirectories give the
//! published split; otherwise every document is training data.

use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use super::tokenize::{token_range, token_text, tokenize};
use super::{Corpus, CorpusEntry, CorpusError, ParseLog, Split};
use crate::structure::{canonicalize, AcSpan, ArgRelation, ArgStructure, Paragraph, Schema};

#[derive(Deserialize)]
struct Doc {
    prop_offsets: Vec<(usize, usize)>,
    prop_labels: Vec<String>,
    #[serde(default)]
    reasons: Option<Vec<((usize, usize), usize)>>,
    #[serde(default)]
    evidences: Option<Vec<((usize, usize), usize)>>,
}

fn label(raw: &str) -> String {
    let mut c = raw.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn parse_doc(
    dir: &Path,
    stem: &str,
    schema: &Schema,
    log: &mut ParseLog,
) -> Result<ArgStructure, CorpusError> {
    let file = format!("{stem}.ann.json");
    let err = |m: String| CorpusError::Annotation {
        file: file.clone(),
        message: m,
    };
    let txt = dir.join(format!("{stem}.txt"));
    let text = std::fs::read_to_string(&txt).map_err(|e| CorpusError::io(&txt, e))?;
    let ann_path = dir.join(&file);
    let ann = std::fs::read_to_string(&ann_path).map_err(|e| CorpusError::io(&ann_path, e))?;
    let doc: Doc = serde_json::from_str(&ann).map_err(|e| err(e.to_string()))?;
    if doc.prop_offsets.len() != doc.prop_labels.len() {
        return Err(err("offset and label counts differ".into()));
    }

    let chars: Vec<char> = text.chars().collect();
    let bounds: Vec<usize> = doc.prop_offsets.iter().flat_map(|&(a, b)| [a, b]).collect();
    let (tokens, cuts) = tokenize(&chars, &bounds);
    if cuts > 0 {
        log.token_cuts += cuts;
        log.note(format!(
            "{stem}: split {cuts} token(s) at annotation offsets"
        ));
    }

    let mut acs = Vec::with_capacity(doc.prop_offsets.len());
    for (i, (&(a, b), l)) in doc.prop_offsets.iter().zip(&doc.prop_labels).enumerate() {
        let ty = label(l);
        if schema.ac_index(&ty).is_none() {
            return Err(err(format!("proposition {i}: unknown label `{l}`")));
        }
        if a >= b || b > chars.len() {
            return Err(err(format!("proposition {i}: bad offsets {a}..{b}")));
        }
        let (s, e) = token_range(&tokens, a, b)
            .ok_or_else(|| err(format!("proposition {i} covers no token")))?;
        acs.push(AcSpan::new(s, e, ty));
    }

    let mut ars = Vec::new();
    let mut pairs = HashSet::new();
    for (kind, links) in [("reason", &doc.reasons), ("evidence", &doc.evidences)] {
        for &((lo, hi), tail) in links.iter().flatten() {
            if lo > hi || hi >= acs.len() || tail >= acs.len() {
                return Err(err(format!("dangling {kind} link [{lo}, {hi}] -> {tail}")));
            }
            if hi > lo {
                log.expanded_links += hi - lo;
                log.note(format!(
                    "{stem}: expanded {kind} link [{lo}, {hi}] -> {tail}"
                ));
            }
            for head in lo..=hi {
                if head == tail {
                    return Err(err(format!(
                        "{kind} link from proposition {head} to itself"
                    )));
                }
                if !pairs.insert((head, tail)) {
                    log.duplicate_links += 1;
                    log.note(format!("{stem}: dropped duplicate link {head} -> {tail}"));
                    continue;
                }
                ars.push(ArgRelation::new(head, tail, kind));
            }
        }
    }

    let words = tokens.iter().map(|&t| token_text(&chars, t)).collect();
    let paragraph = Paragraph::new(stem, words).map_err(|e| err(e.to_string()))?;
    canonicalize(&ArgStructure::new(paragraph, acs, ars)).map_err(|e| err(e.to_string()))
}

fn stems(dir: &Path) -> Result<Vec<String>, CorpusError> {
    let mut out: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| CorpusError::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.strip_suffix(".ann.json").map(str::to_string)
        })
        .collect();
    out.sort();
    Ok(out)
}

pub fn parse_cdcp(dir: &Path) -> Result<(Corpus, ParseLog), CorpusError> {
    let schema = Schema::cdcp();
    let mut log = ParseLog::default();
    let mut corpus = Corpus::new(schema.clone());
    let parts: Vec<(std::path::PathBuf, Split)> = if dir.join("train").is_dir() {
        let mut v = vec![(dir.join("train"), Split::Train)];
        if dir.join("test").is_dir() {
            v.push((dir.join("test"), Split::Test));
        }
        v
    } else {
        vec![(dir.to_path_buf(), Split::Train)]
    };
    for (sub, split) in parts {
        for stem in stems(&sub)? {
            let structure = parse_doc(&sub, &stem, &schema, &mut log)?;
            corpus.entries.push(CorpusEntry { structure, split });
        }
    }
    corpus.validate()?;
    Ok((corpus, log))
}
