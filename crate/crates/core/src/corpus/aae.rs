//! Persuasive-essay corpus in brat standoff format: `essayNNN.txt` with an
//! `essayNNN.ann` next to it, and optionally `train-test-split.csv` in the
//! directory or its parent.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tokenize::{token_range, token_text, tokenize};
use super::{Corpus, CorpusEntry, CorpusError, ParseLog, Split};
use crate::structure::{canonicalize, AcSpan, ArgRelation, ArgStructure, Paragraph, Schema};

#[derive(Debug, Clone)]
pub struct AaeOptions {
    /// Drop the lines before the first blank line (the essay prompt).
    pub skip_title: bool,
    /// Share of training essays moved to the dev split.
    pub dev_fraction: f64,
    pub seed: u64,
}

impl Default for AaeOptions {
    fn default() -> Self {
        AaeOptions {
            skip_title: true,
            dev_fraction: 0.1,
            seed: 13,
        }
    }
}

struct TextBound {
    label: String,
    start: usize,
    end: usize,
}

struct Ann {
    spans: BTreeMap<String, TextBound>,
    relations: Vec<(String, String, String)>,
}

fn parse_ann(name: &str, text: &str, log: &mut ParseLog) -> Result<Ann, CorpusError> {
    let err = |line: usize, m: String| CorpusError::Annotation {
        file: format!("{name}:{line}"),
        message: m,
    };
    let mut ann = Ann {
        spans: BTreeMap::new(),
        relations: Vec::new(),
    };
    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let id = cols.next().unwrap_or_default();
        let body = cols.next().unwrap_or_default();
        match id.chars().next() {
            Some('T') => {
                let mut f = body.split(' ');
                let label = f.next().unwrap_or_default().to_string();
                let rest: Vec<&str> = f.collect();
                if rest.len() != 2 || rest[1].contains(';') {
                    return Err(err(
                        n,
                        format!("unsupported span offsets `{}`", rest.join(" ")),
                    ));
                }
                let num = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| err(n, format!("bad offset `{s}`")))
                };
                ann.spans.insert(
                    id.to_string(),
                    TextBound {
                        label,
                        start: num(rest[0])?,
                        end: num(rest[1])?,
                    },
                );
            }
            Some('R') => {
                let f: Vec<&str> = body.split(' ').collect();
                let arg = |s: Option<&&str>, key: &str| {
                    s.and_then(|s| s.strip_prefix(key))
                        .map(str::to_string)
                        .ok_or_else(|| err(n, format!("relation without {key}")))
                };
                ann.relations.push((
                    f[0].to_string(),
                    arg(f.get(1), "Arg1:")?,
                    arg(f.get(2), "Arg2:")?,
                ));
            }
            Some('A') => log.attributes_ignored += 1,
            Some('#') => {}
            _ => log.note(format!("{name}:{n}: ignored annotation line `{id}`")),
        }
    }
    Ok(ann)
}

/// Paragraph character ranges, title excluded when requested.
fn paragraphs(chars: &[char], skip_title: bool) -> Vec<(usize, usize)> {
    let mut lines = Vec::new();
    let mut s = 0;
    for (i, &c) in chars.iter().enumerate() {
        if c == '\n' {
            lines.push((s, i));
            s = i + 1;
        }
    }
    lines.push((s, chars.len()));
    let blank = |&(a, b): &(usize, usize)| chars[a..b].iter().all(|c| c.is_whitespace());
    let body = if skip_title {
        lines.iter().position(blank).map_or(0, |i| i + 1)
    } else {
        0
    };
    lines[body..]
        .iter()
        .filter(|l| !blank(l))
        .copied()
        .collect()
}

fn read_splits(dir: &Path) -> Result<Option<HashMap<String, Split>>, CorpusError> {
    let candidates = [Some(dir), dir.parent()];
    let Some(path) = candidates
        .into_iter()
        .flatten()
        .map(|d| d.join("train-test-split.csv"))
        .find(|p| p.is_file())
    else {
        return Ok(None);
    };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b';')
        .from_path(&path)
        .map_err(|e| CorpusError::Annotation {
            file: path.display().to_string(),
            message: e.to_string(),
        })?;
    let mut out = HashMap::new();
    for (i, row) in rdr.records().enumerate() {
        let bad = |m: String| CorpusError::Malformed {
            path: path.clone(),
            line: i + 2,
            message: m,
        };
        let row = row.map_err(|e| bad(e.to_string()))?;
        let (Some(id), Some(set)) = (row.get(0), row.get(1)) else {
            return Err(bad("expected two columns".into()));
        };
        out.insert(
            id.trim().to_string(),
            set.trim().parse::<Split>().map_err(bad)?,
        );
    }
    Ok(Some(out))
}

/// Parses every `*.ann`/`*.txt` pair in `dir`, in file-name order.
pub fn parse_aae(dir: &Path, opts: &AaeOptions) -> Result<(Corpus, ParseLog), CorpusError> {
    let schema = Schema::aae();
    let mut log = ParseLog::default();
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| CorpusError::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.strip_suffix(".ann").map(str::to_string)
        })
        .collect();
    names.sort();

    let mut corpus = Corpus::new(schema.clone());
    let mut essay_of: Vec<String> = Vec::new();
    for name in &names {
        let txt_path = dir.join(format!("{name}.txt"));
        let ann_path = dir.join(format!("{name}.ann"));
        let text = std::fs::read_to_string(&txt_path).map_err(|e| CorpusError::io(&txt_path, e))?;
        let ann_text =
            std::fs::read_to_string(&ann_path).map_err(|e| CorpusError::io(&ann_path, e))?;
        let ann = parse_ann(&format!("{name}.ann"), &ann_text, &mut log)?;
        let chars: Vec<char> = text.chars().collect();
        let paras = paragraphs(&chars, opts.skip_title);
        let err = |m: String| CorpusError::Annotation {
            file: format!("{name}.ann"),
            message: m,
        };

        // span id -> (paragraph, local index)
        let mut home: HashMap<&str, (usize, usize)> = HashMap::new();
        let mut per_para: Vec<Vec<(&str, &TextBound)>> = vec![Vec::new(); paras.len()];
        for (id, tb) in &ann.spans {
            if schema.ac_index(&tb.label).is_none() {
                return Err(err(format!("span {id}: unknown type `{}`", tb.label)));
            }
            if tb.start >= tb.end || tb.end > chars.len() {
                return Err(err(format!(
                    "span {id}: bad offsets {}..{}",
                    tb.start, tb.end
                )));
            }
            let Some(p) = paras
                .iter()
                .position(|&(a, b)| a <= tb.start && tb.start < b)
            else {
                return Err(err(format!("span {id} lies outside every paragraph")));
            };
            if tb.end > paras[p].1 {
                return Err(err(format!("span {id} crosses a paragraph boundary")));
            }
            per_para[p].push((id.as_str(), tb));
        }

        let base = corpus.entries.len();
        for (p, &(a, b)) in paras.iter().enumerate() {
            let bounds: Vec<usize> = per_para[p]
                .iter()
                .flat_map(|(_, tb)| [tb.start - a, tb.end - a])
                .collect();
            let (tokens, cuts) = tokenize(&chars[a..b], &bounds);
            if cuts > 0 {
                log.token_cuts += cuts;
                log.note(format!(
                    "{name}/{p}: split {cuts} token(s) at annotation offsets"
                ));
            }
            let mut acs = Vec::new();
            for (k, (id, tb)) in per_para[p].iter().enumerate() {
                let (s, e) = token_range(&tokens, tb.start - a, tb.end - a)
                    .ok_or_else(|| err(format!("span {id} covers no token")))?;
                acs.push(AcSpan::new(s, e, tb.label.clone()));
                home.insert(id, (p, k));
            }
            let words = tokens
                .iter()
                .map(|&t| token_text(&chars[a..b], t))
                .collect();
            let paragraph =
                Paragraph::new(format!("{name}/{p}"), words).map_err(|e| err(e.to_string()))?;
            corpus.entries.push(CorpusEntry {
                structure: ArgStructure::new(paragraph, acs, Vec::new()),
                split: Split::Train,
            });
            essay_of.push(name.clone());
        }

        for (label, src, dst) in &ann.relations {
            if schema.ar_index(label).is_none() {
                return Err(err(format!("unknown relation type `{label}`")));
            }
            let h = home
                .get(src.as_str())
                .ok_or_else(|| err(format!("unknown span id {src}")))?;
            let t = home
                .get(dst.as_str())
                .ok_or_else(|| err(format!("unknown span id {dst}")))?;
            if h.0 != t.0 {
                log.cross_paragraph_dropped += 1;
                log.note(format!(
                    "{name}: dropped cross-paragraph relation {src} -> {dst}"
                ));
                continue;
            }
            corpus.entries[base + h.0]
                .structure
                .ars
                .push(ArgRelation::new(h.1, t.1, label.clone()));
        }
    }

    for e in &mut corpus.entries {
        e.structure = canonicalize(&e.structure).map_err(|err| CorpusError::Invalid {
            id: e.structure.id().to_string(),
            message: err.to_string(),
        })?;
    }

    if let Some(splits) = read_splits(dir)? {
        for (e, essay) in corpus.entries.iter_mut().zip(&essay_of) {
            match splits.get(essay) {
                Some(&s) => e.split = s,
                None => log.note(format!("{essay}: not in split file, kept in train")),
            }
        }
    }
    let mut train: Vec<&String> = names
        .iter()
        .filter(|n| {
            essay_of
                .iter()
                .zip(&corpus.entries)
                .any(|(e, c)| e == *n && c.split == Split::Train)
        })
        .collect();
    train.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    let n_dev = (opts.dev_fraction * train.len() as f64).round() as usize;
    if n_dev > 0 {
        let dev: std::collections::HashSet<&String> = train.into_iter().take(n_dev).collect();
        for (e, essay) in corpus.entries.iter_mut().zip(&essay_of) {
            if e.split == Split::Train && dev.contains(essay) {
                e.split = Split::Dev;
            }
        }
        corpus.split_seed = Some(opts.seed);
    }

    corpus.validate()?;
    Ok((corpus, log))
}
