//! Seeded synthetic corpora for tests and desk-scale training.
//!
//! Each component starts with a cue word (its lowercased type label) followed
//! by one to three words from the second half of [`FILLER_WORDS`]; tokens
//! between components come from the first half.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Corpus, CorpusEntry, CorpusError, CorpusStats, Split};
use crate::structure::{AcSpan, ArgRelation, ArgStructure, Paragraph, Schema, StructureMode};

pub const FILLER_WORDS: [&str; 100] = [
    "the",
    "a",
    "of",
    "to",
    "and",
    "in",
    "is",
    "it",
    "that",
    "for",
    "on",
    "with",
    "as",
    "was",
    "be",
    "by",
    "this",
    "are",
    "or",
    "from",
    "at",
    "an",
    "but",
    "not",
    "have",
    "has",
    "they",
    "we",
    "you",
    "he",
    "she",
    "which",
    "one",
    "all",
    "their",
    "there",
    "been",
    "if",
    "more",
    "when",
    "will",
    "would",
    "who",
    "so",
    "no",
    "people",
    "time",
    "should",
    "could",
    "many",
    "some",
    "other",
    "than",
    "then",
    "them",
    "these",
    "may",
    "only",
    "also",
    "because",
    "new",
    "most",
    "such",
    "even",
    "after",
    "city",
    "school",
    "money",
    "work",
    "life",
    "world",
    "year",
    "students",
    "children",
    "government",
    "country",
    "family",
    "society",
    "system",
    "law",
    "health",
    "public",
    "market",
    "water",
    "energy",
    "food",
    "tax",
    "job",
    "team",
    "rule",
    "price",
    "cost",
    "risk",
    "idea",
    "change",
    "study",
    "book",
    "road",
    "park",
    "car",
];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_paragraphs: usize,
    /// Inclusive token-count range.
    pub tokens_range: (usize, usize),
    /// Components per token.
    pub ac_density: f64,
    pub mode: StructureMode,
    pub schema: Schema,
    /// Chance that a component gets an outgoing relation (tree mode), or the
    /// chance of each extra outgoing relation (graph mode).
    pub relation_prob: f64,
    pub dev_fraction: f64,
    pub test_fraction: f64,
}

impl SynthConfig {
    pub fn new(seed: u64, n_paragraphs: usize, mode: StructureMode) -> Self {
        let schema = match mode {
            StructureMode::Tree => Schema::aae(),
            StructureMode::Graph => Schema::cdcp(),
        };
        SynthConfig {
            seed,
            n_paragraphs,
            tokens_range: (8, 30),
            ac_density: 0.12,
            mode,
            schema,
            relation_prob: 0.7,
            dev_fraction: 0.0,
            test_fraction: 0.0,
        }
    }
}

const MIN_SPAN: usize = 2;
const MAX_SPAN: usize = 4;

fn check(cfg: &SynthConfig) -> Result<(), CorpusError> {
    let (lo, hi) = cfg.tokens_range;
    if lo == 0 || lo > hi {
        return Err(CorpusError::Infeasible(format!("token range {lo}..={hi}")));
    }
    if !(cfg.ac_density >= 0.0 && cfg.ac_density.is_finite()) {
        return Err(CorpusError::Infeasible(format!(
            "density {}",
            cfg.ac_density
        )));
    }
    for n in [lo, hi] {
        let k = (cfg.ac_density * n as f64).round() as usize;
        if k * MIN_SPAN > n {
            return Err(CorpusError::Infeasible(format!(
                "{k} components of at least {MIN_SPAN} tokens do not fit in {n} tokens"
            )));
        }
    }
    for p in [cfg.relation_prob, cfg.dev_fraction, cfg.test_fraction] {
        if !(0.0..=1.0).contains(&p) {
            return Err(CorpusError::Infeasible(format!("probability {p}")));
        }
    }
    if cfg.dev_fraction + cfg.test_fraction > 1.0 {
        return Err(CorpusError::Infeasible("split fractions exceed 1".into()));
    }
    Ok(())
}

fn one(rng: &mut ChaCha8Rng, id: String, cfg: &SynthConfig, schema: &Schema) -> ArgStructure {
    let n = rng.gen_range(cfg.tokens_range.0..=cfg.tokens_range.1);
    let k = (cfg.ac_density * n as f64).round() as usize;

    let mut lens: Vec<usize> = (0..k).map(|_| rng.gen_range(MIN_SPAN..=MAX_SPAN)).collect();
    while lens.iter().sum::<usize>() > n {
        let i = lens
            .iter()
            .position(|&l| l > MIN_SPAN)
            .expect("feasibility checked");
        lens[i] -= 1;
    }
    // Scatter the free tokens over the k + 1 gaps.
    let free = n - lens.iter().sum::<usize>();
    let mut gaps = vec![0usize; k + 1];
    for _ in 0..free {
        gaps[rng.gen_range(0..=k)] += 1;
    }

    let mut tokens = Vec::with_capacity(n);
    let mut acs = Vec::with_capacity(k);
    let half = FILLER_WORDS.len() / 2;
    let filler = |rng: &mut ChaCha8Rng| FILLER_WORDS[rng.gen_range(0..half)].to_string();
    let content =
        |rng: &mut ChaCha8Rng| FILLER_WORDS[rng.gen_range(half..FILLER_WORDS.len())].to_string();
    for i in 0..k {
        for _ in 0..gaps[i] {
            tokens.push(filler(rng));
        }
        let ty = &schema.ac_types()[rng.gen_range(0..schema.ac_types().len())];
        let start = tokens.len();
        tokens.push(ty.to_lowercase());
        for _ in 1..lens[i] {
            tokens.push(content(rng));
        }
        acs.push(AcSpan::new(start, tokens.len() - 1, ty.clone()));
    }
    for _ in 0..gaps[k] {
        tokens.push(filler(rng));
    }

    let ar_type =
        |rng: &mut ChaCha8Rng| schema.ar_types()[rng.gen_range(0..schema.ar_types().len())].clone();
    let mut ars = Vec::new();
    if k >= 2 {
        match cfg.mode {
            StructureMode::Tree => {
                // Random forest: each component may point at one placed earlier
                // in a random order, which rules out cycles.
                let mut order: Vec<usize> = (0..k).collect();
                order.shuffle(rng);
                for pos in 1..k {
                    if rng.gen_bool(cfg.relation_prob) {
                        let tail = order[rng.gen_range(0..pos)];
                        ars.push(ArgRelation::new(order[pos], tail, ar_type(rng)));
                    }
                }
            }
            StructureMode::Graph => {
                for head in 0..k {
                    let mut tails: Vec<usize> = (0..k).filter(|&t| t != head).collect();
                    tails.shuffle(rng);
                    for &tail in tails.iter().take(2) {
                        if rng.gen_bool(cfg.relation_prob / 2.0) {
                            ars.push(ArgRelation::new(head, tail, ar_type(rng)));
                        }
                    }
                }
            }
        }
    }
    ars.sort_by_key(|r| (r.head, r.tail));

    let paragraph = Paragraph::new(id, tokens).expect("generated paragraphs are non-empty");
    ArgStructure::new(paragraph, acs, ars)
}

/// Generates a corpus; a pure function of `cfg`.
pub fn gen_synthetic(cfg: &SynthConfig) -> Result<Corpus, CorpusError> {
    gen_synthetic_tallied(cfg).map(|(c, _)| c)
}

/// Like [`gen_synthetic`], also returning the counts recorded while
/// generating.
pub fn gen_synthetic_tallied(cfg: &SynthConfig) -> Result<(Corpus, CorpusStats), CorpusError> {
    check(cfg)?;
    let schema = Schema::new(
        cfg.schema.name(),
        cfg.schema.ac_types().to_vec(),
        cfg.schema.ar_types().to_vec(),
        cfg.mode,
    )
    .expect("labels come from a valid schema");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut corpus = Corpus::new(schema.clone());
    let n_test = (cfg.test_fraction * cfg.n_paragraphs as f64).round() as usize;
    let n_dev = (cfg.dev_fraction * cfg.n_paragraphs as f64).round() as usize;
    let mut tally = CorpusStats {
        ac_types: BTreeMap::new(),
        ..Default::default()
    };
    for i in 0..cfg.n_paragraphs {
        let s = one(&mut rng, format!("syn{i:05}"), cfg, &schema);
        let split = if i < cfg.n_paragraphs - n_test - n_dev {
            Split::Train
        } else if i < cfg.n_paragraphs - n_test {
            Split::Dev
        } else {
            Split::Test
        };
        tally.documents += 1;
        tally.paragraphs += 1;
        tally.acs += s.acs.len();
        tally.ars += s.ars.len();
        for a in &s.acs {
            *tally.ac_types.entry(a.ac_type.clone()).or_default() += 1;
        }
        for r in &s.ars {
            *tally.ar_types.entry(r.ar_type.clone()).or_default() += 1;
        }
        *tally.splits.entry(split.name().to_string()).or_default() += 1;
        corpus.entries.push(CorpusEntry {
            structure: s,
            split,
        });
    }
    corpus.split_seed = Some(cfg.seed);
    Ok((corpus, tally))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_stats;

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::new(1, 10, StructureMode::Tree);
        assert_eq!(gen_synthetic(&cfg).unwrap(), gen_synthetic(&cfg).unwrap());
        let other = SynthConfig::new(2, 10, StructureMode::Tree);
        assert_ne!(gen_synthetic(&cfg).unwrap(), gen_synthetic(&other).unwrap());
    }

    #[test]
    fn valid_and_tallied() {
        for mode in [StructureMode::Tree, StructureMode::Graph] {
            let mut cfg = SynthConfig::new(7, 200, mode);
            cfg.ac_density = 0.2;
            let (c, tally) = gen_synthetic_tallied(&cfg).unwrap();
            c.validate().unwrap();
            assert_eq!(corpus_stats(&c), tally);
            assert!(tally.ars > 0);
        }
    }

    #[test]
    fn tree_has_single_outgoing() {
        let mut cfg = SynthConfig::new(3, 300, StructureMode::Tree);
        cfg.relation_prob = 1.0;
        for s in gen_synthetic(&cfg).unwrap().structures() {
            let mut heads: Vec<usize> = s.ars.iter().map(|r| r.head).collect();
            heads.dedup();
            assert_eq!(heads.len(), s.ars.len());
        }
    }

    #[test]
    fn zero_density_and_infeasible() {
        let mut cfg = SynthConfig::new(1, 5, StructureMode::Graph);
        cfg.ac_density = 0.0;
        assert!(gen_synthetic(&cfg)
            .unwrap()
            .structures()
            .all(|s| s.acs.is_empty()));
        cfg.ac_density = 0.9;
        assert!(matches!(
            gen_synthetic(&cfg),
            Err(CorpusError::Infeasible(_))
        ));
    }
}
