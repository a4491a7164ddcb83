//! Corpora: parsers for the essay and comment corpora, a line-delimited
//! canonical format, and a seeded synthetic generator.

mod aae;
mod canonical;
mod cdcp;
mod synthetic;
mod tokenize;

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{validate_structure, ArgStructure, Schema};

pub use aae::{parse_aae, AaeOptions};
pub use canonical::{
    read_canonical, sidecar_path, write_canonical, CanonicalReader, CanonicalWriter, Descriptor,
};
pub use cdcp::parse_cdcp;
pub use synthetic::{gen_synthetic, gen_synthetic_tallied, SynthConfig, FILLER_WORDS};
pub use tokenize::{tokenize, TokenSpan};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("paragraph `{id}`: {message}")]
    Invalid { id: String, message: String },
    #[error("paragraph id `{0}` occurs more than once")]
    DuplicateId(String),
    #[error("{file}: {message}")]
    Annotation { file: String, message: String },
    #[error("infeasible generator settings: {0}")]
    Infeasible(String),
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub structure: ArgStructure,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub schema: Schema,
    pub entries: Vec<CorpusEntry>,
    /// Seed used to carve the dev split, when one was carved.
    pub split_seed: Option<u64>,
}

impl Corpus {
    pub fn new(schema: Schema) -> Self {
        Corpus {
            schema,
            entries: Vec::new(),
            split_seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn structures(&self) -> impl Iterator<Item = &ArgStructure> {
        self.entries.iter().map(|e| &e.structure)
    }

    pub fn split(&self, split: Split) -> Vec<ArgStructure> {
        self.entries
            .iter()
            .filter(|e| e.split == split)
            .map(|e| e.structure.clone())
            .collect()
    }

    /// Checks id uniqueness and validates every structure against the schema.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            let id = e.structure.id();
            if !seen.insert(id) {
                return Err(CorpusError::DuplicateId(id.to_string()));
            }
            let report = validate_structure(&e.structure, &self.schema);
            if !report.is_valid() {
                return Err(CorpusError::Invalid {
                    id: id.to_string(),
                    message: report.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// What a parser changed or skipped on the way in.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseLog {
    /// Tokens cut so that annotation offsets fall on token boundaries.
    pub token_cuts: usize,
    pub cross_paragraph_dropped: usize,
    pub attributes_ignored: usize,
    /// Extra relations created by expanding multi-source links.
    pub expanded_links: usize,
    pub duplicate_links: usize,
    pub notes: Vec<String>,
}

impl ParseLog {
    pub(crate) fn note(&mut self, m: String) {
        log::debug!("{m}");
        self.notes.push(m);
    }
}

/// The document a paragraph belongs to: the id up to its last `/`, or the
/// whole id.
pub fn document_id(paragraph_id: &str) -> &str {
    paragraph_id
        .rsplit_once('/')
        .map_or(paragraph_id, |(doc, _)| doc)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub paragraphs: usize,
    pub acs: usize,
    pub ars: usize,
    pub ac_types: BTreeMap<String, usize>,
    pub ar_types: BTreeMap<String, usize>,
    pub splits: BTreeMap<String, usize>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut st = CorpusStats::default();
    let mut docs = HashSet::new();
    for e in &corpus.entries {
        let s = &e.structure;
        docs.insert(document_id(s.id()));
        st.paragraphs += 1;
        st.acs += s.acs.len();
        st.ars += s.ars.len();
        for a in &s.acs {
            *st.ac_types.entry(a.ac_type.clone()).or_default() += 1;
        }
        for r in &s.ars {
            *st.ar_types.entry(r.ar_type.clone()).or_default() += 1;
        }
        *st.splits.entry(e.split.name().to_string()).or_default() += 1;
    }
    st.documents = docs.len();
    st
}
