//! Line-delimited canonical format: one JSON record per paragraph, plus a
//! `<stem>.schema.json` descriptor next to the data file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusEntry, CorpusError, Split};
use crate::structure::{
    canonicalize, AcSpan, ArgRelation, ArgStructure, Paragraph, Schema, StructureMode,
};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    tokens: Vec<String>,
    acs: Vec<AcSpan>,
    ars: Vec<ArgRelation>,
    split: Split,
}

/// Contents of the schema sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    pub name: String,
    pub ac_types: Vec<String>,
    pub ar_types: Vec<String>,
    pub structure_mode: StructureMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_seed: Option<u64>,
}

impl Descriptor {
    pub fn new(schema: &Schema, split_seed: Option<u64>) -> Self {
        Descriptor {
            name: schema.name().to_string(),
            ac_types: schema.ac_types().to_vec(),
            ar_types: schema.ar_types().to_vec(),
            structure_mode: schema.structure_mode(),
            split_seed,
        }
    }

    pub fn schema(&self) -> Result<Schema, crate::structure::StructureError> {
        Schema::new(
            self.name.clone(),
            self.ac_types.clone(),
            self.ar_types.clone(),
            self.structure_mode,
        )
    }
}

/// `data/train.jsonl` → `data/train.schema.json`.
pub fn sidecar_path(data: &Path) -> PathBuf {
    let stem = data
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    data.with_file_name(format!("{stem}.schema.json"))
}

/// Streaming counterpart of [`write_canonical`]: the sidecar is written on
/// creation, records one at a time.
pub struct CanonicalWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CanonicalWriter {
    pub fn create(
        path: &Path,
        schema: &Schema,
        split_seed: Option<u64>,
    ) -> Result<Self, CorpusError> {
        let side = sidecar_path(path);
        let desc = serde_json::to_string_pretty(&Descriptor::new(schema, split_seed))
            .expect("descriptor serializes");
        std::fs::write(&side, desc + "\n").map_err(|e| CorpusError::io(&side, e))?;
        let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
        Ok(CanonicalWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    /// Canonicalizes and appends one entry; structures that cannot be
    /// canonicalized are rejected with their paragraph id.
    pub fn write(&mut self, e: &CorpusEntry) -> Result<(), CorpusError> {
        let s = canonicalize(&e.structure).map_err(|err| CorpusError::Invalid {
            id: e.structure.id().to_string(),
            message: err.to_string(),
        })?;
        let rec = Record {
            id: s.paragraph.id,
            tokens: s.paragraph.tokens,
            acs: s.acs,
            ars: s.ars,
            split: e.split,
        };
        serde_json::to_writer(&mut self.out, &rec).expect("record serializes");
        self.out
            .write_all(b"\n")
            .map_err(|err| CorpusError::io(&self.path, err))
    }

    pub fn finish(mut self) -> Result<(), CorpusError> {
        self.out.flush().map_err(|e| CorpusError::io(&self.path, e))
    }
}

/// Writes every structure in canonical order.
pub fn write_canonical(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let mut w = CanonicalWriter::create(path, &corpus.schema, corpus.split_seed)?;
    for e in &corpus.entries {
        w.write(e)?;
    }
    w.finish()
}

/// Streams validated entries from a canonical data file.
pub struct CanonicalReader {
    path: PathBuf,
    lines: std::io::Lines<BufReader<File>>,
    line: usize,
    schema: Schema,
    split_seed: Option<u64>,
    seen: std::collections::HashSet<String>,
}

impl CanonicalReader {
    pub fn open(path: &Path) -> Result<Self, CorpusError> {
        let side = sidecar_path(path);
        let text = std::fs::read_to_string(&side).map_err(|e| CorpusError::io(&side, e))?;
        let malformed = |message: String| CorpusError::Malformed {
            path: side.clone(),
            line: 1,
            message,
        };
        let desc: Descriptor = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
        let schema = desc.schema().map_err(|e| malformed(e.to_string()))?;
        let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
        Ok(CanonicalReader {
            path: path.to_path_buf(),
            lines: BufReader::new(file).lines(),
            line: 0,
            schema,
            split_seed: desc.split_seed,
            seen: Default::default(),
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn split_seed(&self) -> Option<u64> {
        self.split_seed
    }

    fn parse(&mut self, text: &str) -> Result<CorpusEntry, CorpusError> {
        let malformed = |message: String| CorpusError::Malformed {
            path: self.path.clone(),
            line: self.line,
            message,
        };
        let rec: Record = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        let paragraph = Paragraph::new(rec.id, rec.tokens).map_err(|e| malformed(e.to_string()))?;
        let structure = ArgStructure::new(paragraph, rec.acs, rec.ars);
        let report = crate::structure::validate_structure(&structure, &self.schema);
        if !report.is_valid() {
            return Err(malformed(format!(
                "paragraph `{}`: {report}",
                structure.id()
            )));
        }
        if !self.seen.insert(structure.id().to_string()) {
            return Err(malformed(format!(
                "duplicate paragraph id `{}`",
                structure.id()
            )));
        }
        Ok(CorpusEntry {
            structure,
            split: rec.split,
        })
    }
}

impl Iterator for CanonicalReader {
    type Item = Result<CorpusEntry, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line += 1;
            let text = match line {
                Ok(t) => t,
                Err(e) => return Some(Err(CorpusError::io(&self.path, e))),
            };
            if text.trim().is_empty() {
                continue;
            }
            return Some(self.parse(&text));
        }
    }
}

pub fn read_canonical(path: &Path) -> Result<Corpus, CorpusError> {
    let mut reader = CanonicalReader::open(path)?;
    let mut corpus = Corpus::new(reader.schema.clone());
    corpus.split_seed = reader.split_seed;
    for e in &mut reader {
        corpus.entries.push(e?);
    }
    Ok(corpus)
}
