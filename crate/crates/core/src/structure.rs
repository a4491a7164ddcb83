//! Argumentative structures over a tokenized paragraph.
//!
//! An [`ArgStructure`] holds typed argument-component spans (token indices,
//! inclusive on both ends) and typed directed relations between them.
//! Structures are plain data: [`validate_structure`] reports every violated
//! invariant, and [`canonicalize`] brings a structure into the canonical order
//! used throughout the crate (components by start token, relations by
//! `(head, tail)`).

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("paragraph `{0}` has no tokens")]
    EmptyParagraph(String),
    #[error("paragraph `{id}`: token {index} is empty or contains whitespace")]
    BadToken { id: String, index: usize },
    #[error("schema `{name}`: {reason}")]
    BadSchema { name: String, reason: String },
    #[error("overlapping spans at token {token} (components {first} and {second})")]
    Overlap {
        first: usize,
        second: usize,
        token: usize,
    },
    #[error("relation {relation} references component {index}, but only {count} exist")]
    DanglingRelation {
        relation: usize,
        index: usize,
        count: usize,
    },
}

/// Tree structures allow at most one outgoing relation per component; graph
/// structures allow many.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureMode {
    Tree,
    Graph,
}

impl fmt::Display for StructureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureMode::Tree => f.write_str("tree"),
            StructureMode::Graph => f.write_str("graph"),
        }
    }
}

/// Label inventory of a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct Schema {
    name: String,
    ac_types: Vec<String>,
    ar_types: Vec<String>,
    structure_mode: StructureMode,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    name: String,
    ac_types: Vec<String>,
    ar_types: Vec<String>,
    structure_mode: StructureMode,
}

impl TryFrom<RawSchema> for Schema {
    type Error = StructureError;

    fn try_from(raw: RawSchema) -> Result<Self, Self::Error> {
        Schema::new(raw.name, raw.ac_types, raw.ar_types, raw.structure_mode)
    }
}

impl From<Schema> for RawSchema {
    fn from(s: Schema) -> Self {
        RawSchema {
            name: s.name,
            ac_types: s.ac_types,
            ar_types: s.ar_types,
            structure_mode: s.structure_mode,
        }
    }
}

fn check_labels(name: &str, what: &str, labels: &[String]) -> Result<(), StructureError> {
    let bad = |reason: String| StructureError::BadSchema {
        name: name.to_string(),
        reason,
    };
    if labels.is_empty() {
        return Err(bad(format!("{what} label list is empty")));
    }
    let mut seen = HashSet::new();
    for l in labels {
        if l.is_empty() {
            return Err(bad(format!("empty {what} label")));
        }
        if !seen.insert(l.as_str()) {
            return Err(bad(format!("duplicate {what} label `{l}`")));
        }
    }
    Ok(())
}

impl Schema {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        ac_types: impl IntoIterator<Item = S>,
        ar_types: impl IntoIterator<Item = S>,
        structure_mode: StructureMode,
    ) -> Result<Self, StructureError> {
        let name = name.into();
        let ac_types: Vec<String> = ac_types.into_iter().map(Into::into).collect();
        let ar_types: Vec<String> = ar_types.into_iter().map(Into::into).collect();
        check_labels(&name, "AC", &ac_types)?;
        check_labels(&name, "AR", &ar_types)?;
        Ok(Schema {
            name,
            ac_types,
            ar_types,
            structure_mode,
        })
    }

    /// Persuasive essays: three component types, support/attack trees.
    pub fn aae() -> Self {
        Schema::new(
            "aae",
            ["Claim", "MajorClaim", "Premise"],
            ["supports", "attacks"],
            StructureMode::Tree,
        )
        .expect("static schema")
    }

    /// Fine-grained essay labels; relations as in [`Schema::aae`].
    pub fn aae_fg() -> Self {
        Schema::new(
            "aae-fg",
            [
                "Fact",
                "Value",
                "Policy",
                "CommonGround",
                "Testimony",
                "HypotheticalInstance",
                "Statistics",
                "RealExample",
                "Others",
            ],
            ["supports", "attacks"],
            StructureMode::Tree,
        )
        .expect("static schema")
    }

    /// User comments: five proposition types, reason/evidence graphs.
    pub fn cdcp() -> Self {
        Schema::new(
            "cdcp",
            ["Fact", "Testimony", "Reference", "Policy", "Value"],
            ["reason", "evidence"],
            StructureMode::Graph,
        )
        .expect("static schema")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ac_types(&self) -> &[String] {
        &self.ac_types
    }

    pub fn ar_types(&self) -> &[String] {
        &self.ar_types
    }

    pub fn structure_mode(&self) -> StructureMode {
        self.structure_mode
    }

    pub fn ac_index(&self, label: &str) -> Option<usize> {
        self.ac_types.iter().position(|l| l == label)
    }

    pub fn ar_index(&self, label: &str) -> Option<usize> {
        self.ar_types.iter().position(|l| l == label)
    }
}

/// A tokenized paragraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    pub tokens: Vec<String>,
}

impl Paragraph {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Result<Self, StructureError> {
        let p = Paragraph {
            id: id.into(),
            tokens,
        };
        p.check()?;
        Ok(p)
    }

    /// Splits on whitespace; convenient for tests and examples.
    pub fn from_text(id: impl Into<String>, text: &str) -> Result<Self, StructureError> {
        Paragraph::new(id, text.split_whitespace().map(str::to_string).collect())
    }

    pub fn check(&self) -> Result<(), StructureError> {
        if self.tokens.is_empty() {
            return Err(StructureError::EmptyParagraph(self.id.clone()));
        }
        for (index, t) in self.tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(StructureError::BadToken {
                    id: self.id.clone(),
                    index,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// An argument component: tokens `start..=end` with a type label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AcSpan {
    pub start: usize,
    pub end: usize,
    #[serde(rename = "type")]
    pub ac_type: String,
}

impl AcSpan {
    pub fn new(start: usize, end: usize, ac_type: impl Into<String>) -> Self {
        AcSpan {
            start,
            end,
            ac_type: ac_type.into(),
        }
    }

    pub fn span(&self) -> (usize, usize) {
        (self.start, self.end)
    }

    pub fn overlaps(&self, other: &AcSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

/// A directed relation from `head` (the source) to `tail`, both indices into
/// the owning structure's component list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArgRelation {
    pub head: usize,
    pub tail: usize,
    #[serde(rename = "type")]
    pub ar_type: String,
}

impl ArgRelation {
    pub fn new(head: usize, tail: usize, ar_type: impl Into<String>) -> Self {
        ArgRelation {
            head,
            tail,
            ar_type: ar_type.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgStructure {
    pub paragraph: Paragraph,
    pub acs: Vec<AcSpan>,
    pub ars: Vec<ArgRelation>,
}

/// A relation expressed through the spans of its endpoints, independent of
/// component indexing.
pub type SpanRelation = ((usize, usize), (usize, usize), String);

impl ArgStructure {
    pub fn new(paragraph: Paragraph, acs: Vec<AcSpan>, ars: Vec<ArgRelation>) -> Self {
        ArgStructure {
            paragraph,
            acs,
            ars,
        }
    }

    pub fn empty(paragraph: Paragraph) -> Self {
        ArgStructure::new(paragraph, Vec::new(), Vec::new())
    }

    pub fn id(&self) -> &str {
        &self.paragraph.id
    }

    /// Relations as `(head span, tail span, type)` triples. Relations with
    /// out-of-range endpoints are skipped.
    pub fn span_relations(&self) -> Vec<SpanRelation> {
        self.ars
            .iter()
            .filter_map(|r| {
                let h = self.acs.get(r.head)?;
                let t = self.acs.get(r.tail)?;
                Some((h.span(), t.span(), r.ar_type.clone()))
            })
            .collect()
    }

    pub fn is_canonical(&self) -> bool {
        self.acs.windows(2).all(|w| w[0].start < w[1].start)
            && self
                .ars
                .windows(2)
                .all(|w| (w[0].head, w[0].tail) < (w[1].head, w[1].tail))
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyParagraph,
    BadToken {
        index: usize,
    },
    InvertedSpan {
        ac: usize,
    },
    SpanOutOfBounds {
        ac: usize,
        end: usize,
        len: usize,
    },
    UnknownAcType {
        ac: usize,
        label: String,
    },
    Overlap {
        first: usize,
        second: usize,
        token: usize,
    },
    Unordered {
        ac: usize,
    },
    RelationOutOfRange {
        relation: usize,
        index: usize,
    },
    SelfRelation {
        relation: usize,
    },
    UnknownArType {
        relation: usize,
        label: String,
    },
    DuplicatePair {
        relation: usize,
        head: usize,
        tail: usize,
    },
    MultipleOutgoing {
        ac: usize,
        count: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyParagraph => write!(f, "paragraph has no tokens"),
            Violation::BadToken { index } => {
                write!(f, "token {index} is empty or contains whitespace")
            }
            Violation::InvertedSpan { ac } => write!(f, "component {ac}: start after end"),
            Violation::SpanOutOfBounds { ac, end, len } => write!(
                f,
                "component {ac}: end token {end} outside paragraph of {len} tokens"
            ),
            Violation::UnknownAcType { ac, label } => {
                write!(f, "component {ac}: unknown AC type `{label}`")
            }
            Violation::Overlap {
                first,
                second,
                token,
            } => write!(
                f,
                "overlapping spans at token {token} (components {first} and {second})"
            ),
            Violation::Unordered { ac } => {
                write!(f, "component {ac} starts before its predecessor")
            }
            Violation::RelationOutOfRange { relation, index } => {
                write!(
                    f,
                    "relation {relation}: component index {index} out of range"
                )
            }
            Violation::SelfRelation { relation } => write!(f, "relation {relation}: self-relation"),
            Violation::UnknownArType { relation, label } => {
                write!(f, "relation {relation}: unknown AR type `{label}`")
            }
            Violation::DuplicatePair {
                relation,
                head,
                tail,
            } => write!(f, "relation {relation}: duplicate pair ({head}, {tail})"),
            Violation::MultipleOutgoing { ac, count } => write!(
                f,
                "component {ac}: multiple outgoing in tree mode ({count} relations)"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of `s` against `schema`.
pub fn validate_structure(s: &ArgStructure, schema: &Schema) -> ValidationReport {
    let mut violations = Vec::new();
    let len = s.paragraph.tokens.len();
    if len == 0 {
        violations.push(Violation::EmptyParagraph);
    }
    for (index, t) in s.paragraph.tokens.iter().enumerate() {
        if t.is_empty() || t.chars().any(char::is_whitespace) {
            violations.push(Violation::BadToken { index });
        }
    }

    for (ac, span) in s.acs.iter().enumerate() {
        if span.start > span.end {
            violations.push(Violation::InvertedSpan { ac });
        }
        if span.end >= len || span.start >= len {
            violations.push(Violation::SpanOutOfBounds {
                ac,
                end: span.end.max(span.start),
                len,
            });
        }
        if schema.ac_index(&span.ac_type).is_none() {
            violations.push(Violation::UnknownAcType {
                ac,
                label: span.ac_type.clone(),
            });
        }
        if ac > 0 && span.start < s.acs[ac - 1].start {
            violations.push(Violation::Unordered { ac });
        }
    }
    violations.extend(overlaps(&s.acs).into_iter().map(|(first, second, token)| {
        Violation::Overlap {
            first,
            second,
            token,
        }
    }));

    let mut pairs = HashSet::new();
    let mut outgoing = vec![0usize; s.acs.len()];
    for (relation, r) in s.ars.iter().enumerate() {
        let mut in_range = true;
        for index in [r.head, r.tail] {
            if index >= s.acs.len() {
                violations.push(Violation::RelationOutOfRange { relation, index });
                in_range = false;
            }
        }
        if r.head == r.tail {
            violations.push(Violation::SelfRelation { relation });
        }
        if schema.ar_index(&r.ar_type).is_none() {
            violations.push(Violation::UnknownArType {
                relation,
                label: r.ar_type.clone(),
            });
        }
        if !pairs.insert((r.head, r.tail)) {
            violations.push(Violation::DuplicatePair {
                relation,
                head: r.head,
                tail: r.tail,
            });
        }
        if in_range {
            outgoing[r.head] += 1;
        }
    }
    if schema.structure_mode() == StructureMode::Tree {
        for (ac, &count) in outgoing.iter().enumerate() {
            if count > 1 {
                violations.push(Violation::MultipleOutgoing { ac, count });
            }
        }
    }
    ValidationReport { violations }
}

/// All overlapping component pairs as `(first, second, first shared token)`,
/// with `first < second` in list order.
fn overlaps(acs: &[AcSpan]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..acs.len() {
        for j in i + 1..acs.len() {
            let (a, b) = (&acs[i], &acs[j]);
            if a.start <= a.end && b.start <= b.end && a.overlaps(b) {
                out.push((i, j, a.start.max(b.start)));
            }
        }
    }
    out
}

/// Sorts components by start token and relations by `(head, tail)`,
/// remapping relation endpoints. Idempotent.
pub fn canonicalize(s: &ArgStructure) -> Result<ArgStructure, StructureError> {
    if let Some(&(first, second, token)) = overlaps(&s.acs).first() {
        return Err(StructureError::Overlap {
            first,
            second,
            token,
        });
    }
    for (relation, r) in s.ars.iter().enumerate() {
        for index in [r.head, r.tail] {
            if index >= s.acs.len() {
                return Err(StructureError::DanglingRelation {
                    relation,
                    index,
                    count: s.acs.len(),
                });
            }
        }
    }
    let mut order: Vec<usize> = (0..s.acs.len()).collect();
    order.sort_by_key(|&i| (s.acs[i].start, s.acs[i].end));
    let mut new_index = vec![0; s.acs.len()];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let acs = order.iter().map(|&i| s.acs[i].clone()).collect();
    let mut ars: Vec<ArgRelation> = s
        .ars
        .iter()
        .map(|r| ArgRelation::new(new_index[r.head], new_index[r.tail], r.ar_type.clone()))
        .collect();
    ars.sort();
    Ok(ArgStructure::new(s.paragraph.clone(), acs, ars))
}
