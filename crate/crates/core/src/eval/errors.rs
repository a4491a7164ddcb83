//! Span- and relation-level error taxonomy.
//!
//! Each paragraph is processed in a fixed order:
//!
//! 1. exact span matches are removed from both sides; a type difference
//!    counts one AC misclassification;
//! 2. a remaining prediction overlapping two or more remaining gold spans is
//!    one merge (predictions in order); then a remaining gold span overlapped
//!    by two or more remaining predictions is one split (gold in order);
//! 3. remaining one-to-one overlaps are boundary mismatches;
//! 4. remaining gold spans are missed, remaining predictions false positives;
//! 5. relations whose endpoint spans match but whose type differs are AR
//!    misclassifications.

use std::collections::HashMap;

use serde::Serialize;

use super::{align, EvalError};
use crate::structure::{AcSpan, ArgStructure};

/// What happened to a single gold or predicted component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanOutcome {
    Exact,
    /// Exact span, different type.
    Misclassified,
    BoundaryMismatch,
    Missed,
    FalsePositive,
    Split,
    Merged,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ErrorCounts {
    pub boundary_mismatch: usize,
    pub missed: usize,
    pub false_positive: usize,
    pub ac_misclassification: usize,
    pub ar_misclassification: usize,
    pub split: usize,
    pub merged: usize,
    /// Components left without an outcome; zero by construction.
    pub unaccounted: usize,
    pub gold_acs: usize,
    pub gold_ars: usize,
}

impl std::ops::AddAssign for ErrorCounts {
    fn add_assign(&mut self, o: Self) {
        self.boundary_mismatch += o.boundary_mismatch;
        self.missed += o.missed;
        self.false_positive += o.false_positive;
        self.ac_misclassification += o.ac_misclassification;
        self.ar_misclassification += o.ar_misclassification;
        self.split += o.split;
        self.merged += o.merged;
        self.unaccounted += o.unaccounted;
        self.gold_acs += o.gold_acs;
        self.gold_ars += o.gold_ars;
    }
}

impl ErrorCounts {
    /// `(label, count, percentage)` rows. AC categories are relative to gold
    /// ACs and the AR category to gold ARs.
    pub fn rows(&self) -> Vec<(&'static str, usize, f64)> {
        let pct = |n: usize, d: usize| {
            if d == 0 {
                0.0
            } else {
                100.0 * n as f64 / d as f64
            }
        };
        let ac = |n| pct(n, self.gold_acs);
        vec![
            (
                "AC boundary mismatches",
                self.boundary_mismatch,
                ac(self.boundary_mismatch),
            ),
            ("missed ACs", self.missed, ac(self.missed)),
            (
                "false positive ACs",
                self.false_positive,
                ac(self.false_positive),
            ),
            (
                "AC misclassifications",
                self.ac_misclassification,
                ac(self.ac_misclassification),
            ),
            (
                "AR misclassifications",
                self.ar_misclassification,
                pct(self.ar_misclassification, self.gold_ars),
            ),
            ("split ACs", self.split, ac(self.split)),
            ("merged ACs", self.merged, ac(self.merged)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParagraphErrors {
    pub id: String,
    /// One outcome per gold component, in gold order.
    pub gold: Vec<SpanOutcome>,
    /// One outcome per predicted component, in prediction order.
    pub pred: Vec<SpanOutcome>,
    pub counts: ErrorCounts,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ErrorReport {
    pub counts: ErrorCounts,
    pub percentages: Vec<(String, f64)>,
    pub paragraphs: Vec<ParagraphErrors>,
}

impl ErrorReport {
    pub fn to_table(&self) -> String {
        let mut s = format!("{:<24} {:>7} {:>8}\n", "category", "count", "percent");
        for (label, n, p) in self.counts.rows() {
            s.push_str(&format!("{label:<24} {n:>7} {p:>7.2}%\n"));
        }
        s
    }
}

fn overlaps(a: &AcSpan, b: &AcSpan) -> bool {
    a.start <= b.end && b.start <= a.end
}

#[allow(clippy::needless_range_loop)]
pub fn classify_paragraph(gold: &ArgStructure, pred: &ArgStructure) -> ParagraphErrors {
    let g = &gold.acs;
    let p = &pred.acs;
    let mut go: Vec<Option<SpanOutcome>> = vec![None; g.len()];
    let mut po: Vec<Option<SpanOutcome>> = vec![None; p.len()];
    let mut c = ErrorCounts {
        gold_acs: g.len(),
        gold_ars: gold.ars.len(),
        ..Default::default()
    };

    // (1) exact spans
    let mut by_span: HashMap<(usize, usize), usize> = HashMap::new();
    for (j, a) in p.iter().enumerate() {
        by_span.entry(a.span()).or_insert(j);
    }
    for (i, a) in g.iter().enumerate() {
        if let Some(&j) = by_span.get(&a.span()) {
            if po[j].is_some() {
                continue;
            }
            let o = if a.ac_type == p[j].ac_type {
                SpanOutcome::Exact
            } else {
                c.ac_misclassification += 1;
                SpanOutcome::Misclassified
            };
            go[i] = Some(o);
            po[j] = Some(o);
        }
    }

    let open_gold = |go: &[Option<SpanOutcome>], j: usize| -> Vec<usize> {
        (0..g.len())
            .filter(|&i| go[i].is_none() && overlaps(&g[i], &p[j]))
            .collect()
    };
    let open_pred = |po: &[Option<SpanOutcome>], i: usize| -> Vec<usize> {
        (0..p.len())
            .filter(|&j| po[j].is_none() && overlaps(&g[i], &p[j]))
            .collect()
    };

    // (2) merges, then splits
    for j in 0..p.len() {
        if po[j].is_some() {
            continue;
        }
        let hit = open_gold(&go, j);
        if hit.len() >= 2 {
            c.merged += 1;
            po[j] = Some(SpanOutcome::Merged);
            for i in hit {
                go[i] = Some(SpanOutcome::Merged);
            }
        }
    }
    for i in 0..g.len() {
        if go[i].is_some() {
            continue;
        }
        let hit = open_pred(&po, i);
        if hit.len() >= 2 {
            c.split += 1;
            go[i] = Some(SpanOutcome::Split);
            for j in hit {
                po[j] = Some(SpanOutcome::Split);
            }
        }
    }

    // (3) one-to-one overlaps, (4) leftovers
    for i in 0..g.len() {
        if go[i].is_some() {
            continue;
        }
        if let Some(&j) = open_pred(&po, i).first() {
            c.boundary_mismatch += 1;
            go[i] = Some(SpanOutcome::BoundaryMismatch);
            po[j] = Some(SpanOutcome::BoundaryMismatch);
        } else {
            c.missed += 1;
            go[i] = Some(SpanOutcome::Missed);
        }
    }
    for o in po.iter_mut().filter(|o| o.is_none()) {
        c.false_positive += 1;
        *o = Some(SpanOutcome::FalsePositive);
    }

    // (5) relation types
    let pred_rel: HashMap<_, Vec<String>> =
        pred.span_relations()
            .into_iter()
            .fold(HashMap::new(), |mut m, (h, t, ty)| {
                m.entry((h, t)).or_default().push(ty);
                m
            });
    for (h, t, ty) in gold.span_relations() {
        if let Some(types) = pred_rel.get(&(h, t)) {
            if !types.contains(&ty) {
                c.ar_misclassification += 1;
            }
        }
    }

    c.unaccounted = go.iter().chain(&po).filter(|o| o.is_none()).count();
    let fill = |v: Vec<Option<SpanOutcome>>| {
        v.into_iter()
            .map(|o| o.unwrap_or(SpanOutcome::Missed))
            .collect()
    };
    ParagraphErrors {
        id: gold.id().to_string(),
        gold: fill(go),
        pred: fill(po),
        counts: c,
    }
}

pub fn error_report(
    gold: &[ArgStructure],
    pred: &[ArgStructure],
) -> Result<ErrorReport, EvalError> {
    let mut report = ErrorReport::default();
    for (g, p) in align(gold, pred)? {
        let pe = classify_paragraph(g, p);
        report.counts += pe.counts;
        report.paragraphs.push(pe);
    }
    report.percentages = report
        .counts
        .rows()
        .into_iter()
        .map(|(l, _, p)| (l.to_string(), p))
        .collect();
    Ok(report)
}
