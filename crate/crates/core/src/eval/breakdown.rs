//! Breakdowns of the task scores by paragraph size, component type and
//! relation distance.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::{align, paragraph_scores, Counts, EvalError};
use crate::structure::ArgStructure;

/// A partition of gold component counts into contiguous ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthBuckets {
    /// Inclusive upper bounds, strictly increasing; one extra open bucket
    /// follows the last bound.
    bounds: Vec<usize>,
}

impl LengthBuckets {
    /// Bounds `[3, 5]` give buckets `0..=3`, `4..=5` and `6..`. Bounds are
    /// sorted and deduplicated.
    pub fn from_bounds(bounds: &[usize]) -> Self {
        let mut bounds = bounds.to_vec();
        bounds.sort_unstable();
        bounds.dedup();
        LengthBuckets { bounds }
    }

    /// A single bucket covering everything.
    pub fn all() -> Self {
        LengthBuckets { bounds: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.bounds.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, count: usize) -> usize {
        self.bounds.partition_point(|&b| b < count)
    }

    pub fn range(&self, i: usize) -> (usize, Option<usize>) {
        let lo = if i == 0 { 0 } else { self.bounds[i - 1] + 1 };
        (lo, self.bounds.get(i).copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthBucket {
    pub min_acs: usize,
    /// `None` for the open-ended last bucket.
    pub max_acs: Option<usize>,
    pub paragraphs: usize,
    /// ACI counts; `None` when no paragraph falls in the bucket.
    pub aci: Option<Counts>,
}

/// ACI micro-F1 per bucket of gold component count.
pub fn length_breakdown(
    gold: &[ArgStructure],
    pred: &[ArgStructure],
    buckets: &LengthBuckets,
) -> Result<Vec<LengthBucket>, EvalError> {
    let mut out: Vec<LengthBucket> = (0..buckets.len())
        .map(|i| {
            let (min_acs, max_acs) = buckets.range(i);
            LengthBucket {
                min_acs,
                max_acs,
                paragraphs: 0,
                aci: None,
            }
        })
        .collect();
    for (g, p) in align(gold, pred)? {
        let b = &mut out[buckets.index_of(g.acs.len())];
        b.paragraphs += 1;
        *b.aci.get_or_insert_with(Counts::default) += paragraph_scores(g, p).aci;
    }
    Ok(out)
}

/// Per-label counts on exact `(span, type)` matches. Labels absent from
/// both sides are omitted.
pub fn category_breakdown(
    gold: &[ArgStructure],
    pred: &[ArgStructure],
) -> Result<BTreeMap<String, Counts>, EvalError> {
    let mut out: BTreeMap<String, Counts> = BTreeMap::new();
    for (g, p) in align(gold, pred)? {
        let key = |s: &ArgStructure| {
            s.acs
                .iter()
                .map(|a| (a.start, a.end, a.ac_type.clone()))
                .collect::<HashSet<_>>()
        };
        let (gs, ps) = (key(g), key(p));
        for k in &gs {
            let c = out.entry(k.2.clone()).or_default();
            if ps.contains(k) {
                c.tp += 1;
            } else {
                c.fn_ += 1;
            }
        }
        for k in ps.difference(&gs) {
            out.entry(k.2.clone()).or_default().fp += 1;
        }
    }
    Ok(out)
}

/// Number of components strictly between the endpoints of relation `r`,
/// counted in start order.
pub fn relation_distance(s: &ArgStructure, head: usize, tail: usize) -> usize {
    let rank = |i: usize| {
        let a = &s.acs[i];
        s.acs
            .iter()
            .filter(|b| (b.start, b.end) < (a.start, a.end))
            .count()
    };
    let (a, b) = (rank(head), rank(tail));
    a.abs_diff(b).saturating_sub(1)
}

/// Counts for one distance bucket. Gold relations are bucketed by their gold
/// distance and predicted relations by their predicted distance, so a true
/// positive is counted on each side separately.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DistanceBucket {
    /// Matched gold relations with this gold distance.
    pub tp_gold: usize,
    /// Matched predicted relations with this predicted distance.
    pub tp_pred: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl DistanceBucket {
    pub fn precision(&self) -> f64 {
        super::ratio(self.tp_pred, self.tp_pred + self.fp)
    }

    pub fn recall(&self) -> f64 {
        super::ratio(self.tp_gold, self.tp_gold + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

type Key = ((usize, usize), (usize, usize));

/// Distinct span-keyed relations with their distances.
fn keyed_relations(s: &ArgStructure) -> Vec<(Key, usize)> {
    let mut seen = HashSet::new();
    s.ars
        .iter()
        .filter(|r| r.head < s.acs.len() && r.tail < s.acs.len())
        .map(|r| {
            (
                (s.acs[r.head].span(), s.acs[r.tail].span()),
                relation_distance(s, r.head, r.tail),
            )
        })
        .filter(|(k, _)| seen.insert(*k))
        .collect()
}

/// ARI counts per relation distance.
pub fn distance_breakdown(
    gold: &[ArgStructure],
    pred: &[ArgStructure],
) -> Result<BTreeMap<usize, DistanceBucket>, EvalError> {
    let mut out: BTreeMap<usize, DistanceBucket> = BTreeMap::new();
    for (g, p) in align(gold, pred)? {
        let gr = keyed_relations(g);
        let pr = keyed_relations(p);
        let gk: HashSet<Key> = gr.iter().map(|(k, _)| *k).collect();
        let pk: HashSet<Key> = pr.iter().map(|(k, _)| *k).collect();
        for (k, d) in &gr {
            let b = out.entry(*d).or_default();
            if pk.contains(k) {
                b.tp_gold += 1;
            } else {
                b.fn_ += 1;
            }
        }
        for (k, d) in &pr {
            let b = out.entry(*d).or_default();
            if gk.contains(k) {
                b.tp_pred += 1;
            } else {
                b.fp += 1;
            }
        }
    }
    Ok(out)
}
