//! Relational chains: maximal simple directed paths of at least two
//! relations in a structure's relation graph.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use super::{align, EvalError};
use crate::structure::ArgStructure;

/// Components along a path, from the first head to the final tail. The
/// chain's length is its relation count, `nodes.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Chain {
    pub nodes: Vec<usize>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn relations(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }
}

/// All maximal simple directed paths with at least two relations, sorted.
/// A path is maximal when no component outside it points at its first node
/// and its last node points at no component outside it.
pub fn extract_chains(s: &ArgStructure) -> Vec<Chain> {
    let n = s.acs.len();
    let mut out_edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut in_edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for r in &s.ars {
        if r.head < n && r.tail < n && r.head != r.tail {
            out_edges[r.head].insert(r.tail);
            in_edges[r.tail].insert(r.head);
        }
    }

    let mut found = BTreeSet::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; n];
    for start in 0..n {
        path.push(start);
        on_path[start] = true;
        walk(&out_edges, &in_edges, &mut path, &mut on_path, &mut found);
        on_path[start] = false;
        path.pop();
    }
    found.into_iter().collect()
}

fn walk(
    out_edges: &[BTreeSet<usize>],
    in_edges: &[BTreeSet<usize>],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    found: &mut BTreeSet<Chain>,
) {
    let last = *path.last().expect("non-empty path");
    let mut extended = false;
    for &next in &out_edges[last] {
        if on_path[next] {
            continue;
        }
        extended = true;
        path.push(next);
        on_path[next] = true;
        walk(out_edges, in_edges, path, on_path, found);
        on_path[next] = false;
        path.pop();
    }
    if !extended && path.len() >= 3 && in_edges[path[0]].iter().all(|&p| on_path[p]) {
        found.insert(Chain {
            nodes: path.clone(),
        });
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ChainRow {
    pub ground_truth: usize,
    pub predicted: usize,
    pub correct: usize,
}

impl ChainRow {
    /// `correct / ground_truth`, or `None` with no gold chains.
    pub fn accuracy(&self) -> Option<f64> {
        (self.ground_truth > 0).then(|| self.correct as f64 / self.ground_truth as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub by_length: BTreeMap<usize, ChainRow>,
    pub require_types: bool,
}

impl ChainReport {
    pub fn ground_truth_distribution(&self) -> BTreeMap<usize, usize> {
        self.by_length
            .iter()
            .filter(|(_, r)| r.ground_truth > 0)
            .map(|(&k, r)| (k, r.ground_truth))
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:>6} {:>8} {:>8} {:>8} {:>9}\n",
            "length", "gold", "pred", "correct", "accuracy"
        );
        for (len, r) in &self.by_length {
            let acc = r
                .accuracy()
                .map(|a| format!("{:.2}%", 100.0 * a))
                .unwrap_or_else(|| "-".into());
            s.push_str(&format!(
                "{:>6} {:>8} {:>8} {:>8} {:>9}\n",
                len, r.ground_truth, r.predicted, r.correct, acc
            ));
        }
        s
    }
}

type SpanRel = ((usize, usize), (usize, usize), Option<String>);

fn span_relations(s: &ArgStructure, typed: bool) -> HashSet<SpanRel> {
    s.span_relations()
        .into_iter()
        .map(|(h, t, ty)| (h, t, typed.then_some(ty)))
        .collect()
}

fn chain_relations(s: &ArgStructure, c: &Chain, typed: bool) -> Vec<SpanRel> {
    c.relations()
        .map(|(h, t)| {
            let ty = s
                .ars
                .iter()
                .find(|r| r.head == h && r.tail == t)
                .map(|r| r.ar_type.clone());
            (
                s.acs[h].span(),
                s.acs[t].span(),
                if typed { ty } else { None },
            )
        })
        .collect()
}

/// Gold, predicted and correctly detected chains per length. A gold chain is
/// correct when every one of its relations appears in the prediction with the
/// same head and tail spans (and the same type when `require_types`).
pub fn chain_report(
    gold: &[ArgStructure],
    pred: &[ArgStructure],
    require_types: bool,
) -> Result<ChainReport, EvalError> {
    let mut report = ChainReport {
        require_types,
        ..Default::default()
    };
    for (g, p) in align(gold, pred)? {
        let predicted = span_relations(p, require_types);
        for c in extract_chains(g) {
            let row = report.by_length.entry(c.len()).or_default();
            row.ground_truth += 1;
            if chain_relations(g, &c, require_types)
                .iter()
                .all(|r| predicted.contains(r))
            {
                row.correct += 1;
            }
        }
        for c in extract_chains(p) {
            report.by_length.entry(c.len()).or_default().predicted += 1;
        }
    }
    Ok(report)
}
