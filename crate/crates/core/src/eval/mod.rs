//! Exact-match micro-F1 for the four tasks, plus structural analyses.
//!
//! Task definitions, pooled over all paragraphs:
//!
//! * ACI: component spans `(start, end)`;
//! * ACC: spans with their type;
//! * ARI: directed relations as `(head span, tail span)`;
//! * ARC: ARI plus the relation type.

mod breakdown;
mod chains;
mod errors;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::structure::ArgStructure;

pub use breakdown::{
    category_breakdown, distance_breakdown, length_breakdown, relation_distance, DistanceBucket,
    LengthBucket, LengthBuckets,
};
pub use chains::{chain_report, extract_chains, Chain, ChainReport, ChainRow};
pub use errors::{
    classify_paragraph, error_report, ErrorCounts, ErrorReport, ParagraphErrors, SpanOutcome,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("prediction missing for gold paragraph `{0}`")]
    MissingPrediction(String),
    #[error("prediction `{0}` has no gold paragraph")]
    UnexpectedPrediction(String),
    #[error("paragraph id `{0}` occurs more than once")]
    DuplicateId(String),
}

/// True/false positive and false negative counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Counts {
    pub fn from_sets<T: Eq + std::hash::Hash>(gold: &HashSet<T>, pred: &HashSet<T>) -> Self {
        let tp = gold.intersection(pred).count();
        Counts {
            tp,
            fp: pred.len() - tp,
            fn_: gold.len() - tp,
        }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `2PR / (P + R)`, and 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Self {
        iter.fold(Counts::default(), |mut a, b| {
            a += b;
            a
        })
    }
}

impl Serialize for Counts {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Counts", 6)?;
        st.serialize_field("tp", &self.tp)?;
        st.serialize_field("fp", &self.fp)?;
        st.serialize_field("fn", &self.fn_)?;
        st.serialize_field("precision", &self.precision())?;
        st.serialize_field("recall", &self.recall())?;
        st.serialize_field("f1", &self.f1())?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Task {
    #[serde(rename = "ACI")]
    Aci,
    #[serde(rename = "ACC")]
    Acc,
    #[serde(rename = "ARI")]
    Ari,
    #[serde(rename = "ARC")]
    Arc,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Aci, Task::Acc, Task::Ari, Task::Arc];

    pub fn name(self) -> &'static str {
        match self {
            Task::Aci => "ACI",
            Task::Acc => "ACC",
            Task::Ari => "ARI",
            Task::Arc => "ARC",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TaskScores {
    pub aci: Counts,
    pub acc: Counts,
    pub ari: Counts,
    pub arc: Counts,
}

impl TaskScores {
    pub fn get(&self, task: Task) -> Counts {
        match task {
            Task::Aci => self.aci,
            Task::Acc => self.acc,
            Task::Ari => self.ari,
            Task::Arc => self.arc,
        }
    }

    /// Mean of the four F1 scores.
    pub fn avg(&self) -> f64 {
        Task::ALL.iter().map(|&t| self.get(t).f1()).sum::<f64>() / 4.0
    }
}

impl std::ops::AddAssign for TaskScores {
    fn add_assign(&mut self, o: TaskScores) {
        self.aci += o.aci;
        self.acc += o.acc;
        self.ari += o.ari;
        self.arc += o.arc;
    }
}

impl Serialize for TaskScores {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TaskScores", 5)?;
        st.serialize_field("ACI", &self.aci)?;
        st.serialize_field("ACC", &self.acc)?;
        st.serialize_field("ARI", &self.ari)?;
        st.serialize_field("ARC", &self.arc)?;
        st.serialize_field("AVG", &self.avg())?;
        st.end()
    }
}

impl fmt::Display for TaskScores {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<5} {:>6} {:>6} {:>6} {:>8} {:>8} {:>8}",
            "task", "tp", "fp", "fn", "P", "R", "F1"
        )?;
        for t in Task::ALL {
            let c = self.get(t);
            writeln!(
                f,
                "{:<5} {:>6} {:>6} {:>6} {:>8.4} {:>8.4} {:>8.4}",
                t.name(),
                c.tp,
                c.fp,
                c.fn_,
                c.precision(),
                c.recall(),
                c.f1()
            )?;
        }
        write!(f, "{:<5} {:>47.4}", "AVG", self.avg())
    }
}

type Span = (usize, usize);
type TypedPair = (Span, Span, String);

fn relation_keys(s: &ArgStructure) -> (HashSet<(Span, Span)>, HashSet<TypedPair>) {
    let mut ari = HashSet::new();
    let mut arc = HashSet::new();
    for (h, t, ty) in s.span_relations() {
        ari.insert((h, t));
        arc.insert((h, t, ty));
    }
    (ari, arc)
}

/// Counts for a single paragraph pair.
pub fn paragraph_scores(gold: &ArgStructure, pred: &ArgStructure) -> TaskScores {
    let spans = |s: &ArgStructure| s.acs.iter().map(|a| a.span()).collect::<HashSet<_>>();
    let typed = |s: &ArgStructure| {
        s.acs
            .iter()
            .map(|a| (a.start, a.end, a.ac_type.clone()))
            .collect::<HashSet<_>>()
    };
    let (g_ari, g_arc) = relation_keys(gold);
    let (p_ari, p_arc) = relation_keys(pred);
    TaskScores {
        aci: Counts::from_sets(&spans(gold), &spans(pred)),
        acc: Counts::from_sets(&typed(gold), &typed(pred)),
        ari: Counts::from_sets(&g_ari, &p_ari),
        arc: Counts::from_sets(&g_arc, &p_arc),
    }
}

/// Pairs each gold structure with the prediction of the same paragraph id,
/// in gold order.
pub fn align<'a>(
    gold: &'a [ArgStructure],
    pred: &'a [ArgStructure],
) -> Result<Vec<(&'a ArgStructure, &'a ArgStructure)>, EvalError> {
    let mut by_id: HashMap<&str, &ArgStructure> = HashMap::with_capacity(pred.len());
    for p in pred {
        if by_id.insert(p.id(), p).is_some() {
            return Err(EvalError::DuplicateId(p.id().to_string()));
        }
    }
    let mut seen = HashSet::with_capacity(gold.len());
    let mut out = Vec::with_capacity(gold.len());
    for g in gold {
        if !seen.insert(g.id()) {
            return Err(EvalError::DuplicateId(g.id().to_string()));
        }
        let p = by_id
            .get(g.id())
            .ok_or_else(|| EvalError::MissingPrediction(g.id().to_string()))?;
        out.push((g, *p));
    }
    if let Some(extra) = pred.iter().find(|p| !seen.contains(p.id())) {
        return Err(EvalError::UnexpectedPrediction(extra.id().to_string()));
    }
    Ok(out)
}

/// Micro-averaged counts for all four tasks.
pub fn eval_tasks(gold: &[ArgStructure], pred: &[ArgStructure]) -> Result<TaskScores, EvalError> {
    let mut total = TaskScores::default();
    for (g, p) in align(gold, pred)? {
        total += paragraph_scores(g, p);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{AcSpan, ArgRelation, Paragraph};

    fn s(id: &str, acs: Vec<AcSpan>, ars: Vec<ArgRelation>) -> ArgStructure {
        let p = Paragraph::new(id, (0..12).map(|i| format!("w{i}")).collect()).unwrap();
        ArgStructure::new(p, acs, ars)
    }

    #[test]
    fn perfect_prediction() {
        let g = s(
            "a",
            vec![AcSpan::new(0, 2, "Claim"), AcSpan::new(4, 6, "Premise")],
            vec![ArgRelation::new(1, 0, "supports")],
        );
        let r = eval_tasks(&[g.clone()], &[g]).unwrap();
        for t in Task::ALL {
            assert_eq!(r.get(t).f1(), 1.0);
        }
        assert_eq!(r.avg(), 1.0);
    }

    #[test]
    fn one_boundary_off() {
        let g = s(
            "a",
            vec![
                AcSpan::new(0, 2, "C"),
                AcSpan::new(4, 6, "C"),
                AcSpan::new(8, 9, "C"),
            ],
            vec![],
        );
        let p = s(
            "a",
            vec![
                AcSpan::new(0, 2, "C"),
                AcSpan::new(4, 5, "C"),
                AcSpan::new(8, 9, "C"),
            ],
            vec![],
        );
        let r = eval_tasks(&[g], &[p]).unwrap();
        assert_eq!(
            r.aci,
            Counts {
                tp: 2,
                fp: 1,
                fn_: 1
            }
        );
        assert!((r.aci.precision() - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.aci.recall() - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.aci.f1() - 0.667).abs() < 1e-3);
    }

    #[test]
    fn relation_type_only_matters_for_arc() {
        let acs = vec![AcSpan::new(0, 2, "Claim"), AcSpan::new(4, 6, "Premise")];
        let g = s("a", acs.clone(), vec![ArgRelation::new(0, 1, "Support")]);
        let p = s("a", acs, vec![ArgRelation::new(0, 1, "Attack")]);
        let r = eval_tasks(&[g], &[p]).unwrap();
        assert_eq!(r.ari.f1(), 1.0);
        assert_eq!(r.arc.f1(), 0.0);
    }

    #[test]
    fn direction_matters_for_ari() {
        let acs = vec![AcSpan::new(0, 2, "Claim"), AcSpan::new(4, 6, "Premise")];
        let g = s("a", acs.clone(), vec![ArgRelation::new(1, 0, "supports")]);
        let p = s("a", acs, vec![ArgRelation::new(0, 1, "supports")]);
        assert_eq!(eval_tasks(&[g], &[p]).unwrap().ari.tp, 0);
    }

    #[test]
    fn alignment_errors() {
        let a = s("a", vec![], vec![]);
        let b = s("b", vec![], vec![]);
        assert_eq!(
            eval_tasks(&[a.clone()], &[b.clone()]).unwrap_err(),
            EvalError::MissingPrediction("a".into())
        );
        assert_eq!(
            eval_tasks(&[a.clone()], &[a.clone(), b.clone()]).unwrap_err(),
            EvalError::UnexpectedPrediction("b".into())
        );
        assert_eq!(
            eval_tasks(&[a.clone(), a.clone()], &[a.clone()]).unwrap_err(),
            EvalError::DuplicateId("a".into())
        );
        // Order of predictions does not matter.
        assert!(eval_tasks(&[a.clone(), b.clone()], &[b, a]).is_ok());
    }

    #[test]
    fn zero_over_zero_is_zero() {
        let c = Counts::default();
        assert_eq!((c.precision(), c.recall(), c.f1()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn json_shape() {
        let v = serde_json::to_value(TaskScores::default()).unwrap();
        assert_eq!(v["ACI"]["fn"], 0);
        assert_eq!(v["AVG"], 0.0);
    }
}
