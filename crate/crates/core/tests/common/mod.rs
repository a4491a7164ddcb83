#![allow(dead_code)]

use argseq_core::structure::{AcSpan, ArgRelation, ArgStructure, Paragraph, Schema, StructureMode};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn paragraph(id: &str, n: usize) -> Paragraph {
    Paragraph::new(id, (0..n).map(|i| format!("w{i}")).collect()).unwrap()
}

/// Random canonical structure: disjoint spans of length 1..=4 in a paragraph
/// of `n` tokens, relations respecting the schema's mode.
pub fn random_structure<R: Rng>(rng: &mut R, id: &str, n: usize, schema: &Schema) -> ArgStructure {
    let mut acs = Vec::new();
    let mut t = 0;
    while t < n {
        if rng.gen_bool(0.35) {
            let len = rng.gen_range(1..=4).min(n - t);
            let ty = schema.ac_types().choose(rng).unwrap();
            acs.push(AcSpan::new(t, t + len - 1, ty.clone()));
            t += len;
        } else {
            t += 1;
        }
    }
    let k = acs.len();
    let mut ars = Vec::new();
    for head in 0..k {
        let mut tails: Vec<usize> = (0..k).filter(|&x| x != head).collect();
        tails.shuffle(rng);
        let max_out = match schema.structure_mode() {
            StructureMode::Tree => 1,
            StructureMode::Graph => 3,
        };
        for &tail in tails.iter().take(max_out) {
            if rng.gen_bool(0.4) {
                let ty = schema.ar_types().choose(rng).unwrap();
                ars.push(ArgRelation::new(head, tail, ty.clone()));
            }
        }
    }
    ars.sort_by_key(|r| (r.head, r.tail));
    ArgStructure::new(paragraph(id, n), acs, ars)
}

/// A prediction derived from `gold` by random edits: dropped, shifted,
/// retyped and invented spans, and perturbed relations.
pub fn perturb<R: Rng>(rng: &mut R, gold: &ArgStructure, schema: &Schema) -> ArgStructure {
    let n = gold.paragraph.len();
    let mut acs: Vec<AcSpan> = Vec::new();
    for a in &gold.acs {
        match rng.gen_range(0..6) {
            0 => continue,
            1 => {
                let s = a.start.saturating_sub(rng.gen_range(0..2));
                let e = (a.end + rng.gen_range(0..2)).min(n - 1);
                acs.push(AcSpan::new(s, e, a.ac_type.clone()));
            }
            2 => acs.push(AcSpan::new(
                a.start,
                a.end,
                schema.ac_types().choose(rng).unwrap().clone(),
            )),
            3 if a.end > a.start => {
                let m = rng.gen_range(a.start..a.end);
                acs.push(AcSpan::new(a.start, m, a.ac_type.clone()));
                acs.push(AcSpan::new(m + 1, a.end, a.ac_type.clone()));
            }
            _ => acs.push(a.clone()),
        }
    }
    if rng.gen_bool(0.3) {
        let s = rng.gen_range(0..n);
        let e = (s + rng.gen_range(0..5)).min(n - 1);
        acs.push(AcSpan::new(
            s,
            e,
            schema.ac_types().choose(rng).unwrap().clone(),
        ));
    }
    let k = acs.len();
    let mut ars = Vec::new();
    if k >= 2 {
        for _ in 0..gold.ars.len() + rng.gen_range(0..3) {
            let h = rng.gen_range(0..k);
            let t = rng.gen_range(0..k);
            if h != t {
                ars.push(ArgRelation::new(
                    h,
                    t,
                    schema.ar_types().choose(rng).unwrap().clone(),
                ));
            }
        }
    }
    // Reuse gold relations whose endpoints survived unchanged.
    for r in &gold.ars {
        let find = |a: &AcSpan| acs.iter().position(|b| b.span() == a.span());
        if let (Some(h), Some(t)) = (find(&gold.acs[r.head]), find(&gold.acs[r.tail])) {
            if h != t && rng.gen_bool(0.7) {
                ars.push(ArgRelation::new(h, t, r.ar_type.clone()));
            }
        }
    }
    ArgStructure::new(gold.paragraph.clone(), acs, ars)
}
