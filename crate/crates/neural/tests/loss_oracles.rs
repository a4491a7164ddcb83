//! The teacher-forced loss checked against a second implementation that
//! drives the scoring session along the gold sequence.

mod common;

use argseq_core::actions::{Candidate, DecoderState};
use argseq_core::{
    linearize, ActionSequence, ActionStep, LinearizeMode, Scorer, ScoringSession, StructureMode,
};
use argseq_neural::{Model64, ModelConfig, NeuralError, Vocab};
use common::{corpus, model, small_config};

fn gold_index(space: &argseq_core::ActionSpace, c: &[Candidate], step: &ActionStep) -> usize {
    c.iter()
        .position(|cand| {
            let links: &[argseq_core::actions::LinkChoice] = &[];
            match (cand, step) {
                (Candidate::Close { .. }, ActionStep::Close { links: gl, .. })
                    if space.mode == LinearizeMode::MultiLink =>
                {
                    let mut s = space.to_step(cand, links);
                    if let ActionStep::Close { links, .. } = &mut s {
                        links.clone_from(gl);
                    }
                    s == *step
                }
                _ => space.to_step(cand, links) == *step,
            }
        })
        .expect("gold is legal")
}

/// Negative log-likelihood from session scores; also checks that the
/// softmax at each step sums to one.
fn session_nll(m: &Model64, s: &argseq_core::ArgStructure, seq: &ActionSequence) -> f64 {
    let space = m.space();
    let mut sess = m.session(&s.paragraph, &space).unwrap();
    let mut st = DecoderState::new(s.paragraph.tokens.len());
    let mut nll = 0.0;
    for step in &seq.steps {
        let c = space.legal_actions(&st).unwrap();
        if c.len() > 1 {
            let scores = sess.score_joint(&st, &c).unwrap();
            let z: f64 = scores.iter().map(|v| v.exp()).sum();
            let probs: Vec<f64> = scores.iter().map(|v| v.exp() / z).collect();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            nll -= probs[gold_index(&space, &c, step)].ln();
        }
        if let (
            ActionStep::Close {
                boundary,
                ac_type,
                links,
            },
            LinearizeMode::MultiLink,
        ) = (step, space.mode)
        {
            let lc = space.link_candidates(&st);
            if !lc.is_empty() {
                let t = space.schema.ac_index(ac_type).unwrap();
                let ls = sess.score_links(&st, *boundary, t, &lc).unwrap();
                for (cand, score) in lc.iter().zip(&ls.scores) {
                    let p = 1.0 / (1.0 + (-(score - ls.null)).exp());
                    let positive = links.contains(&space.to_link(cand));
                    nll -= if positive { p.ln() } else { (1.0 - p).ln() };
                }
            }
        }
        sess.observe(&st, step).unwrap();
        space.apply(&mut st, step).unwrap();
    }
    nll
}

#[test]
fn loss_matches_session_oracle() {
    for (mode, lin) in [
        (StructureMode::Tree, LinearizeMode::MultiLink),
        (StructureMode::Tree, LinearizeMode::SingleLink),
        (StructureMode::Graph, LinearizeMode::MultiLink),
        (StructureMode::Graph, LinearizeMode::SingleLink),
    ] {
        let (schema, data) = corpus(21, 12, mode);
        let m: Model64 = model(small_config(5, lin), &schema, &data);
        for s in &data {
            let seq = linearize(s, lin).unwrap().sequence;
            let a = m.nll_loss(&s.paragraph, &seq).unwrap();
            let b = session_nll(&m, s, &seq);
            assert!(a >= 0.0 && a.is_finite());
            assert!(
                (a - b).abs() < 1e-10,
                "{mode:?} {lin:?} {}: {a} vs {b}",
                s.id()
            );
        }
    }
}

/// With every parameter zero, each step with k candidates costs log k and
/// each multi-link decision log 2.
#[test]
fn uniform_scores_cost_log_k() {
    let (schema, data) = corpus(3, 10, StructureMode::Graph);
    for lin in [LinearizeMode::MultiLink, LinearizeMode::SingleLink] {
        let cfg = ModelConfig {
            mode: lin,
            ..small_config(0, lin)
        };
        let m = Model64::zeros(cfg, Vocab::build(&data, 1), schema.clone()).unwrap();
        for s in &data {
            let ex = m.example(s).unwrap();
            let expected: f64 = ex
                .steps
                .iter()
                .map(|st| (st.candidates.len() as f64).ln() + st.links.len() as f64 * 2f64.ln())
                .sum();
            let got = m.loss(&ex).loss;
            assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
        }
    }
}

/// Output-bias gradient of the structural head on the zero model:
/// sum over scored steps of (softmax mass of the class minus its gold
/// indicator).
#[test]
fn structural_bias_gradient_closed_form() {
    let (schema, data) = corpus(8, 6, StructureMode::Tree);
    let m = Model64::zeros(
        small_config(0, LinearizeMode::MultiLink),
        Vocab::build(&data, 1),
        schema,
    )
    .unwrap();
    for s in &data {
        let ex = m.example(s).unwrap();
        let mut expected = [0.0f64; 3];
        for st in ex.steps.iter().filter(|st| st.candidates.len() > 1) {
            let k = st.candidates.len() as f64;
            for (i, c) in st.candidates.iter().enumerate() {
                let class = match c {
                    Candidate::Copy => 0,
                    Candidate::Open => 1,
                    Candidate::Close { .. } => 2,
                };
                expected[class] += 1.0 / k - if i == st.gold { 1.0 } else { 0.0 };
            }
        }
        let (_, g) = m.loss_and_grad(&ex);
        let slot = m.layout().ffn1_b2;
        for k in 0..3 {
            assert!((slot.of(&g)[k] - expected[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn illegal_gold_is_a_hard_error() {
    let (schema, data) = corpus(8, 1, StructureMode::Tree);
    let m: Model64 = model(small_config(0, LinearizeMode::MultiLink), &schema, &data);
    let bad = ActionSequence {
        paragraph_id: data[0].id().into(),
        steps: vec![ActionStep::Close {
            boundary: 0,
            ac_type: "Claim".into(),
            links: vec![],
        }],
    };
    assert!(matches!(
        m.nll_loss(&data[0].paragraph, &bad),
        Err(NeuralError::Gold { step: 0, .. })
    ));
    let short = ActionSequence {
        paragraph_id: data[0].id().into(),
        steps: vec![ActionStep::Copy],
    };
    assert!(m.nll_loss(&data[0].paragraph, &short).is_err());
}
