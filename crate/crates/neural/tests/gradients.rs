mod common;

use argseq_core::{LinearizeMode, StructureMode};
use argseq_neural::{grad_check, GradCheckOptions, Model64, ModelConfig, Vocab};
use common::{corpus, model, small_config};

#[test]
fn small_models_in_every_mode() {
    for (mode, lin) in [
        (StructureMode::Tree, LinearizeMode::MultiLink),
        (StructureMode::Tree, LinearizeMode::SingleLink),
        (StructureMode::Graph, LinearizeMode::MultiLink),
        (StructureMode::Graph, LinearizeMode::SingleLink),
    ] {
        let (schema, data) = corpus(31, 4, mode);
        let m: Model64 = model(small_config(7, lin), &schema, &data);
        for (i, s) in data.iter().enumerate() {
            let r = grad_check(
                &m,
                &m.example(s).unwrap(),
                GradCheckOptions {
                    seed: i as u64,
                    ..Default::default()
                },
            );
            assert_eq!(r.checked, 200);
            assert!(r.max_rel_error < 1e-4, "{mode:?} {lin:?}: {r:?}");
        }
    }
}

#[test]
fn default_config() {
    let (schema, data) = corpus(32, 1, StructureMode::Tree);
    let m = Model64::new(ModelConfig::default(), Vocab::build(&data, 1), schema).unwrap();
    let r = grad_check(
        &m,
        &m.example(&data[0]).unwrap(),
        GradCheckOptions::default(),
    );
    assert!(r.checked >= 200);
    assert!(r.max_rel_error < 1e-4, "{r:?}");
}

#[test]
fn zero_model() {
    let (schema, data) = corpus(33, 1, StructureMode::Graph);
    let m = Model64::zeros(
        small_config(0, LinearizeMode::MultiLink),
        Vocab::build(&data, 1),
        schema,
    )
    .unwrap();
    let r = grad_check(
        &m,
        &m.example(&data[0]).unwrap(),
        GradCheckOptions::default(),
    );
    assert!(r.max_rel_error < 1e-6, "{r:?}");
}
