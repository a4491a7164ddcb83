use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &[&str] = &[
    "--set",
    "model.embed_dim=8",
    "--set",
    "model.context_dim=12",
    "--set",
    "model.ffn1_hidden=10",
    "--set",
    "model.ffn_hidden=16",
];

fn argseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_argseq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = argseq(args);
    assert!(
        out.status.success(),
        "argseq {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = argseq(args);
    assert!(
        !out.status.success(),
        "argseq {args:?} unexpectedly succeeded"
    );
    assert_eq!(out.status.code(), Some(1));
    String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec![
        "gen-synthetic",
        "--paragraphs",
        "12",
        "--density",
        "0.2",
        "--out-dir",
        s(&out),
    ];
    args.extend_from_slice(extra);
    ok(&args);
    out.join("corpus.jsonl")
}

fn train_small(corpus: &Path, out: &Path, epochs: &str, extra: &[&str]) {
    let mut args = vec![
        "train",
        "--train",
        s(corpus),
        "--epochs",
        epochs,
        "--out-dir",
        s(out),
    ];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn pipeline_writes_every_artifact() {
    let t = tempfile::tempdir().unwrap();
    let corpus = gen(t.path(), "gen", &[]);
    let gen_dir = t.path().join("gen");
    for f in [
        "corpus.jsonl",
        "corpus.schema.json",
        "stats.json",
        "config.toml",
        "manifest.json",
    ] {
        assert!(gen_dir.join(f).is_file(), "{f}");
    }
    assert_eq!(json(&gen_dir.join("stats.json"))["paragraphs"], 12);

    let train_dir = t.path().join("train");
    train_small(&corpus, &train_dir, "2", &["--dev-on-train"]);
    let history = std::fs::read_to_string(train_dir.join("history.jsonl")).unwrap();
    assert_eq!(history.lines().count(), 2);
    assert!(json(&train_dir.join("train.json"))["best_epoch"].is_u64());

    let pred_dir = t.path().join("pred");
    let model = train_dir.join("model.json");
    ok(&[
        "predict",
        "--model",
        s(&model),
        "--input",
        s(&corpus),
        "--out-dir",
        s(&pred_dir),
    ]);
    let pred = pred_dir.join("pred.jsonl");
    assert_eq!(std::fs::read_to_string(&pred).unwrap().lines().count(), 12);

    let eval_dir = t.path().join("eval");
    let stdout = ok(&[
        "eval",
        "--gold",
        s(&corpus),
        "--pred",
        s(&pred),
        "--out-dir",
        s(&eval_dir),
    ]);
    assert!(stdout.contains("AVG"));
    let scores = json(&eval_dir.join("scores.json"));
    assert_eq!(scores["paragraphs"], 12);
    let avg = scores["scores"]["AVG"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&avg));

    let manifest = json(&eval_dir.join("manifest.json"));
    assert_eq!(manifest["command"], "eval");
    assert!(manifest["inputs"][s(&corpus)].is_string());
    assert!(manifest["outputs"]["scores.json"].is_string());

    for kind in ["chains", "errors", "length", "distance", "categories"] {
        let d = t.path().join(format!("an-{kind}"));
        ok(&[
            "analyze",
            "--kind",
            kind,
            "--gold",
            s(&corpus),
            "--pred",
            s(&pred),
            "--out-dir",
            s(&d),
        ]);
        for ext in ["json", "txt", "csv"] {
            assert!(d.join(format!("{kind}.{ext}")).is_file(), "{kind}.{ext}");
        }
    }
}

#[test]
fn gold_against_itself_is_perfect() {
    let t = tempfile::tempdir().unwrap();
    let corpus = gen(t.path(), "gen", &["--structure", "graph"]);
    let d = t.path().join("eval");
    ok(&[
        "eval",
        "--gold",
        s(&corpus),
        "--pred",
        s(&corpus),
        "--out-dir",
        s(&d),
    ]);
    let scores = json(&d.join("scores.json"))["scores"].clone();
    assert_eq!(scores["AVG"], 1.0);
    for task in ["ACI", "ACC", "ARI", "ARC"] {
        assert_eq!(scores[task]["fp"], 0);
        assert_eq!(scores[task]["fn"], 0);
    }

    let d = t.path().join("chains");
    ok(&[
        "analyze",
        "--kind",
        "chains",
        "--gold",
        s(&corpus),
        "--pred",
        s(&corpus),
        "--out-dir",
        s(&d),
    ]);
    let report = json(&d.join("chains.json"));
    for row in report["by_length"].as_object().unwrap().values() {
        assert_eq!(row["ground_truth"], row["predicted"]);
        assert_eq!(row["ground_truth"], row["correct"]);
    }
}

#[test]
fn replaying_the_resolved_config_reproduces_outputs() {
    let t = tempfile::tempdir().unwrap();
    let corpus = gen(t.path(), "gen", &[]);
    let a = t.path().join("a");
    train_small(
        &corpus,
        &a,
        "2",
        &["--seed", "7", "--lr", "0.01", "--dev-on-train"],
    );
    let b = t.path().join("b");
    ok(&[
        "train",
        "--config",
        s(&a.join("config.toml")),
        "--out-dir",
        s(&b),
    ]);
    for f in ["model.json", "history.jsonl", "train.json", "config.toml"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let (ma, mb) = (
        json(&a.join("manifest.json")),
        json(&b.join("manifest.json")),
    );
    assert_eq!(ma["outputs"], mb["outputs"]);

    // A different seed gives a different model.
    let c = t.path().join("c");
    ok(&[
        "train",
        "--config",
        s(&a.join("config.toml")),
        "--seed",
        "8",
        "--out-dir",
        s(&c),
    ]);
    assert_ne!(
        std::fs::read(a.join("model.json")).unwrap(),
        std::fs::read(c.join("model.json")).unwrap()
    );

    // The synthetic generator replays too.
    let g2 = t.path().join("gen2");
    ok(&[
        "gen-synthetic",
        "--config",
        s(&t.path().join("gen/config.toml")),
        "--out-dir",
        s(&g2),
    ]);
    assert_eq!(
        std::fs::read(&corpus).unwrap(),
        std::fs::read(g2.join("corpus.jsonl")).unwrap()
    );
}

#[test]
fn bad_configs_are_rejected() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("bad.toml");
    std::fs::write(&cfg, "[model]\nhidden_size = 3\n").unwrap();
    let err = fails(&[
        "gen-synthetic",
        "--config",
        s(&cfg),
        "--out-dir",
        s(&t.path().join("o")),
    ]);
    assert!(err.contains("unknown field `hidden_size`"), "{err}");

    let err = fails(&[
        "gen-synthetic",
        "--set",
        "synthetic.paragraps=3",
        "--out-dir",
        s(&t.path().join("o")),
    ]);
    assert!(err.contains("paragraps"), "{err}");

    let err = fails(&[
        "gen-synthetic",
        "--set",
        "model.seed=3",
        "--out-dir",
        s(&t.path().join("o")),
    ]);
    assert!(err.contains("seed"), "{err}");

    let err = fails(&[
        "gen-synthetic",
        "--set",
        "model.batch_size=0",
        "--out-dir",
        s(&t.path().join("o")),
    ]);
    assert!(err.contains("batch_size"), "{err}");

    // Usage errors come from the argument parser.
    let out = argseq(&["train", "--epochs", "many"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_inputs_and_mismatches_are_reported() {
    let t = tempfile::tempdir().unwrap();
    let o = t.path().join("o");
    let err = fails(&[
        "eval",
        "--gold",
        "nowhere.jsonl",
        "--pred",
        "nowhere.jsonl",
        "--out-dir",
        s(&o),
    ]);
    assert!(err.contains("nowhere.jsonl"), "{err}");
    let err = fails(&["predict", "--out-dir", s(&o)]);
    assert!(err.contains("--model"), "{err}");
    let err = fails(&["analyze", "--gold", "x", "--pred", "y", "--out-dir", s(&o)]);
    assert!(err.contains("--kind"), "{err}");

    let tree = gen(t.path(), "tree", &[]);
    let graph = gen(t.path(), "graph", &["--structure", "graph"]);
    let err = fails(&[
        "eval",
        "--gold",
        s(&tree),
        "--pred",
        s(&graph),
        "--out-dir",
        s(&o),
    ]);
    assert!(err.contains("schema mismatch"), "{err}");

    let m = t.path().join("m");
    train_small(&tree, &m, "1", &[]);
    let model = m.join("model.json");
    let err = fails(&[
        "predict",
        "--model",
        s(&model),
        "--input",
        s(&graph),
        "--out-dir",
        s(&o),
    ]);
    assert!(err.contains("schema mismatch"), "{err}");

    let mut v = json(&model);
    v["version"] = 99.into();
    let bumped = t.path().join("v99.json");
    std::fs::write(&bumped, serde_json::to_string(&v).unwrap()).unwrap();
    let err = fails(&[
        "predict",
        "--model",
        s(&bumped),
        "--input",
        s(&tree),
        "--out-dir",
        s(&o),
    ]);
    assert!(err.contains("version 99"), "{err}");
}

#[test]
fn traces_round_trip() {
    let t = tempfile::tempdir().unwrap();
    for structure in ["tree", "graph"] {
        let corpus = gen(t.path(), structure, &["--structure", structure]);
        let lin = t.path().join(format!("lin-{structure}"));
        ok(&[
            "linearize",
            "--input",
            s(&corpus),
            "--render",
            "--out-dir",
            s(&lin),
        ]);
        assert!(lin.join("traces.txt").is_file());
        let del = t.path().join(format!("del-{structure}"));
        let out = ok(&[
            "delinearize",
            "--input",
            s(&lin.join("traces.jsonl")),
            "--corpus",
            s(&corpus),
            "--out-dir",
            s(&del),
        ]);
        assert!(out.contains("12 identical"), "{out}");
        assert_eq!(
            std::fs::read(&corpus).unwrap(),
            std::fs::read(del.join("corpus.jsonl")).unwrap()
        );
        assert_eq!(json(&del.join("repairs.json"))["repairs"], 0);
    }

    // Single-link traces drop graph relations and say so.
    let graph = t.path().join("graph/corpus.jsonl");
    let lin = t.path().join("single");
    ok(&[
        "linearize",
        "--input",
        s(&graph),
        "--mode",
        "single-link",
        "--out-dir",
        s(&lin),
    ]);
    let sum = json(&lin.join("linearize.json"));
    assert_eq!(sum["mode"], "single_link");

    // Out-of-order traces are refused.
    let traces = std::fs::read_to_string(t.path().join("lin-tree/traces.jsonl")).unwrap();
    let mut lines: Vec<&str> = traces.lines().collect();
    lines.swap(0, 1);
    let shuffled = t.path().join("shuffled.jsonl");
    std::fs::write(&shuffled, lines.join("\n")).unwrap();
    let tree = t.path().join("tree/corpus.jsonl");
    let err = fails(&[
        "delinearize",
        "--input",
        s(&shuffled),
        "--corpus",
        s(&tree),
        "--out-dir",
        s(&t.path().join("o")),
    ]);
    assert!(err.contains("same order"), "{err}");
}

#[test]
fn gradcheck_reports_and_fails_on_a_tight_threshold() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path().join("gc");
    let mut args = vec![
        "gradcheck",
        "--examples",
        "2",
        "--samples",
        "40",
        "--out-dir",
        s(&d),
    ];
    args.extend_from_slice(SMALL);
    ok(&args);
    let r = json(&d.join("gradcheck.json"));
    assert_eq!(r["passed"], true);
    assert_eq!(r["examples"].as_array().unwrap().len(), 2);

    let d2 = t.path().join("gc2");
    let mut args = vec![
        "gradcheck",
        "--examples",
        "1",
        "--samples",
        "40",
        "--threshold",
        "1e-300",
        "--out-dir",
        s(&d2),
    ];
    args.extend_from_slice(SMALL);
    let err = fails(&args);
    assert!(err.contains("gradient check failed"), "{err}");
    assert_eq!(json(&d2.join("gradcheck.json"))["passed"], false);
    assert!(d2.join("manifest.json").is_file());
}

#[test]
fn converts_a_comment_corpus() {
    let t = tempfile::tempdir().unwrap();
    let src = t.path().join("cdcp");
    std::fs::create_dir(&src).unwrap();
    std::fs::write(
        src.join("00001.txt"),
        "Fees are too high. I paid twice. Lower them.",
    )
    .unwrap();
    std::fs::write(
        src.join("00001.ann.json"),
        r#"{"prop_offsets": [[0, 18], [19, 32], [33, 44]],
            "prop_labels": ["value", "testimony", "policy"],
            "reasons": [[[0, 1], 2]], "evidences": []}"#,
    )
    .unwrap();
    let d = t.path().join("out");
    let out = ok(&[
        "convert",
        "--format",
        "cdcp",
        "--input",
        s(&src),
        "--out-dir",
        s(&d),
    ]);
    assert!(out.contains("1 documents"), "{out}");
    assert_eq!(json(&d.join("stats.json"))["ars"], 2);
    assert_eq!(json(&d.join("parse_log.json"))["expanded_links"], 1);
    let manifest = json(&d.join("manifest.json"));
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 1);
}
