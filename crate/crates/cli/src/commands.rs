use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use argseq_core::actions::{delinearize_for_schema, render, Linearization};
use argseq_core::corpus::{
    corpus_stats, gen_synthetic_tallied, parse_aae, parse_cdcp, read_canonical, AaeOptions,
    CanonicalReader, CanonicalWriter, Corpus, CorpusEntry,
};
use argseq_core::decoder::decode_structure;
use argseq_core::eval::{
    category_breakdown, chain_report, distance_breakdown, error_report, length_breakdown,
    LengthBuckets,
};
use argseq_core::{
    canonicalize, eval_tasks, linearize, ActionSequence, ArgRelation, ArgStructure, DecodeLimits,
    Schema,
};
use argseq_neural::{
    decode_limits, grad_check, load_model, save_model, train_with, DevScores, EpochRecord,
    GradCheckOptions, GradCheckReport, Model, Model64, Vocab,
};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AnalysisKind, CorpusFormat, RunConfig};
use crate::error::CliError;
use crate::run::RunDir;

/// Paragraphs decoded per parallel chunk in `predict`.
const CHUNK: usize = 256;

type Outcome = Result<Option<CliError>, CliError>;

pub fn dispatch(name: &str, cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    match name {
        "gen-synthetic" => gen_synthetic(cfg, run),
        "convert" => convert(cfg, run),
        "linearize" => linearize_cmd(cfg, run),
        "delinearize" => delinearize_cmd(cfg, run),
        "train" => train(cfg, run),
        "predict" => predict(cfg, run),
        "eval" => eval(cfg, run),
        "analyze" => analyze(cfg, run),
        "gradcheck" => gradcheck(cfg, run),
        _ => unreachable!("unknown command {name}"),
    }
    .inspect(|_| log::info!("outputs in {}", run.path("").display()))
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str, flag: &str) -> Result<&'a Path, CliError> {
    p.as_deref().ok_or_else(|| CliError::missing(what, flag))
}

fn write_corpus(run: &mut RunDir, name: &str, corpus: &Corpus) -> Result<(), CliError> {
    let p = run.output(name);
    run.output(&sidecar_name(name));
    argseq_core::corpus::write_canonical(corpus, &p)?;
    Ok(())
}

fn sidecar_name(name: &str) -> String {
    argseq_core::corpus::sidecar_path(Path::new(name))
        .display()
        .to_string()
}

fn same_schema(a: &Schema, b: &Schema, what: &str) -> Result<(), CliError> {
    if a != b {
        return Err(CliError::Schema(format!(
            "{what}: schema `{}` ({}) does not match `{}` ({})",
            a.name(),
            a.structure_mode(),
            b.name(),
            b.structure_mode()
        )));
    }
    Ok(())
}

fn gen_synthetic(cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    let (corpus, stats) = gen_synthetic_tallied(&cfg.synth_config())?;
    write_corpus(run, "corpus.jsonl", &corpus)?;
    run.write_json("stats.json", &stats)?;
    println!(
        "{} paragraphs, {} components, {} relations",
        stats.paragraphs, stats.acs, stats.ars
    );
    Ok(None)
}

fn convert(cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    let dir = required(&cfg.paths.input, "corpus directory", "--input")?;
    let format = cfg
        .convert
        .format
        .ok_or_else(|| CliError::missing("corpus format", "--format"))?;
    if !dir.is_dir() {
        return Err(CliError::Usage(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    run.input_dir(dir)?;
    let (corpus, log) = match format {
        CorpusFormat::Aae => parse_aae(
            dir,
            &AaeOptions {
                skip_title: cfg.aae.skip_title,
                dev_fraction: cfg.aae.dev_fraction,
                seed: cfg.aae.split_seed,
            },
        )?,
        CorpusFormat::Cdcp => parse_cdcp(dir)?,
    };
    let stats = corpus_stats(&corpus);
    write_corpus(run, "corpus.jsonl", &corpus)?;
    run.write_json("stats.json", &stats)?;
    run.write_json("parse_log.json", &log)?;
    println!(
        "{} documents, {} paragraphs, {} components, {} relations",
        stats.documents, stats.paragraphs, stats.acs, stats.ars
    );
    if log.expanded_links > 0 || log.duplicate_links > 0 {
        println!(
            "{} relations added by expanding multi-source links, {} duplicates dropped",
            log.expanded_links, log.duplicate_links
        );
    }
    Ok(None)
}

/// One line of a trace file.
#[derive(Debug, Serialize, Deserialize)]
struct Trace {
    #[serde(flatten)]
    sequence: ActionSequence,
    /// Relations the linearization mode could not carry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    dropped: Vec<ArgRelation>,
}

#[derive(Debug, Default, Serialize)]
struct LinearizeSummary {
    mode: argseq_core::LinearizeMode,
    paragraphs: usize,
    steps: usize,
    relations: usize,
    dropped_relations: usize,
}

fn linearize_cmd(cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    let input = required(&cfg.paths.input, "canonical corpus", "--input")?;
    run.input(input)?;
    let reader = CanonicalReader::open(input)?;
    let mut out = run.writer("traces.jsonl")?;
    let mut rendered = if cfg.linearize.render {
        Some(run.writer("traces.txt")?)
    } else {
        None
    };
    let trace_path = run.path("traces.jsonl");
    let io = |e| CliError::io(&trace_path, e);
    let mut sum = LinearizeSummary {
        mode: cfg.model.mode,
        ..Default::default()
    };
    for e in reader {
        let s = canonicalize(&e?.structure).map_err(argseq_core::actions::LinearizeError::from)?;
        let Linearization { sequence, dropped } = linearize(&s, cfg.model.mode)?;
        sum.paragraphs += 1;
        sum.steps += sequence.len();
        sum.relations += s.ars.len();
        sum.dropped_relations += dropped.len();
        if let Some(w) = rendered.as_mut() {
            writeln!(w, "{}\t{}", s.id(), render(&sequence, &s.paragraph)).map_err(io)?;
        }
        serde_json::to_writer(&mut out, &Trace { sequence, dropped }).expect("trace serializes");
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)?;
    if let Some(mut w) = rendered {
        w.flush().map_err(io)?;
    }
    run.write_json("linearize.json", &sum)?;
    println!(
        "{} paragraphs, {} steps, {} relations dropped",
        sum.paragraphs, sum.steps, sum.dropped_relations
    );
    Ok(None)
}

#[derive(Debug, Serialize)]
struct RepairedParagraph {
    id: String,
    repairs: Vec<argseq_core::actions::Repair>,
}

#[derive(Debug, Default, Serialize)]
struct DelinearizeSummary {
    paragraphs: usize,
    /// Rebuilt structures identical to the corpus structure.
    identical: usize,
    repaired_paragraphs: usize,
    repairs: usize,
    by_paragraph: Vec<RepairedParagraph>,
}

fn delinearize_cmd(cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    let traces = required(&cfg.paths.input, "trace file", "--input")?;
    let corpus = required(&cfg.paths.corpus, "canonical corpus", "--corpus")?;
    run.input(traces)?;
    run.input(corpus)?;
    let reader = CanonicalReader::open(corpus)?;
    let schema = reader.schema().clone();
    let split_seed = reader.split_seed();
    let file = std::fs::File::open(traces).map_err(|e| CliError::io(traces, e))?;
    let mut lines = BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(t) if t.trim().is_empty()));

    let p = run.output("corpus.jsonl");
    run.output(&sidecar_name("corpus.jsonl"));
    let mut writer = CanonicalWriter::create(&p, &schema, split_seed)?;
    let mut sum = DelinearizeSummary::default();
    let bad = |line: usize, message: String| CliError::Trace {
        path: traces.to_path_buf(),
        line,
        message,
    };
    for e in reader {
        let e = e?;
        let (i, line) = lines
            .next()
            .ok_or_else(|| bad(0, format!("no trace for paragraph `{}`", e.structure.id())))?;
        let text = line.map_err(|err| CliError::io(traces, err))?;
        let t: Trace = serde_json::from_str(&text).map_err(|err| bad(i + 1, err.to_string()))?;
        if t.sequence.paragraph_id != e.structure.id() {
            return Err(bad(
                i + 1,
                format!(
                    "trace for `{}` where the corpus has `{}`; both files must list paragraphs in the same order",
                    t.sequence.paragraph_id,
                    e.structure.id()
                ),
            ));
        }
        let (s, log) = delinearize_for_schema(&t.sequence, &e.structure.paragraph, &schema);
        sum.paragraphs += 1;
        if canonicalize(&e.structure).is_ok_and(|g| g == s) {
            sum.identical += 1;
        }
        if !log.is_empty() {
            sum.repaired_paragraphs += 1;
            sum.repairs += log.len();
            sum.by_paragraph.push(RepairedParagraph {
                id: s.id().to_string(),
                repairs: log.repairs,
            });
        }
        writer.write(&CorpusEntry {
            structure: s,
            split: e.split,
        })?;
    }
    if let Some((i, _)) = lines.next() {
        return Err(bad(i + 1, "more traces than corpus paragraphs".into()));
    }
    writer.finish()?;
    run.write_json("repairs.json", &sum)?;
    println!(
        "{} paragraphs, {} identical to the corpus, {} repaired",
        sum.paragraphs, sum.identical, sum.repaired_paragraphs
    );
    Ok(None)
}

#[derive(Debug, Serialize)]
struct TrainSummary {
    train_paragraphs: usize,
    dev_paragraphs: usize,
    vocab: usize,
    parameters: usize,
    epochs_run: usize,
    best_epoch: Option<usize>,
    final_loss: f64,
    best_dev: Option<DevScores>,
    stopped_early: bool,
}

fn reached(cfg: &RunConfig, d: &DevScores) -> bool {
    let t = &cfg.train;
    let targets = [t.stop_aci, t.stop_acc, t.stop_ari, t.stop_arc];
    targets.iter().any(|&x| x > 0.0)
        && [d.aci, d.acc, d.ari, d.arc]
            .iter()
            .zip(targets)
            .all(|(&v, x)| v >= x)
}

fn train(cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    let train_path = required(&cfg.paths.train, "training corpus", "--train")?;
    run.input(train_path)?;
    let corpus = read_canonical(train_path)?;
    let train_set = corpus.split(cfg.train.train_split);
    if train_set.is_empty() {
        return Err(CliError::Usage(format!(
            "{} has no `{}` paragraphs",
            train_path.display(),
            cfg.train.train_split.name()
        )));
    }
    let dev_set = if cfg.train.dev_on_train {
        train_set.clone()
    } else if let Some(dev_path) = &cfg.paths.dev {
        run.input(dev_path)?;
        let dev = read_canonical(dev_path)?;
        same_schema(&dev.schema, &corpus.schema, "dev corpus")?;
        dev.split(cfg.train.dev_split)
    } else {
        corpus.split(cfg.train.dev_split)
    };

    let mut stopped_early = false;
    let outcome = train_with::<f32, _>(
        cfg.model.clone(),
        corpus.schema.clone(),
        &train_set,
        &dev_set,
        |r: &EpochRecord, _| {
            match &r.dev {
                Some(d) => log::info!(
                    "epoch {} loss {:.4} dev ACI {:.3} ACC {:.3} ARI {:.3} ARC {:.3}",
                    r.epoch,
                    r.loss,
                    d.aci,
                    d.acc,
                    d.ari,
                    d.arc
                ),
                None => log::info!("epoch {} loss {:.4}", r.epoch, r.loss),
            }
            let stop = r.dev.as_ref().is_some_and(|d| reached(cfg, d));
            stopped_early |= stop;
            !stop
        },
    )?;

    let model_path = run.output("model.json");
    save_model(&outcome.model, &model_path)?;
    let mut hist = run.writer("history.jsonl")?;
    let hist_path = run.path("history.jsonl");
    for r in &outcome.history {
        serde_json::to_writer(&mut hist, r).expect("history serializes");
        hist.write_all(b"\n")
            .map_err(|e| CliError::io(&hist_path, e))?;
    }
    hist.flush().map_err(|e| CliError::io(&hist_path, e))?;

    let best_dev = outcome
        .best_epoch
        .and_then(|b| outcome.history.iter().find(|r| r.epoch == b))
        .and_then(|r| r.dev);
    let sum = TrainSummary {
        train_paragraphs: train_set.len(),
        dev_paragraphs: dev_set.len(),
        vocab: outcome.model.vocab.len(),
        parameters: outcome.model.params().len(),
        epochs_run: outcome.history.len(),
        best_epoch: outcome.best_epoch,
        final_loss: outcome.history.last().map_or(f64::NAN, |r| r.loss),
        best_dev,
        stopped_early,
    };
    run.write_json("train.json", &sum)?;
    println!(
        "{} epochs, final loss {:.4}{}",
        sum.epochs_run,
        sum.final_loss,
        best_dev.map_or(String::new(), |d| format!(
            ", best dev AVG {:.4} at epoch {}",
            d.avg,
            sum.best_epoch.unwrap_or(0)
        ))
    );
    Ok(None)
}

#[derive(Debug, Default, Serialize)]
struct PredictSummary {
    paragraphs: usize,
    truncated: usize,
    repaired_paragraphs: usize,
    repairs: usize,
}

fn predict(cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    let model_path = required(&cfg.paths.model, "model file", "--model")?;
    let input = required(&cfg.paths.input, "canonical corpus", "--input")?;
    run.input(model_path)?;
    run.input(input)?;
    let model: Model = load_model(model_path)?;
    let mut reader = CanonicalReader::open(input)?;
    same_schema(
        reader.schema(),
        &model.schema,
        "input corpus against the model",
    )?;

    let p = run.output("pred.jsonl");
    run.output(&sidecar_name("pred.jsonl"));
    let mut writer = CanonicalWriter::create(&p, &model.schema, reader.split_seed())?;
    let space = model.space();
    let mode = model.schema.structure_mode();
    let limits = |n: usize| match cfg.decode.max_steps {
        Some(max_steps) => DecodeLimits { max_steps },
        None => decode_limits(mode, n),
    };
    let mut sum = PredictSummary::default();
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        for e in reader.by_ref() {
            let e = e?;
            if cfg.data.split.is_none_or(|s| s == e.split) {
                chunk.push(e);
                if chunk.len() == CHUNK {
                    break;
                }
            }
        }
        if chunk.is_empty() {
            break;
        }
        let decoded = chunk
            .par_iter()
            .map(|e| {
                let para = &e.structure.paragraph;
                decode_structure(&model, para, &space, limits(para.len()))
            })
            .collect::<Vec<_>>();
        for (e, d) in chunk.iter().zip(decoded) {
            let d = d?;
            sum.paragraphs += 1;
            sum.truncated += usize::from(d.truncated);
            if !d.repairs.is_empty() {
                sum.repaired_paragraphs += 1;
                sum.repairs += d.repairs.len();
            }
            writer.write(&CorpusEntry {
                structure: d.structure,
                split: e.split,
            })?;
        }
    }
    writer.finish()?;
    run.write_json("predict.json", &sum)?;
    println!(
        "{} paragraphs predicted, {} hit the step budget",
        sum.paragraphs, sum.truncated
    );
    Ok(None)
}

fn load_pair(
    cfg: &RunConfig,
    run: &mut RunDir,
) -> Result<(Vec<ArgStructure>, Vec<ArgStructure>), CliError> {
    let gold_path = required(&cfg.paths.gold, "gold corpus", "--gold")?;
    let pred_path = required(&cfg.paths.pred, "predicted corpus", "--pred")?;
    run.input(gold_path)?;
    run.input(pred_path)?;
    let gold = read_canonical(gold_path)?;
    let pred = read_canonical(pred_path)?;
    same_schema(&pred.schema, &gold.schema, "predictions against gold")?;
    let pick = |c: Corpus| -> Vec<ArgStructure> {
        c.entries
            .into_iter()
            .filter(|e| cfg.data.split.is_none_or(|s| s == e.split))
            .map(|e| e.structure)
            .collect()
    };
    Ok((pick(gold), pick(pred)))
}

fn eval(cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    let (gold, pred) = load_pair(cfg, run)?;
    let scores = eval_tasks(&gold, &pred)?;
    #[derive(Serialize)]
    struct Report<'a> {
        paragraphs: usize,
        split: Option<&'a str>,
        scores: argseq_core::TaskScores,
    }
    run.write_json(
        "scores.json",
        &Report {
            paragraphs: gold.len(),
            split: cfg.data.split.map(|s| s.name()),
            scores,
        },
    )?;
    let table = format!("{scores}\n");
    run.write_text("scores.txt", &table)?;
    print!("{table}");
    Ok(None)
}

fn csv_out(
    run: &mut RunDir,
    name: &str,
    header: &[&str],
    rows: Vec<Vec<String>>,
) -> Result<(), CliError> {
    let p = run.output(name);
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| CliError::io(&p, e))
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

fn counts_row(c: &argseq_core::eval::Counts) -> Vec<String> {
    vec![
        c.tp.to_string(),
        c.fp.to_string(),
        c.fn_.to_string(),
        f4(c.precision()),
        f4(c.recall()),
        f4(c.f1()),
    ]
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            + "\n"
    };
    let mut s = line(header.to_vec());
    for r in rows {
        s.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    s
}

fn analyze(cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    let kind = cfg
        .analysis
        .kind
        .ok_or_else(|| CliError::missing("analysis kind", "--kind"))?;
    let (gold, pred) = load_pair(cfg, run)?;
    let name = kind.name();
    let (header, rows, text): (Vec<&str>, Vec<Vec<String>>, String) = match kind {
        AnalysisKind::Chains => {
            let r = chain_report(&gold, &pred, cfg.analysis.require_types)?;
            run.write_json("chains.json", &r)?;
            let rows = r
                .by_length
                .iter()
                .map(|(len, row)| {
                    vec![
                        len.to_string(),
                        row.ground_truth.to_string(),
                        row.predicted.to_string(),
                        row.correct.to_string(),
                        row.accuracy().map_or(String::new(), f4),
                    ]
                })
                .collect();
            (
                vec!["length", "ground_truth", "predicted", "correct", "accuracy"],
                rows,
                r.to_table(),
            )
        }
        AnalysisKind::Errors => {
            let r = error_report(&gold, &pred)?;
            run.write_json("errors.json", &r)?;
            let rows = r
                .counts
                .rows()
                .into_iter()
                .map(|(l, n, p)| vec![l.to_string(), n.to_string(), format!("{p:.2}")])
                .collect();
            (vec!["category", "count", "percent"], rows, r.to_table())
        }
        AnalysisKind::Length => {
            let buckets = LengthBuckets::from_bounds(&cfg.analysis.length_buckets);
            let r = length_breakdown(&gold, &pred, &buckets)?;
            run.write_json("length.json", &r)?;
            let rows: Vec<Vec<String>> = r
                .iter()
                .map(|b| {
                    let mut row = vec![
                        b.min_acs.to_string(),
                        b.max_acs.map_or(String::new(), |m| m.to_string()),
                        b.paragraphs.to_string(),
                    ];
                    match &b.aci {
                        Some(c) => row.extend(counts_row(c)),
                        None => row.extend(std::iter::repeat_n(String::new(), 6)),
                    }
                    row
                })
                .collect();
            let header = vec![
                "min_acs",
                "max_acs",
                "paragraphs",
                "tp",
                "fp",
                "fn",
                "precision",
                "recall",
                "f1",
            ];
            let text = table(&header, &rows);
            (header, rows, text)
        }
        AnalysisKind::Distance => {
            let r = distance_breakdown(&gold, &pred)?;
            run.write_json("distance.json", &r)?;
            let rows: Vec<Vec<String>> = r
                .iter()
                .map(|(d, b)| {
                    vec![
                        d.to_string(),
                        b.tp_gold.to_string(),
                        b.tp_pred.to_string(),
                        b.fp.to_string(),
                        b.fn_.to_string(),
                        f4(b.precision()),
                        f4(b.recall()),
                        f4(b.f1()),
                    ]
                })
                .collect();
            let header = vec![
                "distance",
                "tp_gold",
                "tp_pred",
                "fp",
                "fn",
                "precision",
                "recall",
                "f1",
            ];
            let text = table(&header, &rows);
            (header, rows, text)
        }
        AnalysisKind::Categories => {
            let r = category_breakdown(&gold, &pred)?;
            run.write_json("categories.json", &r)?;
            let rows: Vec<Vec<String>> = r
                .iter()
                .map(|(label, c)| {
                    let mut row = vec![label.clone()];
                    row.extend(counts_row(c));
                    row
                })
                .collect();
            let header = vec!["label", "tp", "fp", "fn", "precision", "recall", "f1"];
            let text = table(&header, &rows);
            (header, rows, text)
        }
    };
    csv_out(run, &format!("{name}.csv"), &header, rows)?;
    run.write_text(&format!("{name}.txt"), &text)?;
    print!("{text}");
    Ok(None)
}

#[derive(Debug, Serialize)]
struct GradCheckExample {
    id: String,
    #[serde(flatten)]
    report: GradCheckReport,
}

#[derive(Debug, Serialize)]
struct GradCheckSummary {
    threshold: f64,
    max_rel_error: f64,
    passed: bool,
    parameters: usize,
    examples: Vec<GradCheckExample>,
}

fn gradcheck(cfg: &RunConfig, run: &mut RunDir) -> Outcome {
    let (schema, data): (Schema, Vec<ArgStructure>) = match &cfg.paths.input {
        Some(p) => {
            run.input(p)?;
            let c = read_canonical(p)?;
            let data = c
                .entries
                .into_iter()
                .filter(|e| cfg.data.split.is_none_or(|s| s == e.split))
                .map(|e| e.structure)
                .collect();
            (c.schema, data)
        }
        None => {
            let (c, _) = gen_synthetic_tallied(&cfg.synth_config())?;
            let data = c.structures().cloned().collect();
            (c.schema, data)
        }
    };
    if data.is_empty() {
        return Err(CliError::Usage("no paragraphs to check".into()));
    }
    let g = &cfg.gradcheck;
    let model = Model64::new(cfg.model.clone(), Vocab::build(&data, 1), schema)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut picks = sample(&mut rng, data.len(), g.examples.min(data.len())).into_vec();
    picks.sort_unstable();
    let mut examples = Vec::with_capacity(picks.len());
    for (i, &k) in picks.iter().enumerate() {
        let ex = model.example(&data[k])?;
        let opts = GradCheckOptions {
            epsilon: g.epsilon,
            samples: g.samples,
            seed: cfg.seed.wrapping_add(i as u64),
            floor: g.floor,
        };
        let report = grad_check(&model, &ex, opts);
        log::info!(
            "{}: max relative error {:.3e} over {} parameters",
            data[k].id(),
            report.max_rel_error,
            report.checked
        );
        examples.push(GradCheckExample {
            id: data[k].id().to_string(),
            report,
        });
    }
    let max = examples
        .iter()
        .map(|e| e.report.max_rel_error)
        .fold(0.0, f64::max);
    let passed = max < g.threshold;
    run.write_json(
        "gradcheck.json",
        &GradCheckSummary {
            threshold: g.threshold,
            max_rel_error: max,
            passed,
            parameters: model.params().len(),
            examples,
        },
    )?;
    println!(
        "{}: max relative error {max:.3e} (threshold {:.1e})",
        if passed { "pass" } else { "fail" },
        g.threshold
    );
    Ok((!passed).then_some(CliError::GradCheckFailed {
        max,
        threshold: g.threshold,
    }))
}
