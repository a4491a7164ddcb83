//! Run configuration: a TOML file, `--set key=value` overrides and explicit
//! flags, resolved in that order into one [`RunConfig`].

use std::path::{Path, PathBuf};

use argseq_core::corpus::Split;
use argseq_core::StructureMode;
use argseq_neural::ModelConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// The run seed. `model.seed` always equals it.
    pub seed: u64,
    pub model: ModelConfig,
    pub decode: DecodeSection,
    pub train: TrainSection,
    pub synthetic: SynthSection,
    pub data: DataSection,
    pub convert: ConvertSection,
    pub linearize: LinearizeSection,
    pub aae: AaeSection,
    pub gradcheck: GradCheckSection,
    pub analysis: AnalysisSection,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        let model = ModelConfig::default();
        RunConfig {
            seed: model.seed,
            model,
            decode: DecodeSection::default(),
            train: TrainSection::default(),
            synthetic: SynthSection::default(),
            data: DataSection::default(),
            convert: ConvertSection::default(),
            linearize: LinearizeSection::default(),
            aae: AaeSection::default(),
            gradcheck: GradCheckSection::default(),
            analysis: AnalysisSection::default(),
            paths: Paths::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeSection {
    /// Fixed step budget; unset scales the budget with paragraph length.
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub train_split: Split,
    pub dev_split: Split,
    /// Use the training paragraphs as the dev set.
    pub dev_on_train: bool,
    /// Stop once every dev F1 reaches its target. All zero never stops early.
    pub stop_aci: f64,
    pub stop_acc: f64,
    pub stop_ari: f64,
    pub stop_arc: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            train_split: Split::Train,
            dev_split: Split::Dev,
            dev_on_train: false,
            stop_aci: 0.0,
            stop_acc: 0.0,
            stop_ari: 0.0,
            stop_arc: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub paragraphs: usize,
    pub tokens_min: usize,
    pub tokens_max: usize,
    pub ac_density: f64,
    pub structure: StructureMode,
    pub relation_prob: f64,
    pub dev_fraction: f64,
    pub test_fraction: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            paragraphs: 100,
            tokens_min: 8,
            tokens_max: 30,
            ac_density: 0.12,
            structure: StructureMode::Tree,
            relation_prob: 0.7,
            dev_fraction: 0.0,
            test_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Restricts predict, eval, analyze and gradcheck to one split.
    pub split: Option<Split>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Aae,
    Cdcp,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvertSection {
    pub format: Option<CorpusFormat>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearizeSection {
    /// Also write the inline-marker rendering of every trace.
    pub render: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AaeSection {
    pub skip_title: bool,
    pub dev_fraction: f64,
    pub split_seed: u64,
}

impl Default for AaeSection {
    fn default() -> Self {
        let o = argseq_core::corpus::AaeOptions::default();
        AaeSection {
            skip_title: o.skip_title,
            dev_fraction: o.dev_fraction,
            split_seed: o.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradCheckSection {
    pub examples: usize,
    pub samples: usize,
    pub epsilon: f64,
    pub floor: f64,
    pub threshold: f64,
}

impl Default for GradCheckSection {
    fn default() -> Self {
        let o = argseq_neural::GradCheckOptions::default();
        GradCheckSection {
            examples: 5,
            samples: o.samples,
            epsilon: o.epsilon,
            floor: o.floor,
            threshold: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub kind: Option<AnalysisKind>,
    /// Inclusive upper bounds of the component-count buckets.
    pub length_buckets: Vec<usize>,
    /// Chains count as correct only with matching relation types.
    pub require_types: bool,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            kind: None,
            length_buckets: vec![2, 4, 6, 8],
            require_types: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisKind {
    Chains,
    Errors,
    Length,
    Distance,
    Categories,
}

impl AnalysisKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::Chains => "chains",
            AnalysisKind::Errors => "errors",
            AnalysisKind::Length => "length",
            AnalysisKind::Distance => "distance",
            AnalysisKind::Categories => "categories",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub pred: Option<PathBuf>,
}

/// Sets `key` (dotted path) in `root` to `raw`, parsed as a TOML value when
/// possible and as a bare string otherwise.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set `{assignment}`: expected KEY=VALUE")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("--set `{assignment}`: empty key")));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed a single key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set `{key}`: `{part}` is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Reads the optional config file and applies the overrides. Explicit flags
/// are applied by the caller afterwards.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            text.parse::<toml::Table>()
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let model_seed = table
        .get("model")
        .and_then(|m| m.get("seed"))
        .and_then(|s| s.as_integer());
    let mut cfg: RunConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    if let Some(s) = model_seed {
        if table_seed_differs(s, cfg.seed) {
            return Err(CliError::Config(format!(
                "model.seed = {s} differs from seed = {}; set the top-level `seed` only",
                cfg.seed
            )));
        }
    }
    cfg.model.seed = cfg.seed;
    Ok(cfg)
}

fn table_seed_differs(model_seed: i64, seed: u64) -> bool {
    u64::try_from(model_seed).ok() != Some(seed)
}

impl RunConfig {
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.model.seed = seed;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model.validate()?;
        let s = &self.synthetic;
        if s.tokens_min > s.tokens_max {
            return Err(CliError::Config(format!(
                "synthetic.tokens_min {} exceeds tokens_max {}",
                s.tokens_min, s.tokens_max
            )));
        }
        if self.decode.max_steps == Some(0) {
            return Err(CliError::Config("decode.max_steps must be positive".into()));
        }
        if self.gradcheck.threshold.is_nan()
            || self.gradcheck.threshold <= 0.0
            || self.gradcheck.examples == 0
        {
            return Err(CliError::Config(
                "gradcheck.threshold and gradcheck.examples must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn synth_config(&self) -> argseq_core::corpus::SynthConfig {
        let s = &self.synthetic;
        let mut c = argseq_core::corpus::SynthConfig::new(self.seed, s.paragraphs, s.structure);
        c.tokens_range = (s.tokens_min, s.tokens_max);
        c.ac_density = s.ac_density;
        c.relation_prob = s.relation_prob;
        c.dev_fraction = s.dev_fraction;
        c.test_fraction = s.test_fraction;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn overrides_parse_values() {
        let cfg = load(
            None,
            &[
                "model.ffn_hidden=150".into(),
                "seed=9".into(),
                "model.mode=single_link".into(),
                "paths.model=out/m.json".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.model.ffn_hidden, 150);
        assert_eq!((cfg.seed, cfg.model.seed), (9, 9));
        assert_eq!(cfg.model.mode, argseq_core::LinearizeMode::SingleLink);
        assert_eq!(cfg.paths.model, Some(PathBuf::from("out/m.json")));
    }

    #[test]
    fn unknown_keys_and_seed_conflicts_rejected() {
        assert!(load(None, &["model.hidden=3".into()]).is_err());
        assert!(load(None, &["nonsense=1".into()]).is_err());
        assert!(load(None, &["model.seed=4".into()]).is_err());
        assert!(load(None, &["model.seed=4".into(), "seed=4".into()]).is_ok());
        assert!(load(None, &["model".into()]).is_err());
    }
}
