use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("{path}:{line}: {message}")]
    Trace {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("gradient check failed: max relative error {max:.3e} is not below {threshold:.1e}")]
    GradCheckFailed { max: f64, threshold: f64 },
    #[error(transparent)]
    Corpus(#[from] argseq_core::corpus::CorpusError),
    #[error(transparent)]
    Neural(#[from] argseq_neural::NeuralError),
    #[error(transparent)]
    Eval(#[from] argseq_core::eval::EvalError),
    #[error(transparent)]
    Linearize(#[from] argseq_core::actions::LinearizeError),
    #[error(transparent)]
    Decode(#[from] argseq_core::decoder::DecodeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn missing(what: &str, flag: &str) -> Self {
        CliError::Usage(format!(
            "no {what} given; pass {flag} or set it in the config"
        ))
    }
}
