//! Versioned JSON model files with base64 little-endian tensors.

use std::collections::BTreeMap;
use std::io::{BufWriter, Write};
use std::path::Path;

use argseq_core::Schema;
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::config::{ModelConfig, Vocab};
use crate::model::NeuralModel;
use crate::scalar::Scalar;
use crate::NeuralError;

pub const FORMAT_NAME: &str = "argseq-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tensor {
    shape: [usize; 2],
    data: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    dtype: String,
    config: ModelConfig,
    vocab: Vec<String>,
    schema: Schema,
    tensors: BTreeMap<String, Tensor>,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    dtype: String,
}

fn io_err(path: &Path, source: std::io::Error) -> NeuralError {
    NeuralError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn save_model<T: Scalar>(model: &NeuralModel<T>, path: &Path) -> Result<(), NeuralError> {
    let mut tensors = BTreeMap::new();
    for (name, slot) in model.layout().slots() {
        let mut bytes = Vec::with_capacity(slot.len() * T::BYTES);
        for &v in slot.of(model.params()) {
            v.write_le(&mut bytes);
        }
        tensors.insert(
            name.to_string(),
            Tensor {
                shape: [slot.rows, slot.cols],
                data: STANDARD.encode(&bytes),
            },
        );
    }
    let file = ModelFile {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
        dtype: T::DTYPE.into(),
        config: model.config.clone(),
        vocab: model.vocab.tokens().to_vec(),
        schema: model.schema.clone(),
        tensors,
    };
    let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer(&mut w, &file).map_err(|e| NeuralError::Format(e.to_string()))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<NeuralModel<T>, NeuralError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let bad = |m: String| NeuralError::Format(format!("{}: {m}", path.display()));
    let header: Header =
        serde_json::from_str(&text).map_err(|e| bad(format!("truncated or malformed: {e}")))?;
    if header.format != FORMAT_NAME {
        return Err(bad(format!(
            "not a model file (format `{}`)",
            header.format
        )));
    }
    if header.version != FORMAT_VERSION {
        return Err(NeuralError::Version {
            found: header.version,
            expected: FORMAT_VERSION,
        });
    }
    if header.dtype != T::DTYPE {
        return Err(NeuralError::Dtype {
            found: header.dtype,
            expected: T::DTYPE.into(),
        });
    }
    let mut file: ModelFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let vocab = Vocab::from_tokens(file.vocab)?;
    let mut model = NeuralModel::<T>::zeros(file.config, vocab, file.schema)?;
    let layout = model.layout().clone();
    for (name, slot) in layout.slots() {
        let t = file
            .tensors
            .remove(name)
            .ok_or_else(|| bad(format!("missing tensor `{name}`")))?;
        if t.shape != [slot.rows, slot.cols] {
            return Err(bad(format!(
                "tensor `{name}` has shape {:?}, expected [{}, {}]",
                t.shape, slot.rows, slot.cols
            )));
        }
        let bytes = STANDARD
            .decode(t.data.as_bytes())
            .map_err(|e| bad(format!("tensor `{name}`: {e}")))?;
        if bytes.len() != slot.len() * T::BYTES {
            return Err(bad(format!(
                "tensor `{name}` holds {} bytes, expected {}",
                bytes.len(),
                slot.len() * T::BYTES
            )));
        }
        let dst = slot.of_mut(model.params_mut());
        for (v, chunk) in dst.iter_mut().zip(bytes.chunks_exact(T::BYTES)) {
            *v = T::read_le(chunk);
        }
    }
    if let Some(extra) = file.tensors.keys().next() {
        return Err(bad(format!("unexpected tensor `{extra}`")));
    }
    if !model.all_finite() {
        return Err(bad("non-finite parameter".into()));
    }
    Ok(model)
}
