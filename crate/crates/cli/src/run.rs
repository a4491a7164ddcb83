//! Output directories: every run writes its resolved config and a manifest
//! of the files it read and wrote.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use argseq_core::corpus::sidecar_path;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_sha256: String,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a BTreeMap<String, String>,
}

pub struct RunDir {
    dir: PathBuf,
    command: &'static str,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = BufReader::new(f);
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = r.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(format!("{:x}", h.finalize()))
}

impl RunDir {
    pub fn create(dir: &Path, command: &'static str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            command,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Records an input file (and the sidecar of a canonical corpus, when
    /// present) with its hash.
    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        if !path.exists() {
            return Err(CliError::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
            ));
        }
        if path.is_file() {
            self.inputs
                .insert(path.display().to_string(), sha256_file(path)?);
            let side = sidecar_path(path);
            if side.is_file() {
                self.inputs
                    .insert(side.display().to_string(), sha256_file(&side)?);
            }
        }
        Ok(())
    }

    /// Records a directory under one hash over its sorted relative paths
    /// and file hashes.
    pub fn input_dir(&mut self, dir: &Path) -> Result<(), CliError> {
        let mut files = Vec::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in std::fs::read_dir(&d).map_err(|e| CliError::io(&d, e))? {
                let p = e.map_err(|e| CliError::io(&d, e))?.path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push(p);
                }
            }
        }
        files.sort();
        let mut h = Sha256::new();
        for f in &files {
            let rel = f.strip_prefix(dir).unwrap_or(f);
            h.update(rel.to_string_lossy().as_bytes());
            h.update([0]);
            h.update(sha256_file(f)?.as_bytes());
            h.update(b"\n");
        }
        self.inputs
            .insert(format!("{}/", dir.display()), format!("{:x}", h.finalize()));
        Ok(())
    }

    /// Registers a file name inside the directory as an output.
    pub fn output(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.path(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let p = self.output(name);
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    }

    pub fn writer(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.output(name);
        File::create(&p)
            .map(BufWriter::new)
            .map_err(|e| CliError::io(&p, e))
    }

    /// Writes the config and the manifest; call once all outputs exist.
    pub fn finish(self, cfg: &RunConfig) -> Result<(), CliError> {
        let cfg_path = self.path(CONFIG_FILE);
        std::fs::write(&cfg_path, cfg.to_toml()).map_err(|e| CliError::io(&cfg_path, e))?;
        let mut outputs = BTreeMap::new();
        for name in &self.outputs {
            outputs.insert(name.clone(), sha256_file(&self.path(name))?);
        }
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config_sha256: sha256_file(&cfg_path)?,
            inputs: &self.inputs,
            outputs: &outputs,
        };
        let p = self.path(MANIFEST_FILE);
        let mut f = File::create(&p)
            .map(BufWriter::new)
            .map_err(|e| CliError::io(&p, e))?;
        serde_json::to_writer_pretty(&mut f, &m).expect("manifest serializes");
        writeln!(f)
            .and_then(|_| f.flush())
            .map_err(|e| CliError::io(&p, e))
    }
}
