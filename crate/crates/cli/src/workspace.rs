//! Stage directories, dependency checks and per-directory manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Loaded;
use crate::error::{CliError, Result};

/// A pipeline stage. Each writes into the output directory named after its
/// subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    TrainTagger,
    ExtractFacts,
    TrainFactuality,
    Bootstrap,
    AnnotateMerge,
    TrainObjectivity,
    Score,
    Index,
    Search,
    Truncate,
    Rerank,
    Evaluate,
    Sweep,
    Analyze,
}

impl Stage {
    pub fn command(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::TrainTagger => "train-tagger",
            Stage::ExtractFacts => "extract-facts",
            Stage::TrainFactuality => "train-factuality",
            Stage::Bootstrap => "bootstrap",
            Stage::AnnotateMerge => "annotate-merge",
            Stage::TrainObjectivity => "train-objectivity",
            Stage::Score => "score",
            Stage::Index => "index",
            Stage::Search => "search",
            Stage::Truncate => "truncate",
            Stage::Rerank => "rerank",
            Stage::Evaluate => "evaluate",
            Stage::Sweep => "sweep",
            Stage::Analyze => "analyze",
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, P: Serialize> {
    command: &'a str,
    params: &'a P,
    inputs: &'a BTreeMap<String, InputRecord>,
    outputs: &'a BTreeMap<String, String>,
}

/// Collects the inputs a stage reads and the files it writes, then records
/// them in `manifest.json`. Artifact paths are recorded relative to the
/// output root so that manifests do not depend on where the root lives.
pub struct StageRun<'a> {
    pub ctx: &'a Loaded,
    stage: Stage,
    dir: PathBuf,
    inputs: BTreeMap<String, InputRecord>,
    outputs: BTreeMap<String, String>,
}

impl<'a> StageRun<'a> {
    pub fn new(ctx: &'a Loaded, stage: Stage) -> Result<StageRun<'a>> {
        let dir = ctx.out_dir().join(stage.command());
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(StageRun { ctx, stage, dir, inputs: BTreeMap::new(), outputs: BTreeMap::new() })
    }

    fn record(&mut self, key: String, path: String, bytes: &[u8]) {
        self.inputs.insert(key, InputRecord { path, sha256: sha256_hex(bytes) });
    }

    /// Reads a configured input file; `key` names the `paths` entry.
    pub fn config_input(&mut self, key: &str, path: Option<&Path>) -> Result<Vec<u8>> {
        let path = path.ok_or_else(|| CliError::Usage(format!("paths.{key} is not set in the config")))?;
        let full = self.ctx.resolve(path);
        let bytes = fs::read(&full).with_context(|| format!("reading {} ({})", full.display(), key))?;
        self.record(format!("paths.{key}"), path.display().to_string(), &bytes);
        Ok(bytes)
    }

    pub fn config_text(&mut self, key: &str, path: Option<&Path>) -> Result<String> {
        let bytes = self.config_input(key, path)?;
        String::from_utf8(bytes).map_err(|e| CliError::Data(anyhow::anyhow!("paths.{key} is not UTF-8: {e}")))
    }

    pub fn artifact_path(&self, stage: Stage, file: &str) -> Result<PathBuf> {
        let path = self.ctx.out_dir().join(stage.command()).join(file);
        if path.is_file() {
            Ok(path)
        } else {
            Err(CliError::Dependency { command: stage.command(), path })
        }
    }

    /// Reads the output of an earlier stage, failing with a dependency
    /// error when it has not been produced.
    pub fn artifact(&mut self, stage: Stage, file: &str) -> Result<Vec<u8>> {
        let path = self.artifact_path(stage, file)?;
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let rel = format!("{}/{file}", stage.command());
        self.record(rel.clone(), rel, &bytes);
        Ok(bytes)
    }

    pub fn artifact_text(&mut self, stage: Stage, file: &str) -> Result<String> {
        let bytes = self.artifact(stage, file)?;
        String::from_utf8(bytes).map_err(|e| CliError::Data(anyhow::anyhow!("{file} is not UTF-8: {e}")))
    }

    /// Files with the given extension already written by an earlier stage,
    /// sorted by name. A missing directory yields nothing.
    pub fn optional_artifacts(&self, stage: Stage, extension: &str) -> Result<Vec<String>> {
        let dir = self.ctx.out_dir().join(stage.command());
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut names = Vec::new();
        for entry in fs::read_dir(&dir).with_context(|| format!("listing {}", dir.display()))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == extension) {
                if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                    names.push(name.to_string());
                }
            }
        }
        names.sort();
        Ok(names)
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let bytes = bytes.as_ref();
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).context("serializing JSON")?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn finish<P: Serialize>(self, params: &P) -> Result<()> {
        let manifest = Manifest {
            command: self.stage.command(),
            params,
            inputs: &self.inputs,
            outputs: &self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest).context("serializing manifest")?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        log::info!("{}: wrote {} files to {}", self.stage.command(), self.outputs.len(), self.dir.display());
        Ok(())
    }
}
