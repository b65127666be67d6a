//! Pipeline configuration: one TOML file, every key overridable with
//! `--set section.key=value`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub tagger: TaggerSection,
    pub facts: FactsSection,
    pub factuality: FactualitySection,
    pub bootstrap: BootstrapSection,
    pub patterns: PatternsSection,
    pub objectivity: ObjectivitySection,
    pub retrieval: RetrievalSection,
    pub truncate: TruncateSection,
    pub rerank: RerankSection,
    pub sweep: SweepSection,
    pub evaluate: EvaluateSection,
    pub analysis: AnalysisSection,
}

/// Input files and the output root. Relative paths are resolved against
/// the directory of the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub tagger_gold: Option<PathBuf>,
    pub labeled: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub spam: Option<PathBuf>,
    /// Precomputed signals used instead of the output of `score`.
    pub signals: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpus: None,
            queries: None,
            qrels: None,
            tagger_gold: None,
            labeled: None,
            lexicon: None,
            seeds: None,
            annotations: None,
            spam: None,
            signals: None,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaggerSection {
    pub epochs: usize,
    pub seed: u64,
    pub heldout_fraction: f64,
}

impl Default for TaggerSection {
    fn default() -> Self {
        TaggerSection { epochs: 5, seed: 13, heldout_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactsSection {
    pub min_pairs: usize,
}

impl Default for FactsSection {
    fn default() -> Self {
        FactsSection { min_pairs: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactualitySection {
    pub folds: usize,
    pub seed: u64,
    pub fraction: f64,
    pub l2: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for FactualitySection {
    fn default() -> Self {
        FactualitySection { folds: 5, seed: 42, fraction: 0.1, l2: 0.01, max_iters: 20_000, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSection {
    pub iterations: usize,
    pub per_iteration: usize,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        BootstrapSection { iterations: 400, per_iteration: 5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternsSection {
    pub min_freq: usize,
    pub min_prob: f64,
}

impl Default for PatternsSection {
    fn default() -> Self {
        PatternsSection { min_freq: 5, min_prob: 0.95 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectivitySection {
    pub folds: usize,
    pub seed: u64,
    pub l2: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for ObjectivitySection {
    fn default() -> Self {
        ObjectivitySection { folds: 5, seed: 42, l2: 0.01, max_iters: 20_000, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalSection {
    pub mu: f64,
    pub k_top: usize,
    pub tag: String,
    /// Pick μ per query fold by cross-validation instead of using `mu`.
    pub tune_mu: bool,
    pub mu_grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub target: String,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        RetrievalSection {
            mu: 2500.0,
            k_top: 1000,
            tag: "DIR".into(),
            tune_mu: false,
            mu_grid: factir_core::retrieval::MU_GRID.to_vec(),
            folds: 5,
            seed: 42,
            target: "map".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncateSection {
    pub depth: usize,
}

impl Default for TruncateSection {
    fn default() -> Self {
        TruncateSection { depth: 1000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RerankSection {
    pub signal: String,
    pub method: String,
    pub alpha: f64,
    pub w: f64,
    pub k: f64,
    pub epsilon_floor: f64,
    pub singular_epsilon: f64,
    pub missing: String,
}

impl Default for RerankSection {
    fn default() -> Self {
        RerankSection {
            signal: "factuality".into(),
            method: "linear".into(),
            alpha: 1.0,
            w: 0.0,
            k: 1.0,
            epsilon_floor: 1e-4,
            singular_epsilon: 1e-6,
            missing: "strict".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub signals: Vec<String>,
    pub methods: Vec<String>,
    /// Overrides the default grid of every method when set.
    pub grid: Option<Vec<f64>>,
    pub folds: usize,
    pub seed: u64,
    pub target: String,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            signals: vec!["factuality".into(), "objectivity".into()],
            methods: vec!["linear".into()],
            grid: None,
            folds: 5,
            seed: 42,
            target: "map".into(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub ndcg_depth: Option<usize>,
    pub exponential_gain: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub signals: Vec<String>,
    pub spam_rule: String,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection { signals: vec!["factuality".into(), "objectivity".into()], spam_rule: "gt70".into() }
    }
}

/// Parses an override value as a TOML value, falling back to a plain string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{assignment}` is not of the form key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Usage(format!("bad override key `{key}`")));
    }
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Usage(format!("override key `{key}` crosses a non-table value")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

/// A loaded configuration with the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: PipelineConfig,
    pub base: PathBuf,
}

impl Loaded {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Loaded, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { config, base })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.config.paths.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_typed_values() {
        let mut t: toml::Table = "[retrieval]\nmu = 2500.0\n".parse().unwrap();
        apply_override(&mut t, "retrieval.mu=100.0").unwrap();
        apply_override(&mut t, "retrieval.tag=QL").unwrap();
        apply_override(&mut t, "sweep.signals=[\"objectivity\"]").unwrap();
        apply_override(&mut t, "retrieval.tune_mu=true").unwrap();
        let c: PipelineConfig = toml::Value::Table(t).try_into().unwrap();
        assert_eq!(c.retrieval.mu, 100.0);
        assert_eq!(c.retrieval.tag, "QL");
        assert!(c.retrieval.tune_mu);
        assert_eq!(c.sweep.signals, ["objectivity"]);
    }

    #[test]
    fn bad_overrides() {
        let mut t = toml::Table::new();
        assert!(apply_override(&mut t, "novalue").is_err());
        assert!(apply_override(&mut t, "a..b=1").is_err());
        let mut t: toml::Table = "x = 1".parse().unwrap();
        assert!(apply_override(&mut t, "x.y=2").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let t: toml::Table = "[retrieval]\nmuu = 1.0\n".parse().unwrap();
        assert!(toml::Value::Table(t).try_into::<PipelineConfig>().is_err());
    }
}
