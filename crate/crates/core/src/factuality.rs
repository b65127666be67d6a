//! Document factuality classifier.
//!
//! Features are word count, fact count, factual density and binary
//! indicators for the relation phrases with the highest information gain
//! on the training labels. A logistic model over standardized features
//! gives `p(factuality)`, used as is, without calibration.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facts::DocFacts;
use crate::learn::{self, parse_num as parse, FitReport, LogisticModel, LogisticParams, ModelReader, Standardizer};

const HEADER: &str = "factir-factuality 1";
const DENSE: usize = 3;

/// What the classifier needs to know about one document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactSummary {
    pub word_count: usize,
    pub fact_count: usize,
    pub density: f64,
    pub relations: BTreeSet<String>,
}

impl From<&DocFacts> for FactSummary {
    fn from(d: &DocFacts) -> Self {
        FactSummary {
            word_count: d.stats.word_count,
            fact_count: d.stats.fact_count,
            density: d.stats.density,
            relations: d.relations.iter().cloned().collect(),
        }
    }
}

fn entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

/// `H(label) - H(label | feature)` in bits.
pub fn information_gain(feature: &[bool], labels: &[bool]) -> Result<f64> {
    if feature.len() != labels.len() {
        return Err(Error::invalid(format!(
            "feature has {} values but there are {} labels",
            feature.len(),
            labels.len()
        )));
    }
    if feature.is_empty() {
        return Err(Error::invalid("information gain needs at least one example"));
    }
    // counts[f][y]
    let mut counts = [[0.0f64; 2]; 2];
    for (&f, &y) in feature.iter().zip(labels) {
        counts[f as usize][y as usize] += 1.0;
    }
    let n = feature.len() as f64;
    let h_y = entropy(&[counts[0][0] + counts[1][0], counts[0][1] + counts[1][1]]);
    let h_y_given_f: f64 = counts
        .iter()
        .map(|row| (row[0] + row[1]) / n * entropy(row))
        .sum();
    Ok((h_y - h_y_given_f).max(0.0))
}

/// Keeps the top `ceil(fraction * |candidates|)` relations by information
/// gain, ties broken lexicographically.
pub fn select_features(docs: &[FactSummary], labels: &[bool], fraction: f64) -> Result<Vec<String>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!("fraction {fraction} outside (0, 1]")));
    }
    let candidates: BTreeSet<&String> = docs.iter().flat_map(|d| &d.relations).collect();
    if candidates.is_empty() {
        log::warn!("no candidate relations; selected vocabulary is empty");
        return Ok(Vec::new());
    }
    let mut scored = Vec::with_capacity(candidates.len());
    for rel in candidates {
        let presence: Vec<bool> = docs.iter().map(|d| d.relations.contains(rel)).collect();
        scored.push((information_gain(&presence, labels)?, rel));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let keep = (fraction * scored.len() as f64).ceil() as usize;
    Ok(scored.into_iter().take(keep).map(|(_, r)| r.clone()).collect())
}

/// Dense counts plus sparse indicator indices into a frozen vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub word_count: f64,
    pub fact_count: f64,
    pub density: f64,
    pub indicators: Vec<usize>,
    pub vocab_len: usize,
}

impl FeatureVector {
    pub fn build(summary: &FactSummary, vocabulary: &[String]) -> FeatureVector {
        let indicators = vocabulary
            .iter()
            .enumerate()
            .filter(|(_, r)| summary.relations.contains(*r))
            .map(|(i, _)| i)
            .collect();
        FeatureVector {
            word_count: summary.word_count as f64,
            fact_count: summary.fact_count as f64,
            density: summary.density,
            indicators,
            vocab_len: vocabulary.len(),
        }
    }

    fn dense_row(&self) -> Vec<f64> {
        let mut row = vec![0.0; DENSE + self.vocab_len];
        row[0] = self.word_count;
        row[1] = self.fact_count;
        row[2] = self.density;
        for &i in &self.indicators {
            row[DENSE + i] = 1.0;
        }
        row
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub folds: usize,
    pub seed: u64,
    pub fraction: f64,
    pub logistic: LogisticParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            folds: 5,
            seed: 42,
            fraction: 0.10,
            logistic: LogisticParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub folds: usize,
    pub seed: u64,
    pub fraction: f64,
    pub l2: f64,
    pub cv_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub fit: FitReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactualityModel {
    pub vocabulary: Vec<String>,
    pub standardizer: Standardizer,
    pub model: LogisticModel,
    pub meta: TrainingMeta,
}

fn fit_once(
    docs: &[&FactSummary],
    labels: &[bool],
    config: &TrainConfig,
) -> Result<(Vec<String>, Standardizer, LogisticModel, FitReport)> {
    let owned: Vec<FactSummary> = docs.iter().map(|d| (*d).clone()).collect();
    let vocabulary = select_features(&owned, labels, config.fraction)?;
    let rows: Vec<Vec<f64>> = owned
        .iter()
        .map(|d| FeatureVector::build(d, &vocabulary).dense_row())
        .collect();
    let standardizer = Standardizer::fit(&rows);
    let x: Vec<Vec<f64>> = rows.iter().map(|r| standardizer.transform(r)).collect();
    let (model, report) = learn::fit_logistic(&x, labels, &config.logistic);
    Ok((vocabulary, standardizer, model, report))
}

/// Cross-validates, then fits the final model on all documents. Feature
/// selection and standardization only ever see the training split.
pub fn train(docs: &[FactSummary], labels: &[bool], config: &TrainConfig) -> Result<FactualityModel> {
    if docs.len() != labels.len() {
        return Err(Error::invalid("documents and labels differ in length"));
    }
    learn::check_binary(labels, config.folds)?;
    let folds = learn::stratified_folds(labels, config.folds, config.seed);
    let mut fold_accuracies = Vec::with_capacity(config.folds);
    for k in 0..config.folds {
        let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = (0..docs.len()).partition(|&i| folds[i] != k);
        let train_docs: Vec<&FactSummary> = train_idx.iter().map(|&i| &docs[i]).collect();
        let train_labels: Vec<bool> = train_idx.iter().map(|&i| labels[i]).collect();
        learn::check_binary(&train_labels, 2)
            .map_err(|_| Error::invalid(format!("training split of fold {k} has a single class")))?;
        let (vocabulary, standardizer, model, _) = fit_once(&train_docs, &train_labels, config)?;
        let probs: Vec<f64> = test_idx
            .iter()
            .map(|&i| {
                let row = FeatureVector::build(&docs[i], &vocabulary).dense_row();
                model.predict_proba(&standardizer.transform(&row))
            })
            .collect();
        let test_labels: Vec<bool> = test_idx.iter().map(|&i| labels[i]).collect();
        fold_accuracies.push(learn::accuracy(&probs, &test_labels));
    }
    let cv_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    let all: Vec<&FactSummary> = docs.iter().collect();
    let (vocabulary, standardizer, model, fit) = fit_once(&all, labels, config)?;
    Ok(FactualityModel {
        vocabulary,
        standardizer,
        model,
        meta: TrainingMeta {
            folds: config.folds,
            seed: config.seed,
            fraction: config.fraction,
            l2: config.logistic.l2,
            cv_accuracy,
            fold_accuracies,
            fit,
        },
    })
}

impl FactualityModel {
    pub fn features(&self, summary: &FactSummary) -> FeatureVector {
        FeatureVector::build(summary, &self.vocabulary)
    }

    pub fn predict(&self, summary: &FactSummary) -> f64 {
        predict_p_fct(self, &self.features(summary)).expect("vector built from this model's vocabulary")
    }

    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        writeln!(out, "{HEADER}").unwrap();
        writeln!(out, "folds\t{}", m.folds).unwrap();
        writeln!(out, "seed\t{}", m.seed).unwrap();
        writeln!(out, "fraction\t{}", m.fraction).unwrap();
        writeln!(out, "l2\t{}", m.l2).unwrap();
        writeln!(out, "cv_accuracy\t{}", m.cv_accuracy).unwrap();
        let accs: Vec<String> = m.fold_accuracies.iter().map(f64::to_string).collect();
        writeln!(out, "fold_accuracies\t{}", accs.join("\t")).unwrap();
        writeln!(out, "fit\t{}\t{}\t{}", m.fit.iterations, m.fit.grad_norm, m.fit.converged).unwrap();
        writeln!(out, "vocabulary\t{}", self.vocabulary.len()).unwrap();
        for v in &self.vocabulary {
            writeln!(out, "{v}").unwrap();
        }
        for (mean, sd) in self.standardizer.mean.iter().zip(&self.standardizer.std) {
            writeln!(out, "stat\t{mean}\t{sd}").unwrap();
        }
        for w in &self.model.weights {
            writeln!(out, "weight\t{w}").unwrap();
        }
        writeln!(out, "bias\t{}", self.model.bias).unwrap();
        out
    }

    pub fn from_model_string(input: &str) -> Result<FactualityModel> {
        let mut r = ModelReader::new(input);
        if r.raw()? != HEADER {
            return Err(Error::Model(format!("missing `{HEADER}` header")));
        }
        let folds = r.num("folds")?;
        let seed = r.num("seed")?;
        let fraction = r.num("fraction")?;
        let l2 = r.num("l2")?;
        let cv_accuracy = r.num("cv_accuracy")?;
        let fold_accuracies = r
            .field("fold_accuracies")?
            .iter()
            .map(|v| parse(v))
            .collect::<Result<Vec<f64>>>()?;
        let fit_cols = r.field("fit")?;
        if fit_cols.len() != 3 {
            return Err(Error::line(r.line_no(), "expected three fit columns"));
        }
        let fit = FitReport {
            iterations: parse(fit_cols[0])?,
            grad_norm: parse(fit_cols[1])?,
            converged: parse(fit_cols[2])?,
        };
        let vocab_len: usize = r.num("vocabulary")?;
        let mut vocabulary = Vec::with_capacity(vocab_len);
        for _ in 0..vocab_len {
            vocabulary.push(r.raw()?.to_string());
        }
        let dim = DENSE + vocab_len;
        let mut standardizer = Standardizer { mean: Vec::with_capacity(dim), std: Vec::with_capacity(dim) };
        for _ in 0..dim {
            let cols = r.field("stat")?;
            if cols.len() != 2 {
                return Err(Error::line(r.line_no(), "expected mean and std"));
            }
            standardizer.mean.push(parse(cols[0])?);
            standardizer.std.push(parse(cols[1])?);
        }
        let mut weights = Vec::with_capacity(dim);
        for _ in 0..dim {
            weights.push(r.num("weight")?);
        }
        let bias = r.num("bias")?;
        Ok(FactualityModel {
            vocabulary,
            standardizer,
            model: LogisticModel { weights, bias },
            meta: TrainingMeta {
                folds,
                seed,
                fraction,
                l2,
                cv_accuracy,
                fold_accuracies,
                fit,
            },
        })
    }
}

/// Sigmoid of the linear score over standardized features.
pub fn predict_p_fct(model: &FactualityModel, features: &FeatureVector) -> Result<f64> {
    if features.vocab_len != model.vocabulary.len()
        || features.indicators.iter().any(|&i| i >= model.vocabulary.len())
    {
        return Err(Error::Model(format!(
            "feature vector built for a vocabulary of {} relations, model has {}",
            features.vocab_len,
            model.vocabulary.len()
        )));
    }
    let row = features.dense_row();
    Ok(model.model.predict_proba(&model.standardizer.transform(&row)))
}
