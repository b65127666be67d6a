//! Logistic sentence-objectivity classifier.

use std::fmt::Write as _;

use super::patterns::{match_templates, PatternSet};
use super::{term_counts, Lexicon, SentenceClassifier};
use crate::error::{Error, Result};
use crate::learn::{self, parse_num, FitReport, LogisticModel, LogisticParams, ModelReader, Standardizer};
use crate::text::{AnalyzedSentence, PosTag};

const HEADER: &str = "factir-objectivity 1";
pub const FEATURES: usize = 5 + PosTag::ALL.len();

/// Strong, weak and objective term counts, subjective and objective
/// pattern counts, then the normalized part-of-speech histogram.
pub fn sentence_features(sentence: &AnalyzedSentence, lexicon: &Lexicon, patterns: &PatternSet) -> Vec<f64> {
    let counts = term_counts(sentence.tokens(), lexicon);
    let (subj, obj) = patterns.count_matches(&match_templates(sentence));
    let mut row = vec![0.0; FEATURES];
    row[0] = counts.strong as f64;
    row[1] = counts.weak as f64;
    row[2] = counts.objective as f64;
    row[3] = subj as f64;
    row[4] = obj as f64;
    let n = sentence.tokens().len();
    for tok in sentence.tokens() {
        row[5 + tok.tag().index()] += 1.0 / n as f64;
    }
    row
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectivityConfig {
    pub folds: usize,
    pub seed: u64,
    pub logistic: LogisticParams,
}

impl Default for ObjectivityConfig {
    fn default() -> Self {
        ObjectivityConfig { folds: 5, seed: 42, logistic: LogisticParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectivityModel {
    pub standardizer: Standardizer,
    pub model: LogisticModel,
    pub cv_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub fit: FitReport,
}

fn fit_rows(rows: &[&Vec<f64>], labels: &[bool], params: &LogisticParams) -> (Standardizer, LogisticModel, FitReport) {
    let owned: Vec<Vec<f64>> = rows.iter().map(|r| (*r).clone()).collect();
    let standardizer = Standardizer::fit(&owned);
    let x: Vec<Vec<f64>> = owned.iter().map(|r| standardizer.transform(r)).collect();
    let (model, report) = learn::fit_logistic(&x, labels, params);
    (standardizer, model, report)
}

/// Trains on feature rows labeled objective (`true`) or subjective.
pub fn train_objectivity_classifier(
    rows: &[Vec<f64>],
    objective: &[bool],
    config: &ObjectivityConfig,
) -> Result<ObjectivityModel> {
    if rows.len() != objective.len() {
        return Err(Error::invalid("feature rows and labels differ in length"));
    }
    if rows.iter().any(|r| r.len() != FEATURES) {
        return Err(Error::invalid(format!("objectivity features must have {FEATURES} columns")));
    }
    learn::check_binary(objective, config.folds)?;
    let folds = learn::stratified_folds(objective, config.folds, config.seed);
    let mut fold_accuracies = Vec::with_capacity(config.folds);
    for k in 0..config.folds {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..rows.len()).partition(|&i| folds[i] != k);
        let train_rows: Vec<&Vec<f64>> = train.iter().map(|&i| &rows[i]).collect();
        let train_labels: Vec<bool> = train.iter().map(|&i| objective[i]).collect();
        let (std, model, _) = fit_rows(&train_rows, &train_labels, &config.logistic);
        let probs: Vec<f64> = test.iter().map(|&i| model.predict_proba(&std.transform(&rows[i]))).collect();
        let labels: Vec<bool> = test.iter().map(|&i| objective[i]).collect();
        fold_accuracies.push(learn::accuracy(&probs, &labels));
    }
    let all: Vec<&Vec<f64>> = rows.iter().collect();
    let (standardizer, model, fit) = fit_rows(&all, objective, &config.logistic);
    Ok(ObjectivityModel {
        standardizer,
        model,
        cv_accuracy: fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64,
        fold_accuracies,
        fit,
    })
}

impl ObjectivityModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.model.predict_proba(&self.standardizer.transform(row))
    }

    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        writeln!(out, "cv_accuracy\t{}", self.cv_accuracy).unwrap();
        let accs: Vec<String> = self.fold_accuracies.iter().map(f64::to_string).collect();
        writeln!(out, "fold_accuracies\t{}", accs.join("\t")).unwrap();
        writeln!(out, "fit\t{}\t{}\t{}", self.fit.iterations, self.fit.grad_norm, self.fit.converged).unwrap();
        for ((m, s), w) in self.standardizer.mean.iter().zip(&self.standardizer.std).zip(&self.model.weights) {
            writeln!(out, "feature\t{m}\t{s}\t{w}").unwrap();
        }
        writeln!(out, "bias\t{}", self.model.bias).unwrap();
        out
    }

    pub fn from_model_string(input: &str) -> Result<ObjectivityModel> {
        let mut r = ModelReader::new(input);
        if r.raw()? != HEADER {
            return Err(Error::Model(format!("missing `{HEADER}` header")));
        }
        let cv_accuracy = r.num("cv_accuracy")?;
        let fold_accuracies =
            r.field("fold_accuracies")?.iter().map(|v| parse_num(v)).collect::<Result<Vec<f64>>>()?;
        let fit = match r.field("fit")?[..] {
            [a, b, c] => FitReport { iterations: parse_num(a)?, grad_norm: parse_num(b)?, converged: parse_num(c)? },
            _ => return Err(Error::line(r.line_no(), "expected three fit columns")),
        };
        let mut standardizer = Standardizer { mean: Vec::new(), std: Vec::new() };
        let mut weights = Vec::new();
        for _ in 0..FEATURES {
            match r.field("feature")?[..] {
                [m, s, w] => {
                    standardizer.mean.push(parse_num(m)?);
                    standardizer.std.push(parse_num(s)?);
                    weights.push(parse_num(w)?);
                }
                _ => return Err(Error::line(r.line_no(), "expected mean, std and weight")),
            }
        }
        let bias = r.num("bias")?;
        Ok(ObjectivityModel {
            standardizer,
            model: LogisticModel { weights, bias },
            cv_accuracy,
            fold_accuracies,
            fit,
        })
    }
}

/// The trained model together with the resources its features need.
pub struct ObjectivityClassifier<'a> {
    pub lexicon: &'a Lexicon,
    pub patterns: &'a PatternSet,
    pub model: &'a ObjectivityModel,
}

impl SentenceClassifier for ObjectivityClassifier<'_> {
    fn is_objective(&self, sentence: &AnalyzedSentence) -> bool {
        self.model.predict(&sentence_features(sentence, self.lexicon, self.patterns)) >= 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subjectivity::parse_lexicon;
    use crate::text::from_tagged;

    #[test]
    fn feature_layout() {
        let lx = parse_lexicon("awful\tstrong_subjective\nrather\tweak_subjective\ntable\tobjective\n").unwrap();
        let (_, s) = from_tagged(&[
            ("awful".into(), PosTag::JJ),
            ("table".into(), PosTag::NN),
            ("rather".into(), PosTag::RB),
            ("table".into(), PosTag::NN),
        ]);
        let row = sentence_features(&s, &lx, &PatternSet::default());
        assert_eq!(&row[..5], &[1.0, 1.0, 2.0, 0.0, 0.0]);
        assert_eq!(row[5 + PosTag::NN.index()], 0.5);
        assert!((row[5..].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn model_roundtrip() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let mut r = vec![0.0; FEATURES];
            r[0] = if i % 2 == 0 { 0.0 } else { 2.0 + (i % 3) as f64 };
            r[1] = (i % 4) as f64;
            rows.push(r);
            labels.push(i % 2 == 0);
        }
        let m = train_objectivity_classifier(&rows, &labels, &ObjectivityConfig::default()).unwrap();
        assert!(m.cv_accuracy >= 0.95);
        let text = m.to_model_string();
        let back = ObjectivityModel::from_model_string(&text).unwrap();
        assert_eq!(back, m);
        assert!(train_objectivity_classifier(&rows[..3], &labels[..3], &ObjectivityConfig::default()).is_err());
    }
}
